// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rotequiv::harness {

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::string& text, std::size_t min_cols) {
  std::istringstream is(text);
  std::string line;
  Table t;
  if (!std::getline(is, line)) throw std::runtime_error("CSV is empty");
  t.header = split_fields(line);
  if (t.header.size() < min_cols) throw std::runtime_error("CSV header has too few columns: " + line);
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != t.header.size()) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected " +
                               std::to_string(t.header.size()) + " fields, got " + std::to_string(f.size()));
    }
    t.rows.push_back(std::move(f));
  }
  return t;
}

void expect_header(const Table& t, const std::vector<std::string>& want) {
  if (t.header != want) {
    std::string w;
    for (const auto& h : want) w += (w.empty() ? "" : ",") + h;
    throw std::runtime_error("unexpected CSV header, want " + w);
  }
}

double to_real(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw std::runtime_error("CSV: not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const double v = to_real(s);
  if (v != std::floor(v)) throw std::runtime_error("CSV: not an integer: '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

std::string to_csv(const EquivErrorReport& report) {
  std::string out = "stage,angle_deg,epsilon,epsilon_normalized\n";
  for (const auto& r : report.rows) {
    out += r.stage + "," + std::to_string(r.angle_deg) + "," + real(r.epsilon) + "," + real(r.normalized) + "\n";
  }
  return out;
}

std::string to_csv(const RobustnessCurve& curve) {
  std::string out = "angle_deg,accuracy,mean_angular_error_deg\n";
  for (const auto& r : curve) out += real(r.angle_deg) + "," + real(r.accuracy) + "," + real(r.mean_angular_error_deg) + "\n";
  return out;
}

std::string to_csv(const TrainingHistory& history) {
  std::string out = "epoch,loss,accuracy,angular_error_deg";
  for (const auto& s : history.stages) out += ",eps_" + s;
  out += "\n";
  for (const auto& e : history.epochs) {
    out += std::to_string(e.epoch) + "," + real(e.loss) + "," + real(e.accuracy) + "," + real(e.angular_error_deg);
    for (std::size_t i = 0; i < history.stages.size(); ++i) out += "," + real(i < e.eps.size() ? e.eps[i] : 0.0);
    out += "\n";
  }
  return out;
}

std::string to_csv(const StrictnessReport& report) {
  std::string out = "layer,name,padded_in,k,s,residue,verdict\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.layer) + "," + r.name + "," + std::to_string(r.padded_in) + "," + std::to_string(r.k) + "," +
           std::to_string(r.s) + "," + std::to_string(r.residue) + "," + (r.pass ? "pass" : "fail") + "\n";
  }
  return out;
}

EquivErrorReport parse_equiv_csv(const std::string& text) {
  const auto t = read_table(text, 4);
  expect_header(t, {"stage", "angle_deg", "epsilon", "epsilon_normalized"});
  EquivErrorReport r;
  for (const auto& f : t.rows) r.rows.push_back({f[0], to_int(f[1]), to_real(f[2]), to_real(f[3])});
  return r;
}

RobustnessCurve parse_robustness_csv(const std::string& text) {
  const auto t = read_table(text, 3);
  expect_header(t, {"angle_deg", "accuracy", "mean_angular_error_deg"});
  RobustnessCurve c;
  for (const auto& f : t.rows) c.push_back({to_real(f[0]), to_real(f[1]), to_real(f[2])});
  return c;
}

TrainingHistory parse_training_csv(const std::string& text) {
  const auto t = read_table(text, 4);
  const std::vector<std::string> fixed{"epoch", "loss", "accuracy", "angular_error_deg"};
  if (!std::equal(fixed.begin(), fixed.end(), t.header.begin())) throw std::runtime_error("unexpected training CSV header");
  TrainingHistory h;
  for (std::size_t i = 4; i < t.header.size(); ++i) {
    if (t.header[i].rfind("eps_", 0) != 0) throw std::runtime_error("unexpected training CSV column " + t.header[i]);
    h.stages.push_back(t.header[i].substr(4));
  }
  for (const auto& f : t.rows) {
    EpochRecord e;
    e.epoch = to_int(f[0]);
    e.loss = to_real(f[1]);
    e.accuracy = to_real(f[2]);
    e.angular_error_deg = to_real(f[3]);
    for (std::size_t i = 4; i < f.size(); ++i) e.eps.push_back(to_real(f[i]));
    h.epochs.push_back(std::move(e));
  }
  return h;
}

StrictnessReport parse_strictness_csv(const std::string& text) {
  const auto t = read_table(text, 7);
  expect_header(t, {"layer", "name", "padded_in", "k", "s", "residue", "verdict"});
  StrictnessReport r;
  for (const auto& f : t.rows) {
    if (f[6] != "pass" && f[6] != "fail") throw std::runtime_error("strictness CSV: bad verdict '" + f[6] + "'");
    r.rows.push_back({to_int(f[0]), f[1], to_int(f[2]), to_int(f[3]), to_int(f[4]), to_int(f[5]), f[6] == "pass"});
    r.strict = r.strict && r.rows.back().pass;
  }
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_y) {
  constexpr double kW = 640, kH = 400, kL = 70, kR = 150, kT = 40, kB = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  double min_pos = std::numeric_limits<double>::infinity();
  for (const auto& s : series)
    for (double v : s.y)
      if (v > 0) min_pos = std::min(min_pos, v);
  if (!std::isfinite(min_pos)) min_pos = 1e-12;
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, min_pos)) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (ty(y) - y0) / (y1 - y0) * (kH - kT - kB); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n"
     << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << x_label << "</text>\n"
     << "<text x=\"16\" y=\"" << kH / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << kH / 2 << ")\">"
     << y_label << (log_y ? " (log10)" : "") << "</text>\n"
     << "<text x=\"" << kL - 6 << "\" y=\"" << kH - kB << "\" text-anchor=\"end\" font-size=\"10\">" << real(y0)
     << "</text>\n"
     << "<text x=\"" << kL - 6 << "\" y=\"" << kT + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << real(y1)
     << "</text>\n"
     << "<text x=\"" << kL << "\" y=\"" << kH - kB + 14 << "\" font-size=\"10\">" << real(x0) << "</text>\n"
     << "<text x=\"" << kW - kR << "\" y=\"" << kH - kB + 14 << "\" text-anchor=\"end\" font-size=\"10\">" << real(x1)
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      os << (i ? " " : "") << px(s.x[i]) << "," << py(s.y[i]);
    }
    os << "\"/>\n"
       << "<text x=\"" << kW - kR + 10 << "\" y=\"" << kT + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << color
       << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace rotequiv::harness
