// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "manifest.hpp"
#include "rotequiv/checkpoint.hpp"
#include "rotequiv/config.hpp"
#include "rotequiv/harness/dataset.hpp"
#include "rotequiv/harness/equiv_error.hpp"
#include "rotequiv/harness/gradcheck_suite.hpp"
#include "rotequiv/harness/mismatch.hpp"
#include "rotequiv/harness/report.hpp"
#include "rotequiv/harness/robustness.hpp"
#include "rotequiv/harness/strictness.hpp"
#include "rotequiv/harness/train.hpp"
#include "rotequiv/model.hpp"
#include "rotequiv/tensor_io.hpp"

namespace fs = std::filesystem;

namespace rotequiv::cli {

namespace {

// Independent streams split off --seed.
constexpr std::uint64_t kModelStream = 1;
constexpr std::uint64_t kInputStream = 2;
constexpr std::uint64_t kGradStream = 3;

// Deviation above which a checker-clean model counts as broken.
constexpr double kStrictTolerance = 1e-5;

nn::NetworkConfig resolve_config(const Common& c, const std::string& base_text = "") {
  nn::NetworkConfig cfg;
  if (!base_text.empty()) {
    cfg = nn::parse_config(base_text);
  } else if (!c.config_path.empty()) {
    cfg = nn::load_config(c.config_path);
  } else {
    cfg = nn::NetworkConfig::defaults();
  }
  if (!c.mode.empty()) {
    nn::set_downsample_mode(cfg, nn::parse_downsample_mode(c.mode));
    cfg.validate();
  }
  for (const auto& o : c.overrides) nn::apply_override(cfg, o);
  return cfg;
}

std::string checkpoint_config(const std::string& path) { return nn::Checkpoint::load(path).text("config"); }

void load_weights(nn::Model<float>& model, const std::string& path) {
  const auto ck = nn::Checkpoint::load(path);
  auto reg = model.registry();
  nn::restore_registry(ck, reg);
}

harness::DatasetSpec dataset_spec(const DataFlags& d, int image_size, std::uint64_t seed) {
  harness::DatasetSpec s;
  s.n_train = d.n_train;
  s.n_test = d.n_test;
  s.image_size = image_size;
  s.seed = seed;
  s.noise_std = d.noise_std;
  s.angle_range_deg = d.angle_range;
  return s;
}

nlohmann::json to_json(const harness::DatasetSpec& s) {
  return {{"n_train", s.n_train},         {"n_test", s.n_test}, {"image_size", s.image_size},
          {"seed", s.seed},               {"noise_std", s.noise_std}, {"angle_range_deg", s.angle_range_deg},
          {"center_jitter", s.center_jitter}, {"min_scale", s.min_scale}};
}

void emit(const fs::path& dir, const std::string& file, const std::string& text, Manifest& m, const std::string& kind) {
  harness::write_text(dir / file, text);
  m.add_artifact(file, kind);
}

}  // namespace

int cmd_check(const Common& c, const CheckArgs& a) {
  const auto cfg = resolve_config(c);
  const int size = a.input_size > 0 ? a.input_size : cfg.input_size;
  const auto report = harness::check_strictness(cfg, size);
  std::printf("%-5s %-28s %9s %2s %2s %7s %s\n", "layer", "name", "padded_in", "k", "s", "residue", "verdict");
  for (const auto& r : report.rows) {
    std::printf("%-5d %-28s %9d %2d %2d %7d %s\n", r.layer, r.name.c_str(), r.padded_in, r.k, r.s, r.residue,
                r.pass ? "pass" : "FAIL");
  }
  Manifest m("check", c.argv, c.seed);
  m.set_config(nn::serialize(cfg));
  m.set("input_size", size);
  m.set("strict", report.strict);
  emit(c.out_dir, "strictness.csv", harness::to_csv(report), m, "strictness");
  m.write(c.out_dir);
  if (const auto first = report.first_violation()) {
    const auto& r = report.rows[*first];
    std::printf("NOT STRICT: first flagged layer %s (i=%d, k=%d, s=%d, residue %d)\n", r.name.c_str(), r.padded_in, r.k,
                r.s, r.residue);
    return kViolation;
  }
  std::printf("STRICT: all %zu layers satisfy (i - k) mod s = 0\n", report.rows.size());
  return kOk;
}

int cmd_equiv_error(const Common& c, const EquivArgs& a) {
  for (int angle : a.angles) harness::quarter_turns_for_angle(angle);
  const auto cfg = resolve_config(c, a.checkpoint.empty() ? "" : checkpoint_config(a.checkpoint));
  Rng model_rng = Rng(c.seed).split(kModelStream);
  nn::Model<float> model(cfg, model_rng);
  if (!a.checkpoint.empty()) load_weights(model, a.checkpoint);
  Rng input_rng = Rng(c.seed).split(kInputStream);
  const auto s = static_cast<std::size_t>(cfg.input_size);
  const TensorF inputs =
      TensorF::randn({static_cast<std::size_t>(a.samples), static_cast<std::size_t>(cfg.input_channels), s, s}, input_rng);
  auto report = harness::stagewise_error(model, inputs, a.angles);
  report.input_descriptor = std::to_string(a.samples) + " standard normal inputs " + shape_str(inputs.shape()) +
                            ", seed " + std::to_string(c.seed);
  std::printf("%-6s %9s %14s %14s\n", "stage", "angle_deg", "epsilon", "normalized");
  for (const auto& r : report.rows) {
    std::printf("%-6s %9d %14.6e %14.6e\n", r.stage.c_str(), r.angle_deg, r.epsilon, r.normalized);
  }
  const bool claimed_strict = harness::check_strictness(cfg, cfg.input_size).strict;
  const double worst = report.max_normalized();
  Manifest m("equiv-error", c.argv, c.seed);
  m.set_config(nn::serialize(cfg));
  m.set("model_fingerprint", report.model_fingerprint);
  m.set("inputs", report.input_descriptor);
  if (!a.checkpoint.empty()) m.set("checkpoint", a.checkpoint);
  emit(c.out_dir, "equiv_error.csv", harness::to_csv(report), m, "equivariance");
  m.write(c.out_dir);
  std::printf("max normalized error %.3e (checker verdict: %s)\n", worst, claimed_strict ? "strict" : "not strict");
  if (claimed_strict && worst > kStrictTolerance) {
    std::printf("VIOLATION: checker-clean model exceeds %.0e\n", kStrictTolerance);
    return kViolation;
  }
  return kOk;
}

int cmd_train(const Common& c, const TrainArgs& a) {
  const auto cfg = resolve_config(c, a.resume.empty() || !c.config_path.empty() ? "" : checkpoint_config(a.resume));
  const auto spec = dataset_spec(a.data, cfg.input_size, c.seed);
  std::printf("generating %d + %d samples of %dx%d\n", spec.n_train, spec.n_test, spec.image_size, spec.image_size);
  const auto data = harness::gen_dataset(spec);
  Rng model_rng = Rng(c.seed).split(kModelStream);
  nn::Model<float> model(cfg, model_rng);
  harness::TrainHyper hyper;
  hyper.epochs = a.epochs;
  hyper.batch_size = a.batch_size;
  hyper.optim.lr = a.lr;
  hyper.optim.weight_decay = a.weight_decay;
  hyper.angle_weight = a.angle_weight;
  hyper.seed = c.seed;
  hyper.eps_samples = a.eps_samples;
  harness::Trainer trainer(model, data, hyper);
  if (!a.resume.empty()) {
    trainer.load(a.resume);
    std::printf("resumed from %s after epoch %d\n", a.resume.c_str(), trainer.epochs_done());
  }

  const fs::path out = c.out_dir;
  fs::create_directories(out / "checkpoints");
  Manifest m("train", c.argv, c.seed);
  m.set_config(nn::serialize(cfg));
  m.set("dataset", to_json(spec));
  m.set("hyper", {{"epochs", hyper.epochs},
                  {"batch_size", hyper.batch_size},
                  {"lr", hyper.optim.lr},
                  {"weight_decay", hyper.optim.weight_decay},
                  {"betas", {hyper.optim.beta1, hyper.optim.beta2}},
                  {"angle_weight", hyper.angle_weight},
                  {"eps_samples", hyper.eps_samples}});
  if (!a.resume.empty()) m.set("resumed_from", a.resume);
  std::set<std::string> checkpoints;

  std::printf("%5s %10s %8s %10s  eps per stage\n", "epoch", "loss", "acc", "ang_err");
  trainer.run([&](const harness::EpochRecord& e) {
    std::printf("%5d %10.5f %8.4f %10.3f ", e.epoch, e.loss, e.accuracy, e.angular_error_deg);
    for (double v : e.eps) std::printf(" %.2e", v);
    std::printf("\n");
    std::fflush(stdout);
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%03d.ckpt", e.epoch);
    trainer.save(out / "checkpoints" / name);
    checkpoints.insert(std::string("checkpoints/") + name);
    harness::write_text(out / "training.csv", harness::to_csv(trainer.history()));
  });
  for (const auto& f : checkpoints) m.add_artifact(f, "checkpoint");
  emit(out, "training.csv", harness::to_csv(trainer.history()), m, "training");

  std::vector<harness::PlotSeries> series;
  const auto& h = trainer.history();
  for (std::size_t s = 0; s < h.stages.size(); ++s) {
    harness::PlotSeries ps{h.stages[s], {}, {}};
    for (const auto& e : h.epochs) {
      ps.x.push_back(e.epoch);
      ps.y.push_back(s < e.eps.size() ? e.eps[s] : 0.0);
    }
    series.push_back(std::move(ps));
  }
  emit(out, "training_eps.svg", harness::svg_line_plot("Equivariance error during training", "epoch", "normalized error",
                                                       series, true),
       m, "plot");
  m.write(out);
  return kOk;
}

int cmd_robustness(const Common& c, const RobustnessArgs& a) {
  const auto cfg = resolve_config(c, checkpoint_config(a.checkpoint));
  Rng model_rng = Rng(c.seed).split(kModelStream);
  nn::Model<float> model(cfg, model_rng);
  load_weights(model, a.checkpoint);
  auto spec = dataset_spec(a.data, cfg.input_size, c.seed);
  spec.n_train = 0;
  const auto data = harness::gen_dataset(spec);
  const auto curve = harness::robustness_sweep(model, data.test, a.angles);
  std::printf("%9s %9s %16s\n", "angle_deg", "accuracy", "mean_ang_err_deg");
  for (const auto& r : curve) std::printf("%9.2f %9.4f %16.3f\n", r.angle_deg, r.accuracy, r.mean_angular_error_deg);
  Manifest m("robustness", c.argv, c.seed);
  m.set_config(nn::serialize(cfg));
  m.set("checkpoint", a.checkpoint);
  m.set("dataset", to_json(spec));
  emit(c.out_dir, "robustness.csv", harness::to_csv(curve), m, "robustness");
  harness::PlotSeries acc{"accuracy", {}, {}};
  for (const auto& r : curve) {
    acc.x.push_back(r.angle_deg);
    acc.y.push_back(r.accuracy);
  }
  emit(c.out_dir, "robustness.svg", harness::svg_line_plot("Accuracy under rotation", "angle (deg)", "accuracy", {acc}),
       m, "plot");
  m.write(c.out_dir);
  return kOk;
}

int cmd_mismatch_demo(const Common& c, const MismatchArgs& a) {
  const auto demo = harness::sampling_mismatch_demo(a.n);
  auto print = [](const char* label, const std::vector<harness::Point>& pts) {
    std::printf("%s:", label);
    for (const auto& [x, y] : pts) std::printf(" (%d,%d)", x, y);
    std::printf("\n");
  };
  std::printf("image %dx%d, stride-2 sampling centres as (x=column, y=row), 1-based\n", 2 * a.n, 2 * a.n);
  print("before rotation", demo.pre);
  print("after rotation ", demo.post);
  std::printf("rows before: %s; rows after: %s; sets %s\n", demo.pre_rows_odd ? "all odd" : "mixed",
              demo.post_rows_even ? "all even" : "mixed", demo.disjoint ? "disjoint" : "overlap");
  std::string csv = "set,x,y\n";
  for (const auto& [x, y] : demo.pre) csv += "pre," + std::to_string(x) + "," + std::to_string(y) + "\n";
  for (const auto& [x, y] : demo.post) csv += "post," + std::to_string(x) + "," + std::to_string(y) + "\n";
  Manifest m("mismatch-demo", c.argv, c.seed);
  m.set("n", a.n);
  emit(c.out_dir, "mismatch.csv", csv, m, "mismatch");
  m.write(c.out_dir);
  return demo.pre_rows_odd && demo.post_rows_even && demo.disjoint ? kOk : kViolation;
}

int cmd_gradcheck(const Common& c, const GradcheckArgs& a) {
  const auto rows = harness::run_gradcheck(a.op, a.points, Rng(c.seed).split(kGradStream).next_u64());
  bool ok = true;
  for (const auto& r : rows) {
    std::printf("%-28s %3d points  max rel error %.3e  %s\n", r.op.c_str(), r.points, r.max_rel_error,
                r.pass ? "pass" : "FAIL");
    ok = ok && r.pass;
  }
  Manifest m("gradcheck", c.argv, c.seed);
  m.set("op", a.op);
  m.set("points", a.points);
  emit(c.out_dir, "gradcheck.csv", harness::to_csv(rows), m, "gradcheck");
  m.write(c.out_dir);
  return ok ? kOk : kViolation;
}

int cmd_gen_data(const Common& c, const GenDataArgs& a) {
  const auto spec = dataset_spec(a.data, a.image_size, c.seed);
  const auto data = harness::gen_dataset(spec);
  std::string csv = "split,index,label,shape,theta_deg\n";
  auto rows = [&](const char* split, const harness::Split& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s,%zu,%d,%s,%.9g\n", split, i, s.labels[i],
                    harness::to_string(static_cast<harness::ShapeKind>(s.labels[i])).c_str(), s.theta_deg[i]);
      csv += buf;
    }
  };
  rows("train", data.train);
  rows("test", data.test);
  Manifest m("gen-data", c.argv, c.seed);
  m.set("dataset", to_json(spec));
  const fs::path out = c.out_dir;
  emit(out, "dataset.csv", csv, m, "dataset");
  const std::size_t per = static_cast<std::size_t>(a.image_size) * static_cast<std::size_t>(a.image_size);
  for (int i = 0; i < a.dump && static_cast<std::size_t>(i) < data.train.size(); ++i) {
    TensorF img({static_cast<std::size_t>(a.image_size), static_cast<std::size_t>(a.image_size)});
    std::copy(data.train.images.ptr() + static_cast<std::size_t>(i) * per,
              data.train.images.ptr() + static_cast<std::size_t>(i + 1) * per, img.ptr());
    char name[32];
    std::snprintf(name, sizeof name, "train_%04d.pgm", i);
    write_pgm(out / name, img);
    m.add_artifact(name, "image");
  }
  m.write(out);
  std::printf("wrote %zu train and %zu test samples to %s\n", data.train.size(), data.test.size(),
              (out / "dataset.csv").c_str());
  return kOk;
}

}  // namespace rotequiv::cli
