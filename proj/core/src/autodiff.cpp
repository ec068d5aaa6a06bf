// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace rotequiv::ad {

namespace {

thread_local bool g_grad_enabled = true;

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  T* d = dst.ptr();
  const T* s = src.ptr();
  for (std::size_t i = 0; i < dst.numel(); ++i) d[i] += s[i];
}

template <typename T>
bool wants(const NodePtr<T>& p) {
  return p && p->requires_grad;
}

// Sizes for an axis-1 view of x: [outer, C, inner].
struct ChannelView {
  std::size_t outer, channels, inner;
};

ChannelView channel_view(const Shape& s, const char* op) {
  if (s.size() < 2) throw ShapeError(std::string(op) + ": rank must be >= 2, got " + shape_str(s));
  std::size_t inner = 1;
  for (std::size_t i = 2; i < s.size(); ++i) inner *= s[i];
  return {s[0], s[1], inner};
}

}  // namespace

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
void Node<T>::accumulate(const Tensor<T>& g) {
  if (!requires_grad) return;
  if (g.shape() != value.shape()) {
    throw ShapeError("gradient shape " + shape_str(g.shape()) + " does not match value " +
                     shape_str(value.shape()));
  }
  if (grad.empty()) {
    grad = g;
  } else {
    add_into(grad, g);
  }
}

template <typename T>
void Node<T>::accumulate(Tensor<T>&& g) {
  if (!requires_grad) return;
  if (g.shape() != value.shape()) {
    throw ShapeError("gradient shape " + shape_str(g.shape()) + " does not match value " +
                     shape_str(value.shape()));
  }
  if (grad.empty()) {
    grad = std::move(g);
  } else {
    add_into(grad, g);
  }
}

template <typename T>
Var<T>::Var(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

template <typename T>
const Tensor<T>& Var<T>::grad() const {
  if (node_->grad.empty()) node_->grad = Tensor<T>(node_->value.shape());
  return node_->grad;
}

template <typename T>
void Var<T>::zero_grad() {
  node_->grad = Tensor<T>(node_->value.shape());
}

template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents, BackwardFn<T> fn) {
  const bool needs = g_grad_enabled &&
                     std::any_of(parents.begin(), parents.end(), [](const Var<T>& p) { return p.requires_grad(); });
  Var<T> out(std::move(value), needs);
  if (needs) {
    auto& node = *out.node();
    node.parents.reserve(parents.size());
    for (auto& p : parents) node.parents.push_back(p.node());
    node.backward = std::move(fn);
  }
  return out;
}

template <typename T>
void backward(const Var<T>& loss) {
  if (!loss.defined() || loss.value().numel() != 1) {
    throw ShapeError("backward: loss must hold exactly one element");
  }
  if (!loss.requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.node()->accumulate(Tensor<T>(loss.shape(), T(1)));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (!node->backward || node->grad.empty()) continue;
    node->backward(node->grad, node->parents);
  }
}

// --- elementwise ---------------------------------------------------------------

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  return make_op<T>(rotequiv::add(a.value(), b.value()), {a, b},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      p[0]->accumulate(g);
                      p[1]->accumulate(g);
                    });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  return make_op<T>(rotequiv::sub(a.value(), b.value()), {a, b},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      p[0]->accumulate(g);
                      if (wants(p[1])) p[1]->accumulate(rotequiv::scale(g, T(-1)));
                    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  return make_op<T>(rotequiv::mul(a.value(), b.value()), {a, b},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      if (wants(p[0])) p[0]->accumulate(rotequiv::mul(g, p[1]->value));
                      if (wants(p[1])) p[1]->accumulate(rotequiv::mul(g, p[0]->value));
                    });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  return make_op<T>(rotequiv::scale(a.value(), factor), {a},
                    [factor](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      p[0]->accumulate(rotequiv::scale(g, factor));
                    });
}

template <typename T>
Var<T> silu(const Var<T>& a) {
  return make_op<T>(rotequiv::silu(a.value()), {a},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      const Tensor<T>& x = p[0]->value;
                      Tensor<T> gx(x.shape());
                      for (std::size_t i = 0; i < x.numel(); ++i) {
                        const T s = T(1) / (T(1) + std::exp(-x[i]));
                        gx[i] = g[i] * s * (T(1) + x[i] * (T(1) - s));
                      }
                      p[0]->accumulate(std::move(gx));
                    });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  return make_op<T>(rotequiv::relu(a.value()), {a},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      const Tensor<T>& x = p[0]->value;
                      Tensor<T> gx(x.shape());
                      for (std::size_t i = 0; i < x.numel(); ++i) gx[i] = x[i] > T(0) ? g[i] : T(0);
                      p[0]->accumulate(std::move(gx));
                    });
}

template <typename T>
Var<T> hard_sigmoid(const Var<T>& a) {
  return make_op<T>(rotequiv::hard_sigmoid(a.value()), {a},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      const Tensor<T>& x = p[0]->value;
                      Tensor<T> gx(x.shape());
                      for (std::size_t i = 0; i < x.numel(); ++i) {
                        gx[i] = (x[i] > T(-3) && x[i] < T(3)) ? g[i] / T(6) : T(0);
                      }
                      p[0]->accumulate(std::move(gx));
                    });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  T acc = 0;
  for (T v : a.value().data()) acc += v;
  return make_op<T>(Tensor<T>::scalar(acc), {a},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      p[0]->accumulate(Tensor<T>(p[0]->value.shape(), g[0]));
                    });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.value().numel()));
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  return make_op<T>(a.value().reshaped(std::move(shape)), {a},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      p[0]->accumulate(g.reshaped(p[0]->value.shape()));
                    });
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  return make_op<T>(rotequiv::matmul(a.value(), b.value()), {a, b},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      if (wants(p[0])) p[0]->accumulate(rotequiv::matmul(g, rotequiv::transpose(p[1]->value)));
                      if (wants(p[1])) p[1]->accumulate(rotequiv::matmul(rotequiv::transpose(p[0]->value), g));
                    });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  if (x.value().rank() != 2 || w.value().rank() != 2 || b.value().rank() != 1 ||
      x.value().dim(1) != w.value().dim(1) || b.value().dim(0) != w.value().dim(0)) {
    throw ShapeError("linear: incompatible shapes x" + shape_str(x.shape()) + " w" + shape_str(w.shape()) +
                     " b" + shape_str(b.shape()));
  }
  Tensor<T> y = rotequiv::matmul(x.value(), rotequiv::transpose(w.value()));
  const std::size_t rows = y.dim(0), cols = y.dim(1);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] += b.value()[c];
  return make_op<T>(std::move(y), {x, w, b},
                    [rows, cols](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      if (wants(p[0])) p[0]->accumulate(rotequiv::matmul(g, p[1]->value));
                      if (wants(p[1])) p[1]->accumulate(rotequiv::matmul(rotequiv::transpose(g), p[0]->value));
                      if (wants(p[2])) {
                        Tensor<T> gb({cols});
                        for (std::size_t r = 0; r < rows; ++r)
                          for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
                        p[2]->accumulate(std::move(gb));
                      }
                    });
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& kernel, const ConvSpec& spec) {
  return make_op<T>(rotequiv::conv2d(x.value(), kernel.value(), spec), {x, kernel},
                    [spec](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      if (wants(p[0])) {
                        p[0]->accumulate(rotequiv::conv2d_grad_input(g, p[1]->value, p[0]->value.shape(), spec));
                      }
                      if (wants(p[1])) {
                        p[1]->accumulate(rotequiv::conv2d_grad_kernel(p[0]->value, g, p[1]->value.shape(), spec));
                      }
                    });
}

template <typename T>
Var<T> add_channel_bias(const Var<T>& x, const Var<T>& bias) {
  const auto v = channel_view(x.shape(), "add_channel_bias");
  if (bias.value().rank() != 1 || bias.value().dim(0) != v.channels) {
    throw ShapeError("add_channel_bias: bias " + shape_str(bias.shape()) + " for input " + shape_str(x.shape()));
  }
  Tensor<T> y = x.value();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t c = 0; c < v.channels; ++c) {
      T* dst = y.ptr() + (o * v.channels + c) * v.inner;
      const T b = bias.value()[c];
      for (std::size_t i = 0; i < v.inner; ++i) dst[i] += b;
    }
  return make_op<T>(std::move(y), {x, bias},
                    [v](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      p[0]->accumulate(g);
                      if (wants(p[1])) {
                        Tensor<T> gb({v.channels});
                        for (std::size_t o = 0; o < v.outer; ++o)
                          for (std::size_t c = 0; c < v.channels; ++c) {
                            const T* src = g.ptr() + (o * v.channels + c) * v.inner;
                            T acc = 0;
                            for (std::size_t i = 0; i < v.inner; ++i) acc += src[i];
                            gb[c] += acc;
                          }
                        p[1]->accumulate(std::move(gb));
                      }
                    });
}

template <typename T>
Var<T> channel_scale(const Var<T>& x, const Var<T>& s) {
  const auto v = channel_view(x.shape(), "channel_scale");
  if (s.shape() != Shape{v.outer, v.channels}) {
    throw ShapeError("channel_scale: scale " + shape_str(s.shape()) + " for input " + shape_str(x.shape()));
  }
  Tensor<T> y(x.shape());
  for (std::size_t oc = 0; oc < v.outer * v.channels; ++oc) {
    const T f = s.value()[oc];
    const T* src = x.value().ptr() + oc * v.inner;
    T* dst = y.ptr() + oc * v.inner;
    for (std::size_t i = 0; i < v.inner; ++i) dst[i] = src[i] * f;
  }
  return make_op<T>(std::move(y), {x, s},
                    [v](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      if (wants(p[0])) {
                        Tensor<T> gx(p[0]->value.shape());
                        for (std::size_t oc = 0; oc < v.outer * v.channels; ++oc) {
                          const T f = p[1]->value[oc];
                          for (std::size_t i = 0; i < v.inner; ++i) gx[oc * v.inner + i] = g[oc * v.inner + i] * f;
                        }
                        p[0]->accumulate(std::move(gx));
                      }
                      if (wants(p[1])) {
                        Tensor<T> gs(p[1]->value.shape());
                        for (std::size_t oc = 0; oc < v.outer * v.channels; ++oc) {
                          T acc = 0;
                          for (std::size_t i = 0; i < v.inner; ++i) {
                            acc += g[oc * v.inner + i] * p[0]->value[oc * v.inner + i];
                          }
                          gs[oc] = acc;
                        }
                        p[1]->accumulate(std::move(gs));
                      }
                    });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  return make_op<T>(rotequiv::global_avg_pool(x.value()), {x},
                    [](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      const Shape& s = p[0]->value.shape();
                      const std::size_t hw = s[2] * s[3];
                      Tensor<T> gx(s);
                      for (std::size_t i = 0; i < g.numel(); ++i) {
                        const T v = g[i] / static_cast<T>(hw);
                        std::fill_n(gx.ptr() + i * hw, hw, v);
                      }
                      p[0]->accumulate(std::move(gx));
                    });
}

template <typename T>
Var<T> pad2d(const Var<T>& x, int pad) {
  return make_op<T>(rotequiv::pad2d(x.value(), pad), {x},
                    [pad](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      p[0]->accumulate(rotequiv::crop2d(g, pad));
                    });
}

template <typename T>
Var<T> repeat_interleave(const Var<T>& a, std::size_t repeats) {
  if (repeats == 0) throw ShapeError("repeat_interleave: repeats must be positive");
  Shape s = a.shape();
  const std::size_t n = a.value().numel();
  s.back() *= repeats;
  Tensor<T> y(s);
  for (std::size_t i = 0; i < n; ++i) std::fill_n(y.ptr() + i * repeats, repeats, a.value()[i]);
  return make_op<T>(std::move(y), {a},
                    [n, repeats](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      Tensor<T> ga(p[0]->value.shape());
                      for (std::size_t i = 0; i < n; ++i) {
                        T acc = 0;
                        for (std::size_t r = 0; r < repeats; ++r) acc += g[i * repeats + r];
                        ga[i] = acc;
                      }
                      p[0]->accumulate(std::move(ga));
                    });
}

template <typename T>
Var<T> channel_slice(const Var<T>& x, std::size_t start, std::size_t count) {
  const auto v = channel_view(x.shape(), "channel_slice");
  if (count == 0 || start + count > v.channels) {
    throw ShapeError("channel_slice: [" + std::to_string(start) + ", " + std::to_string(start + count) +
                     ") outside " + shape_str(x.shape()));
  }
  Shape s = x.shape();
  s[1] = count;
  Tensor<T> y(s);
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(x.value().ptr() + (o * v.channels + start) * v.inner, count * v.inner,
                y.ptr() + o * count * v.inner);
  }
  return make_op<T>(std::move(y), {x},
                    [v, start, count](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      Tensor<T> gx(p[0]->value.shape());
                      for (std::size_t o = 0; o < v.outer; ++o) {
                        std::copy_n(g.ptr() + o * count * v.inner, count * v.inner,
                                    gx.ptr() + (o * v.channels + start) * v.inner);
                      }
                      p[0]->accumulate(std::move(gx));
                    });
}

template <typename T>
Var<T> channel_concat(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("channel_concat: no inputs");
  Shape s = parts[0].shape();
  const auto v0 = channel_view(s, "channel_concat");
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& part : parts) {
    const auto v = channel_view(part.shape(), "channel_concat");
    if (v.outer != v0.outer || v.inner != v0.inner || part.value().rank() != s.size()) {
      throw ShapeError("channel_concat: incompatible part " + shape_str(part.shape()) + " vs " + shape_str(s));
    }
    widths.push_back(v.channels);
    total += v.channels;
  }
  s[1] = total;
  Tensor<T> y(s);
  const std::size_t inner = v0.inner, outer = v0.outer;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(parts[k].value().ptr() + o * widths[k] * inner, widths[k] * inner,
                  y.ptr() + (o * total + offset) * inner);
    }
    offset += widths[k];
  }
  std::vector<Var<T>> parents(parts.begin(), parts.end());
  return make_op<T>(std::move(y), std::move(parents),
                    [widths, total, inner, outer](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      std::size_t off = 0;
                      for (std::size_t k = 0; k < p.size(); ++k) {
                        if (wants(p[k])) {
                          Tensor<T> gk(p[k]->value.shape());
                          for (std::size_t o = 0; o < outer; ++o) {
                            std::copy_n(g.ptr() + (o * total + off) * inner, widths[k] * inner,
                                        gk.ptr() + o * widths[k] * inner);
                          }
                          p[k]->accumulate(std::move(gk));
                        }
                        off += widths[k];
                      }
                    });
}

template <typename T>
Var<T> channel_permute(const Var<T>& x, std::span<const std::size_t> perm) {
  const auto v = channel_view(x.shape(), "channel_permute");
  if (perm.size() != v.channels) throw ShapeError("channel_permute: permutation length mismatch");
  std::vector<bool> used(v.channels, false);
  for (auto c : perm) {
    if (c >= v.channels) throw ShapeError("channel_permute: index out of range");
    if (used[c]) throw ShapeError("channel_permute: index " + std::to_string(c) + " repeated");
    used[c] = true;
  }
  std::vector<std::size_t> pv(perm.begin(), perm.end());
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t c = 0; c < v.channels; ++c) {
      std::copy_n(x.value().ptr() + (o * v.channels + pv[c]) * v.inner, v.inner,
                  y.ptr() + (o * v.channels + c) * v.inner);
    }
  return make_op<T>(std::move(y), {x},
                    [v, pv](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      Tensor<T> gx(p[0]->value.shape());
                      for (std::size_t o = 0; o < v.outer; ++o)
                        for (std::size_t c = 0; c < v.channels; ++c) {
                          const T* src = g.ptr() + (o * v.channels + c) * v.inner;
                          T* dst = gx.ptr() + (o * v.channels + pv[c]) * v.inner;
                          for (std::size_t i = 0; i < v.inner; ++i) dst[i] += src[i];
                        }
                      p[0]->accumulate(std::move(gx));
                    });
}

template <typename T>
Var<T> group_mean(const Var<T>& a, std::size_t group_size) {
  Shape s = a.shape();
  if (group_size == 0 || s.back() % group_size != 0) {
    throw ShapeError("group_mean: last axis of " + shape_str(s) + " not divisible by " + std::to_string(group_size));
  }
  s.back() /= group_size;
  const std::size_t groups = a.value().numel() / group_size;
  Tensor<T> y(s);
  std::vector<T> buf(group_size);
  for (std::size_t i = 0; i < groups; ++i) {
    std::copy_n(a.value().ptr() + i * group_size, group_size, buf.begin());
    std::sort(buf.begin(), buf.end());
    T acc = 0;
    for (T v : buf) acc += v;
    y[i] = acc / static_cast<T>(group_size);
  }
  return make_op<T>(std::move(y), {a},
                    [groups, group_size](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      Tensor<T> ga(p[0]->value.shape());
                      for (std::size_t i = 0; i < groups; ++i) {
                        std::fill_n(ga.ptr() + i * group_size, group_size, g[i] / static_cast<T>(group_size));
                      }
                      p[0]->accumulate(std::move(ga));
                    });
}

template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const int> labels) {
  if (logits.value().rank() != 2 || logits.value().dim(0) != labels.size()) {
    throw ShapeError("cross_entropy: logits " + shape_str(logits.shape()) + " for " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t b = logits.value().dim(0), k = logits.value().dim(1);
  Tensor<T> probs({b, k});
  T loss = 0;
  for (std::size_t i = 0; i < b; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw ShapeError("cross_entropy: label " + std::to_string(label) + " out of range");
    }
    const T* row = logits.value().ptr() + i * k;
    const T mx = *std::max_element(row, row + k);
    T z = 0;
    for (std::size_t j = 0; j < k; ++j) {
      probs[i * k + j] = std::exp(row[j] - mx);
      z += probs[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] /= z;
    loss += std::log(z) + mx - row[label];
  }
  loss /= static_cast<T>(b);
  std::vector<int> lab(labels.begin(), labels.end());
  return make_op<T>(Tensor<T>::scalar(loss), {logits},
                    [probs = std::move(probs), lab, b, k](const Tensor<T>& g, std::span<const NodePtr<T>> p) {
                      Tensor<T> gl = probs;
                      for (std::size_t i = 0; i < b; ++i) gl[i * k + lab[i]] -= T(1);
                      p[0]->accumulate(rotequiv::scale(gl, g[0] / static_cast<T>(b)));
                    });
}

#define ROTEQUIV_AD_INSTANTIATE(T)                                                        \
  template struct Node<T>;                                                                \
  template class Var<T>;                                                                  \
  template Var<T> make_op(Tensor<T>, std::vector<Var<T>>, BackwardFn<T>);                 \
  template void backward(const Var<T>&);                                                  \
  template Var<T> add(const Var<T>&, const Var<T>&);                                      \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                      \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                      \
  template Var<T> scale(const Var<T>&, T);                                                \
  template Var<T> silu(const Var<T>&);                                                    \
  template Var<T> relu(const Var<T>&);                                                    \
  template Var<T> hard_sigmoid(const Var<T>&);                                            \
  template Var<T> sum(const Var<T>&);                                                     \
  template Var<T> mean(const Var<T>&);                                                    \
  template Var<T> reshape(const Var<T>&, Shape);                                          \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                   \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                    \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const ConvSpec&);                  \
  template Var<T> add_channel_bias(const Var<T>&, const Var<T>&);                         \
  template Var<T> channel_scale(const Var<T>&, const Var<T>&);                            \
  template Var<T> global_avg_pool(const Var<T>&);                                         \
  template Var<T> pad2d(const Var<T>&, int);                                              \
  template Var<T> repeat_interleave(const Var<T>&, std::size_t);                          \
  template Var<T> channel_slice(const Var<T>&, std::size_t, std::size_t);                 \
  template Var<T> channel_concat(std::span<const Var<T>>);                                \
  template Var<T> channel_permute(const Var<T>&, std::span<const std::size_t>);           \
  template Var<T> group_mean(const Var<T>&, std::size_t);                                  \
  template Var<T> cross_entropy(const Var<T>&, std::span<const int>);

ROTEQUIV_AD_INSTANTIATE(float)
ROTEQUIV_AD_INSTANTIATE(double)

#undef ROTEQUIV_AD_INSTANTIATE

}  // namespace rotequiv::ad
