// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rotequiv::nn {

namespace {

template <typename T>
Var<T> he_normal(Shape shape, std::size_t fan_in, Rng& rng) {
  const T stddev = static_cast<T>(std::sqrt(2.0 / static_cast<double>(fan_in)));
  return Var<T>::parameter(Tensor<T>::randn(std::move(shape), rng, stddev));
}

std::size_t order_of(const CyclicGroup& g) { return static_cast<std::size_t>(g.order()); }

}  // namespace

template <typename T>
std::size_t Registry<T>::param_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.var.value().numel();
  return n;
}

std::string to_string(DownsampleMode mode) { return mode == DownsampleMode::strict ? "strict" : "approx"; }

DownsampleMode parse_downsample_mode(const std::string& text) {
  if (text == "strict") return DownsampleMode::strict;
  if (text == "approx") return DownsampleMode::approx;
  throw std::invalid_argument("downsample mode must be 'strict' or 'approx', got '" + text + "'");
}

// --- EquivConv ---------------------------------------------------------------------

template <typename T>
EquivConv<T>::EquivConv(ConvKind kind, std::size_t in, std::size_t out_fields, ConvSpec spec, CyclicGroup group,
                        Rng& rng)
    : kind_(kind), in_(in), out_fields_(out_fields), spec_(spec), group_(group) {
  if (in == 0 || out_fields == 0) throw std::invalid_argument("EquivConv: channel counts must be positive");
  const std::size_t k = static_cast<std::size_t>(spec.k);
  const std::size_t base_in = in_channels();
  weight_ = he_normal<T>({out_fields, base_in, k, k}, base_in * k * k, rng);
  bias_ = Var<T>::parameter(Tensor<T>({out_fields}));
}

template <typename T>
std::size_t EquivConv<T>::in_channels() const {
  return kind_ == ConvKind::lift ? in_ : in_ * order_of(group_);
}

template <typename T>
Var<T> EquivConv<T>::expanded_kernel() const {
  return kind_ == ConvKind::lift ? expand_lift(weight_, group_) : expand_group(weight_, group_);
}

template <typename T>
Var<T> EquivConv<T>::forward(const Var<T>& x) const {
  if (x.value().rank() != 4 || x.value().dim(1) != in_channels()) {
    throw ShapeError("EquivConv: expected " + std::to_string(in_channels()) + " input channels, got " +
                     shape_str(x.shape()));
  }
  Var<T> y = ad::conv2d(x, expanded_kernel(), spec_);
  return ad::add_channel_bias(y, ad::repeat_interleave(bias_, order_of(group_)));
}

template <typename T>
void EquivConv<T>::collect(const std::string& prefix, Registry<T>& reg) {
  reg.params.push_back({prefix + "weight", weight_});
  reg.params.push_back({prefix + "bias", bias_});
}

// --- EquivBatchNorm ----------------------------------------------------------------

template <typename T>
EquivBatchNorm<T>::EquivBatchNorm(std::size_t channels, CyclicGroup group, NormLayout layout)
    : channels_(channels), group_(group), layout_(layout) {
  if (channels % order_of(group) != 0) {
    throw ShapeError("EquivBatchNorm: " + std::to_string(channels) + " channels not divisible by N=" +
                     std::to_string(group.order()));
  }
  const std::size_t n = layout == NormLayout::per_field ? channels / order_of(group) : channels;
  gamma_ = Var<T>::parameter(Tensor<T>({n}, T(1)));
  beta_ = Var<T>::parameter(Tensor<T>({n}));
  running_mean_ = Tensor<T>({n});
  running_var_ = Tensor<T>({n}, T(1));
}

template <typename T>
Var<T> EquivBatchNorm<T>::forward(const Var<T>& x, bool training) {
  const Tensor<T>& xv = x.value();
  if (xv.rank() != 4 || xv.dim(1) != channels_) {
    throw ShapeError("EquivBatchNorm: expected " + std::to_string(channels_) + " channels, got " + shape_str(xv.shape()));
  }
  const std::size_t b = xv.dim(0), hw = xv.dim(2) * xv.dim(3);
  const std::size_t per = layout_ == NormLayout::per_field ? order_of(group_) : 1;  // channels per group
  const std::size_t groups = channels_ / per;
  const std::size_t m = b * per * hw;

  std::vector<double> mu(groups), inv_std(groups);
  if (training) {
    if (m < 2) throw NumericError("EquivBatchNorm: need more than one value per group in training mode");
    std::vector<double> s1(groups, 0.0), s2(groups, 0.0);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t c = 0; c < channels_; ++c) {
        const T* p = xv.ptr() + (i * channels_ + c) * hw;
        double acc = 0.0;
        for (std::size_t j = 0; j < hw; ++j) acc += p[j];
        s1[c / per] += acc;
      }
    for (std::size_t g = 0; g < groups; ++g) mu[g] = s1[g] / static_cast<double>(m);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t c = 0; c < channels_; ++c) {
        const T* p = xv.ptr() + (i * channels_ + c) * hw;
        const double mc = mu[c / per];
        double acc = 0.0;
        for (std::size_t j = 0; j < hw; ++j) acc += (p[j] - mc) * (p[j] - mc);
        s2[c / per] += acc;
      }
    for (std::size_t g = 0; g < groups; ++g) {
      const double var = s2[g] / static_cast<double>(m);
      inv_std[g] = 1.0 / std::sqrt(var + kEps);
      const double unbiased = s2[g] / static_cast<double>(m - 1);
      running_mean_[g] = static_cast<T>((1.0 - kMomentum) * running_mean_[g] + kMomentum * mu[g]);
      running_var_[g] = static_cast<T>((1.0 - kMomentum) * running_var_[g] + kMomentum * unbiased);
    }
  } else {
    for (std::size_t g = 0; g < groups; ++g) {
      mu[g] = running_mean_[g];
      inv_std[g] = 1.0 / std::sqrt(static_cast<double>(running_var_[g]) + kEps);
    }
  }

  Tensor<T> xhat(xv.shape());
  Tensor<T> y(xv.shape());
  const Tensor<T>& gamma = gamma_.value();
  const Tensor<T>& beta = beta_.value();
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t c = 0; c < channels_; ++c) {
      const std::size_t g = c / per;
      const std::size_t off = (i * channels_ + c) * hw;
      const T mg = static_cast<T>(mu[g]), is = static_cast<T>(inv_std[g]);
      for (std::size_t j = 0; j < hw; ++j) {
        const T h = (xv[off + j] - mg) * is;
        xhat[off + j] = h;
        y[off + j] = gamma[g] * h + beta[g];
      }
    }

  const std::size_t channels = channels_;
  return ad::make_op<T>(
      std::move(y), {x, gamma_, beta_},
      [xhat = std::move(xhat), inv_std, training, b, hw, per, groups, m, channels](
          const Tensor<T>& gy, std::span<const ad::NodePtr<T>> p) {
        std::vector<double> sum_g(groups, 0.0), sum_gx(groups, 0.0);
        for (std::size_t i = 0; i < b; ++i)
          for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t off = (i * channels + c) * hw;
            double a = 0.0, bb = 0.0;
            for (std::size_t j = 0; j < hw; ++j) {
              a += gy[off + j];
              bb += static_cast<double>(gy[off + j]) * xhat[off + j];
            }
            sum_g[c / per] += a;
            sum_gx[c / per] += bb;
          }
        if (p[1]->requires_grad) {
          Tensor<T> gg({groups});
          for (std::size_t g = 0; g < groups; ++g) gg[g] = static_cast<T>(sum_gx[g]);
          p[1]->accumulate(std::move(gg));
        }
        if (p[2]->requires_grad) {
          Tensor<T> gb({groups});
          for (std::size_t g = 0; g < groups; ++g) gb[g] = static_cast<T>(sum_g[g]);
          p[2]->accumulate(std::move(gb));
        }
        if (p[0]->requires_grad) {
          const Tensor<T>& gamma = p[1]->value;
          Tensor<T> gx(gy.shape());
          const double inv_m = 1.0 / static_cast<double>(m);
          for (std::size_t i = 0; i < b; ++i)
            for (std::size_t c = 0; c < channels; ++c) {
              const std::size_t g = c / per;
              const std::size_t off = (i * channels + c) * hw;
              const double k = gamma[g] * inv_std[g];
              for (std::size_t j = 0; j < hw; ++j) {
                double v = gy[off + j];
                if (training) v -= (sum_g[g] + xhat[off + j] * sum_gx[g]) * inv_m;
                gx[off + j] = static_cast<T>(k * v);
              }
            }
          p[0]->accumulate(std::move(gx));
        }
      });
}

template <typename T>
void EquivBatchNorm<T>::collect(const std::string& prefix, Registry<T>& reg) {
  reg.params.push_back({prefix + "gamma", gamma_});
  reg.params.push_back({prefix + "beta", beta_});
  reg.buffers.push_back({prefix + "running_mean", &running_mean_});
  reg.buffers.push_back({prefix + "running_var", &running_var_});
}

// --- ConvModule ---------------------------------------------------------------------

template <typename T>
ConvModule<T>::ConvModule(ConvKind kind, std::size_t in, std::size_t out_fields, ConvSpec spec, CyclicGroup group,
                          Rng& rng, NormLayout layout)
    : conv_(kind, in, out_fields, spec, group, rng), norm_(out_fields * order_of(group), group, layout) {}

template <typename T>
Var<T> ConvModule<T>::forward(const Var<T>& x, bool training) {
  return ad::silu(norm_.forward(conv_.forward(x), training));
}

template <typename T>
void ConvModule<T>::collect(const std::string& prefix, Registry<T>& reg) {
  conv_.collect(prefix + "conv.", reg);
  norm_.collect(prefix + "bn.", reg);
}

// --- DownsampleBlock ----------------------------------------------------------------

template <typename T>
DownsampleBlock<T>::DownsampleBlock(DownsampleMode mode, std::size_t in_fields, std::size_t out_fields,
                                    int in_extent, CyclicGroup group, Rng& rng)
    : mode_(mode),
      in_extent_(in_extent),
      tuning_(mode == DownsampleMode::strict && in_extent % 2 == 0
                  ? std::optional<ConvModule<T>>(std::in_place, ConvKind::group, in_fields, in_fields, kTuningSpec,
                                                 group, rng)
                  : std::nullopt),
      down_(ConvKind::group, in_fields, out_fields, kDownSpec, group, rng) {
  if (in_extent < 2) throw ShapeError("DownsampleBlock: extent must be >= 2, got " + std::to_string(in_extent));
  (void)out_extent();
}

template <typename T>
int DownsampleBlock<T>::out_extent() const {
  int e = in_extent_;
  if (tuning_) e = out_size(kTuningSpec, e);
  return out_size(kDownSpec, e);
}

template <typename T>
Var<T> DownsampleBlock<T>::forward(const Var<T>& x, bool training) {
  const auto& s = x.shape();
  if (s.size() != 4 || s[2] != static_cast<std::size_t>(in_extent_) || s[3] != static_cast<std::size_t>(in_extent_)) {
    throw ShapeError("DownsampleBlock: built for extent " + std::to_string(in_extent_) + ", got " + shape_str(s));
  }
  Var<T> h = x;
  if (tuning_) h = tuning_->forward(h, training);
  return down_.forward(h, training);
}

template <typename T>
void DownsampleBlock<T>::collect(const std::string& prefix, Registry<T>& reg) {
  if (tuning_) tuning_->collect(prefix + "tuning.", reg);
  down_.collect(prefix + "down.", reg);
}

template <typename T>
std::size_t DownsampleBlock<T>::param_count() const {
  return (tuning_ ? tuning_->param_count() : 0) + down_.param_count();
}

// --- ChannelAttention ---------------------------------------------------------------

template <typename T>
ChannelAttention<T>::ChannelAttention(std::size_t channels, CyclicGroup group, Rng& rng, bool naive)
    : channels_(channels), group_(group), naive_(naive) {
  if (channels % order_of(group) != 0) {
    throw ShapeError("ChannelAttention: " + std::to_string(channels) + " channels not divisible by N=" +
                     std::to_string(group.order()));
  }
  const std::size_t outs = naive ? channels : channels / order_of(group);
  const T stddev = static_cast<T>(1.0 / std::sqrt(static_cast<double>(channels)));
  weight_ = Var<T>::parameter(Tensor<T>::randn({outs, channels}, rng, stddev));
  bias_ = Var<T>::parameter(Tensor<T>({outs}));
}

template <typename T>
Var<T> ChannelAttention<T>::gates(const Var<T>& x) const {
  if (x.value().rank() != 4 || x.value().dim(1) != channels_) {
    throw ShapeError("ChannelAttention: expected " + std::to_string(channels_) + " channels, got " +
                     shape_str(x.shape()));
  }
  const Var<T> z = ad::global_avg_pool(x);
  if (naive_) return ad::hard_sigmoid(ad::linear(z, weight_, bias_));
  const std::size_t n = order_of(group_);
  const Var<T> zs = ad::repeat_interleave(ad::group_mean(z, n), n);
  const Var<T> s = ad::hard_sigmoid(ad::linear(zs, weight_, bias_));
  return ad::repeat_interleave(s, n);
}

template <typename T>
Var<T> ChannelAttention<T>::forward(const Var<T>& x) const {
  return ad::channel_scale(x, gates(x));
}

template <typename T>
void ChannelAttention<T>::collect(const std::string& prefix, Registry<T>& reg) {
  reg.params.push_back({prefix + "weight", weight_});
  reg.params.push_back({prefix + "bias", bias_});
}

// --- orientation utilities ------------------------------------------------------------

template <typename T>
Var<T> orientation_pool(const Var<T>& x, const CyclicGroup& group, PoolKind kind) {
  const Tensor<T>& xv = x.value();
  const std::size_t n = order_of(group);
  if (xv.rank() != 4 || xv.dim(1) % n != 0) {
    throw ShapeError("orientation_pool: expected NCHW with C divisible by " + std::to_string(n) + ", got " +
                     shape_str(xv.shape()));
  }
  const std::size_t b = xv.dim(0), f = xv.dim(1) / n, hw = xv.dim(2) * xv.dim(3);
  Tensor<T> y({b, f, xv.dim(2), xv.dim(3)});
  std::vector<std::uint32_t> arg;  // winning orientation for max
  if (kind == PoolKind::max) arg.resize(y.numel());
  std::vector<T> buf(n);
  for (std::size_t i = 0; i < b * f; ++i) {
    const T* src = xv.ptr() + i * n * hw;
    for (std::size_t j = 0; j < hw; ++j) {
      for (std::size_t o = 0; o < n; ++o) buf[o] = src[o * hw + j];
      if (kind == PoolKind::max) {
        const auto it = std::max_element(buf.begin(), buf.end());
        y[i * hw + j] = *it;
        arg[i * hw + j] = static_cast<std::uint32_t>(it - buf.begin());
      } else {
        std::sort(buf.begin(), buf.end());
        T acc = 0;
        for (T v : buf) acc += v;
        y[i * hw + j] = acc / static_cast<T>(n);
      }
    }
  }
  return ad::make_op<T>(std::move(y), {x},
                        [arg = std::move(arg), kind, n, hw, bf = b * f](const Tensor<T>& g,
                                                                         std::span<const ad::NodePtr<T>> p) {
                          Tensor<T> gx(p[0]->value.shape());
                          for (std::size_t i = 0; i < bf; ++i)
                            for (std::size_t j = 0; j < hw; ++j) {
                              const T gv = g[i * hw + j];
                              T* dst = gx.ptr() + i * n * hw + j;
                              if (kind == PoolKind::max) {
                                dst[arg[i * hw + j] * hw] += gv;
                              } else {
                                for (std::size_t o = 0; o < n; ++o) dst[o * hw] += gv / static_cast<T>(n);
                              }
                            }
                          p[0]->accumulate(std::move(gx));
                        });
}

template <typename T>
std::vector<Var<T>> rearrange_by_orientation(const Var<T>& x, const CyclicGroup& group) {
  const std::size_t n = order_of(group);
  if (x.value().rank() < 2 || x.value().dim(1) % n != 0) {
    throw ShapeError("rearrange_by_orientation: channels not divisible by " + std::to_string(n) + " in " +
                     shape_str(x.shape()));
  }
  const std::size_t f = x.value().dim(1) / n;
  if (n == 1) return {x};
  std::vector<std::size_t> perm(n * f);
  for (std::size_t o = 0; o < n; ++o)
    for (std::size_t k = 0; k < f; ++k) perm[o * f + k] = k * n + o;
  const Var<T> permuted = ad::channel_permute(x, std::span<const std::size_t>(perm));
  std::vector<Var<T>> groups;
  groups.reserve(n);
  for (std::size_t o = 0; o < n; ++o) groups.push_back(ad::channel_slice(permuted, o * f, f));
  return groups;
}

template <typename T>
Var<T> merge_orientation_groups(std::span<const Var<T>> groups, const CyclicGroup& group) {
  const std::size_t n = order_of(group);
  if (groups.size() != n) throw ShapeError("merge_orientation_groups: expected " + std::to_string(n) + " groups");
  if (n == 1) return groups[0];
  const Var<T> cat = ad::channel_concat(groups);
  const std::size_t f = groups[0].value().dim(1);
  std::vector<std::size_t> perm(n * f);
  for (std::size_t k = 0; k < f; ++k)
    for (std::size_t o = 0; o < n; ++o) perm[k * n + o] = o * f + k;
  return ad::channel_permute(cat, std::span<const std::size_t>(perm));
}

template <typename T>
Var<T> orientation_angle(const Var<T>& scores, const CyclicGroup& group) {
  const std::size_t n = order_of(group);
  if (scores.value().rank() != 2 || scores.value().dim(1) != n) {
    throw ShapeError("orientation_angle: expected [B, " + std::to_string(n) + "], got " + shape_str(scores.shape()));
  }
  const std::size_t b = scores.value().dim(0);
  std::vector<double> sn(n), cs(n);
  for (std::size_t o = 0; o < n; ++o) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(o) / static_cast<double>(n);
    sn[o] = std::sin(phi);
    cs[o] = std::cos(phi);
  }
  Tensor<T> theta({b});
  std::vector<double> probs(b * n), sx(b), cx(b);
  for (std::size_t i = 0; i < b; ++i) {
    const T* r = scores.value().ptr() + i * n;
    const double mx = *std::max_element(r, r + n);
    double z = 0.0;
    for (std::size_t o = 0; o < n; ++o) z += (probs[i * n + o] = std::exp(r[o] - mx));
    double s = 0.0, c = 0.0;
    for (std::size_t o = 0; o < n; ++o) {
      probs[i * n + o] /= z;
      s += probs[i * n + o] * sn[o];
      c += probs[i * n + o] * cs[o];
    }
    sx[i] = s;
    cx[i] = c;
    theta[i] = static_cast<T>(std::atan2(s, c));
  }
  return ad::make_op<T>(std::move(theta), {scores},
                        [probs = std::move(probs), sx = std::move(sx), cx = std::move(cx), sn, cs, b, n](
                            const Tensor<T>& g, std::span<const ad::NodePtr<T>> p) {
                          Tensor<T> gr({b, n});
                          for (std::size_t i = 0; i < b; ++i) {
                            const double r2 = sx[i] * sx[i] + cx[i] * cx[i];
                            if (r2 == 0.0) continue;
                            const double ds = cx[i] / r2, dc = -sx[i] / r2;
                            for (std::size_t o = 0; o < n; ++o) {
                              const double pr = probs[i * n + o];
                              const double d = ds * pr * (sn[o] - sx[i]) + dc * pr * (cs[o] - cx[i]);
                              gr[i * n + o] = static_cast<T>(g[i] * d);
                            }
                          }
                          p[0]->accumulate(std::move(gr));
                        });
}

template <typename T>
Var<T> angular_loss(const Var<T>& pred, std::span<const T> target, std::span<const int> multiplicity) {
  const std::size_t b = pred.value().numel();
  if (target.size() != b || multiplicity.size() != b) {
    throw ShapeError("angular_loss: " + std::to_string(b) + " predictions, " + std::to_string(target.size()) +
                     " targets, " + std::to_string(multiplicity.size()) + " multiplicities");
  }
  double loss = 0.0;
  std::vector<double> dl(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double m = multiplicity[i];
    const double d = m * (static_cast<double>(pred.value()[i]) - static_cast<double>(target[i]));
    loss += 1.0 - std::cos(d);
    dl[i] = m * std::sin(d) / static_cast<double>(b);
  }
  loss /= static_cast<double>(b);
  return ad::make_op<T>(Tensor<T>::scalar(static_cast<T>(loss)), {pred},
                        [dl = std::move(dl)](const Tensor<T>& g, std::span<const ad::NodePtr<T>> p) {
                          Tensor<T> gp(p[0]->value.shape());
                          for (std::size_t i = 0; i < dl.size(); ++i) gp[i] = static_cast<T>(g[0] * dl[i]);
                          p[0]->accumulate(std::move(gp));
                        });
}

// --- BranchModule -------------------------------------------------------------------

template <typename T>
BranchModule<T>::BranchModule(std::size_t in_fields, std::size_t hidden, CyclicGroup group, Rng& rng, int k)
    : group_(group), spec_{k, (k - 1) / 2, 1, 1}, norm_(hidden * order_of(group), group) {
  const auto kk = static_cast<std::size_t>(k);
  weight_ = he_normal<T>({hidden, in_fields, kk, kk}, in_fields * kk * kk, rng);
  bias_ = Var<T>::parameter(Tensor<T>({hidden}));
}

template <typename T>
Var<T> BranchModule<T>::forward(const Var<T>& x, bool training) {
  const auto groups = rearrange_by_orientation(x, group_);
  std::vector<Var<T>> outs;
  outs.reserve(groups.size());
  for (std::size_t o = 0; o < groups.size(); ++o) {
    const Var<T> w = rotate_kernel(weight_, static_cast<int>(o), group_);
    outs.push_back(ad::add_channel_bias(ad::conv2d(groups[o], w, spec_), bias_));
  }
  const Var<T> merged = merge_orientation_groups(std::span<const Var<T>>(outs), group_);
  return ad::silu(norm_.forward(merged, training));
}

template <typename T>
void BranchModule<T>::collect(const std::string& prefix, Registry<T>& reg) {
  reg.params.push_back({prefix + "conv.weight", weight_});
  reg.params.push_back({prefix + "conv.bias", bias_});
  norm_.collect(prefix + "bn.", reg);
}

template <typename T>
std::size_t BranchModule<T>::param_count() const {
  return weight_.value().numel() + bias_.value().numel() + norm_.param_count();
}

#define ROTEQUIV_LAYERS_INSTANTIATE(T)                                                                        \
  template struct Registry<T>;                                                                                \
  template class EquivConv<T>;                                                                                \
  template class EquivBatchNorm<T>;                                                                           \
  template class ConvModule<T>;                                                                               \
  template class DownsampleBlock<T>;                                                                          \
  template class ChannelAttention<T>;                                                                         \
  template class BranchModule<T>;                                                                             \
  template Var<T> orientation_pool(const Var<T>&, const CyclicGroup&, PoolKind);                              \
  template std::vector<Var<T>> rearrange_by_orientation(const Var<T>&, const CyclicGroup&);                   \
  template Var<T> merge_orientation_groups(std::span<const Var<T>>, const CyclicGroup&);                      \
  template Var<T> orientation_angle(const Var<T>&, const CyclicGroup&);                                       \
  template Var<T> angular_loss(const Var<T>&, std::span<const T>, std::span<const int>);

ROTEQUIV_LAYERS_INSTANTIATE(float)
ROTEQUIV_LAYERS_INSTANTIATE(double)

#undef ROTEQUIV_LAYERS_INSTANTIATE

}  // namespace rotequiv::nn
