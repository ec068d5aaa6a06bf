// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/optim.hpp"

#include <cmath>
#include <numbers>

namespace rotequiv::ad {

template <typename T>
AdamW<T>::AdamW(std::vector<NamedParam<T>> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    if (!p.var.requires_grad()) throw std::invalid_argument("AdamW: " + p.name + " does not require grad");
    m_.emplace_back(p.var.shape());
    v_.emplace_back(p.var.shape());
  }
}

template <typename T>
void AdamW<T>::step(double lr) {
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double decay = 1.0 - lr * config_.weight_decay;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Var<T> var = params_[k].var;
    const Tensor<T>& g = var.grad();
    Tensor<T>& w = var.mutable_value();
    if (g.shape() != w.shape() || m_[k].shape() != w.shape()) {
      throw ShapeError("AdamW: shape mismatch for " + params_[k].name);
    }
    T* m = m_[k].ptr();
    T* v = v_[k].ptr();
    for (std::size_t i = 0; i < w.numel(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = (mi / c1) / (std::sqrt(vi / c2) + config_.eps);
      w[i] = static_cast<T>(static_cast<double>(w[i]) * decay - lr * update);
    }
  }
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

double cosine_half_lr(double base, std::int64_t step, std::int64_t total_steps) {
  if (total_steps <= 0) return base;
  const double half = static_cast<double>(total_steps) / 2.0;
  const double s = static_cast<double>(step);
  if (s <= half) return base;
  const double t = std::min(1.0, (s - half) / half);
  const double floor = base / 20.0;
  return floor + 0.5 * (base - floor) * (1.0 + std::cos(std::numbers::pi * t));
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace rotequiv::ad
