// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/gradcheck.hpp"

#include <cmath>

namespace rotequiv::ad {

namespace {

double project(const TensorD& y, const TensorD& r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.numel(); ++i) acc += y[i] * r[i];
  return acc;
}

}  // namespace

GradCheckResult finite_diff_check(const UnaryOpD& op, const TensorD& input, double eps, Rng& rng) {
  Var<double> x = Var<double>::parameter(input);
  const Var<double> y = op(x);
  const TensorD r = TensorD::randn(y.shape(), rng);
  backward(sum(mul(y, Var<double>(r))));
  const TensorD analytic = x.grad();

  GradCheckResult result;
  NoGradGuard no_grad;
  TensorD probe = input;
  for (std::size_t i = 0; i < probe.numel(); ++i) {
    const double orig = probe[i];
    auto at = [&](double offset) {
      probe[i] = orig + offset;
      return project(op(Var<double>(probe)).value(), r);
    };
    const double fp2 = at(2.0 * eps), fp = at(eps), fm = at(-eps), fm2 = at(-2.0 * eps);
    probe[i] = orig;
    const double numerical = (8.0 * (fp - fm) - (fp2 - fm2)) / (12.0 * eps);
    const double a = analytic[i];
    const double err = std::abs(a - numerical) / (std::abs(a) + std::abs(numerical) + 1e-8);
    if (err > result.max_rel_error || i == 0) {
      result = {err, i, a, numerical};
    }
  }
  return result;
}

}  // namespace rotequiv::ad
