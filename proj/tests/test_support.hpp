#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ggmtree/transfer_operator.hpp"

namespace ggmtree_test {

/// Random strictly positive table with a geometric tail, for property tests.
inline ggmtree::TransferOperator random_custom_operator(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_real_distribution<double> val(0.1, 3.0);
  std::uniform_real_distribution<double> ratio(0.1, 0.8);
  ggmtree::CustomModel m;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) m.table.push_back(val(rng));
  m.tail = ggmtree::GeometricTail{ratio(rng)};
  return ggmtree::TransferOperator::custom(std::move(m));
}

// Regularized incomplete gamma functions (series / continued fraction),
// used for the chi-square survival function in the sampler test.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) return 0.0;
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // continued fraction for Q, return 1 - Q
  double b = x + 1.0 - a, c = 1e300, dd = 1.0 / b, h = dd;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    dd = an * dd + b;
    if (std::abs(dd) < 1e-300) dd = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    dd = 1.0 / dd;
    const double del = dd * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

/// P(Chi2_k > x).
inline double chi2_sf(double x, int dof) { return 1.0 - gamma_p(dof / 2.0, x / 2.0); }

} // namespace ggmtree_test
