#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggmtree/errors.hpp"

namespace ggmtree {

namespace detail {

inline double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

} // namespace detail

/// Strictly positive probability vector, an interior point of the simplex.
class SimplexVector {
public:
  explicit SimplexVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) throw std::invalid_argument("SimplexVector: need length >= 2");
    for (double x : entries_) {
      if (!(x > 0.0)) throw std::invalid_argument("SimplexVector: entries must be strictly positive");
    }
    const double s = detail::sum(entries_);
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("SimplexVector: entries sum to " + std::to_string(s) + ", not 1");
  }

  /// Divides a positive vector by its one-norm.
  static SimplexVector normalized(std::vector<double> v) {
    const double s = detail::sum(v);
    if (!(s > 0.0)) throw std::invalid_argument("SimplexVector: non-positive mass");
    for (double& x : v) x /= s;
    return SimplexVector(std::move(v));
  }

  /// The equidistribution (1/q, ..., 1/q).
  static SimplexVector uniform(int q) {
    if (q < 2) throw std::invalid_argument("SimplexVector: q >= 2 required");
    return SimplexVector(std::vector<double>(static_cast<size_t>(q), 1.0 / q));
  }

  int size() const { return static_cast<int>(entries_.size()); }
  double operator[](int i) const { return entries_[static_cast<size_t>(i)]; }
  const std::vector<double>& entries() const { return entries_; }

  /// Cyclic shift: result(i) = v(i + j mod q).
  SimplexVector shifted(int j) const {
    const int q = size();
    j = ((j % q) + q) % q;
    std::vector<double> out(entries_.size());
    for (int i = 0; i < q; ++i) out[static_cast<size_t>(i)] = entries_[static_cast<size_t>((i + j) % q)];
    return SimplexVector(std::move(out));
  }

private:
  std::vector<double> entries_;
};

/// Mean-zero vector, an element of the tangent space of the simplex.
class TangentVector {
public:
  explicit TangentVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) throw std::invalid_argument("TangentVector: need length >= 2");
    const double s = detail::sum(entries_);
    if (std::abs(s) > 1e-12)
      throw std::invalid_argument("TangentVector: entries sum to " + std::to_string(s) + ", not 0");
  }

  int size() const { return static_cast<int>(entries_.size()); }
  double operator[](int i) const { return entries_[static_cast<size_t>(i)]; }
  const std::vector<double>& entries() const { return entries_; }

private:
  std::vector<double> entries_;
};

inline double one_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double two_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double l1_distance(const SimplexVector& a, const SimplexVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: size mismatch");
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double l2_distance(const SimplexVector& a, const SimplexVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l2_distance: size mismatch");
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Normalized Hadamard power G_s(v) = v^{.s} / |v^{.s}|_1. G_{1/s} inverts G_s.
inline SimplexVector hadamard_power(const SimplexVector& v, double s) {
  if (s == 0.0) throw std::domain_error("hadamard_power: exponent must be nonzero");
  std::vector<double> p(static_cast<size_t>(v.size()));
  for (int i = 0; i < v.size(); ++i) p[static_cast<size_t>(i)] = std::pow(v[i], s);
  return SimplexVector::normalized(std::move(p));
}

} // namespace ggmtree
