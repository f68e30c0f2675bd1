#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "ggmtree/transfer_operator.hpp"

namespace ggmtree {

/// Mod-q periodization of a transfer operator: Qq(i) = sum_j Q(i + q j),
/// acting on Z_q as a symmetric circulant matrix.
class FuzzyOperator {
public:
  FuzzyOperator(int q, std::vector<double> values) : q_(q), values_(std::move(values)) {
    if (q_ < 2) throw std::invalid_argument("FuzzyOperator: q >= 2 required");
    if (static_cast<int>(values_.size()) != q_)
      throw std::invalid_argument("FuzzyOperator: values length must equal q");
    for (double x : values_) {
      if (!(x > 0.0)) throw std::invalid_argument("FuzzyOperator: values must be strictly positive");
    }
    for (int i = 1; i < q_; ++i) {
      if (values_[static_cast<size_t>(i)] != values_[static_cast<size_t>(q_ - i)])
        throw std::invalid_argument("FuzzyOperator: values must be even mod q");
    }
    one_norm_ = 0.0;
    for (double x : values_) one_norm_ += x;
  }

  int q() const { return q_; }
  const std::vector<double>& values() const { return values_; }
  double one_norm() const { return one_norm_; }

  /// Qq(i) with i taken mod q.
  double value(long long i) const {
    long long r = i % q_;
    if (r < 0) r += q_;
    return values_[static_cast<size_t>(r)];
  }

  /// Circulant matrix-vector product (Qq v)_i = sum_r Qq(i - r) v_r.
  std::vector<double> apply(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != q_) throw std::invalid_argument("FuzzyOperator::apply: size mismatch");
    std::vector<double> out(static_cast<size_t>(q_), 0.0);
    for (int i = 0; i < q_; ++i) {
      double s = 0.0;
      for (int r = 0; r < q_; ++r) s += value(i - r) * v[static_cast<size_t>(r)];
      out[static_cast<size_t>(i)] = s;
    }
    return out;
  }

  /// Circulant eigenvalue sum_r Qq(r) cos(2 pi j r / q); the cosine/sine pair
  /// at frequency j shares this value.
  double eigenvalue(int j) const {
    double s = 0.0;
    for (int r = 0; r < q_; ++r)
      s += values_[static_cast<size_t>(r)] * std::cos(2.0 * std::numbers::pi * j * r / q_);
    return s;
  }

private:
  int q_;
  std::vector<double> values_;
  double one_norm_;
};

namespace detail {

// Values are produced for representatives m = 0..floor(q/2) and mirrored, so
// evenness holds exactly in floating point.
inline FuzzyOperator mirror_fuzzy(int q, const std::vector<double>& half) {
  std::vector<double> values(static_cast<size_t>(q));
  for (int i = 0; i < q; ++i) values[static_cast<size_t>(i)] = half[static_cast<size_t>(std::min(i, q - i))];
  return FuzzyOperator(q, std::move(values));
}

inline double sos_class_sum(double beta, int m, int q) {
  // sum_j exp(-beta |m + q j|) = (e^{beta(m-q)} + e^{-beta m}) / (1 - e^{-beta q}),
  // the overflow-safe form of cosh(beta (m - q/2)) / sinh(beta q / 2).
  return (std::exp(beta * (m - q)) + std::exp(-beta * static_cast<double>(m))) /
         (1.0 - std::exp(-beta * static_cast<double>(q)));
}

inline double invsq_class_sum(double a, int m, int q) {
  const double pi = std::numbers::pi;
  if (m == 0) return 1.0 + a * pi * pi / (3.0 * q * static_cast<double>(q));
  const double w = static_cast<double>(m) / q;
  return a / (static_cast<double>(q) * q) * (hurwitz_zeta2(w) + hurwitz_zeta2(1.0 - w));
}

} // namespace detail

/// Periodization by closed form where one is available (SOS, inverse square),
/// by the defining lattice sum otherwise.
inline FuzzyOperator fuzzy(const TransferOperator& op, int q);

/// Periodization by truncated lattice summation. For the inverse-square model
/// a three-term Euler-Maclaurin tail keeps the truncation below 1e-13; other
/// models take their cutoff from the declared tail bound.
inline FuzzyOperator fuzzy_direct(const TransferOperator& op, int q) {
  if (q < 2) throw std::invalid_argument("fuzzy_direct: q >= 2 required");
  std::vector<double> half(static_cast<size_t>(q / 2 + 1));
  if (op.is_inverse_square()) {
    const double a = op.as_inverse_square().a;
    constexpr long long kBlocks = 5000;
    for (int m = 0; m <= q / 2; ++m) {
      double s = 0.0;
      for (long long j = kBlocks; j >= 1; --j)
        s += op.evaluate(m + q * j) + op.evaluate(m - q * j);
      s += op.evaluate(m);
      const double w = static_cast<double>(m) / q;
      auto em_tail = [](double x) { return 1.0 / x + 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x * x * x); };
      s += a / (static_cast<double>(q) * q) *
           (em_tail(static_cast<double>(kBlocks) + 1.0 + w) + em_tail(static_cast<double>(kBlocks) + 1.0 - w));
      half[static_cast<size_t>(m)] = s;
    }
    return detail::mirror_fuzzy(q, half);
  }
  const long long cutoff = op.tail_cutoff(op.summation_tol());
  const long long blocks = cutoff / q + 1;
  for (int m = 0; m <= q / 2; ++m) {
    double s = 0.0;
    for (long long j = blocks; j >= 1; --j) s += op.evaluate(m + q * j) + op.evaluate(m - q * j);
    s += op.evaluate(m);
    half[static_cast<size_t>(m)] = s;
  }
  return detail::mirror_fuzzy(q, half);
}

inline FuzzyOperator fuzzy(const TransferOperator& op, int q) {
  if (q < 2) throw std::invalid_argument("fuzzy: q >= 2 required");
  std::vector<double> half(static_cast<size_t>(q / 2 + 1));
  if (op.is_sos()) {
    for (int m = 0; m <= q / 2; ++m)
      half[static_cast<size_t>(m)] = detail::sos_class_sum(op.as_sos().beta, m, q);
    return detail::mirror_fuzzy(q, half);
  }
  if (op.is_inverse_square()) {
    for (int m = 0; m <= q / 2; ++m)
      half[static_cast<size_t>(m)] = detail::invsq_class_sum(op.as_inverse_square().a, m, q);
    return detail::mirror_fuzzy(q, half);
  }
  return fuzzy_direct(op, q);
}

} // namespace ggmtree
