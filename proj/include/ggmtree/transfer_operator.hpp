#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ggmtree/errors.hpp"

namespace ggmtree {

/// Hurwitz zeta at s = 2: sum_{n>=0} 1/(n+w)^2 for w > 0.
/// Partial sum over n < N plus the tail 1/(N+w) + 1/(2(N+w)^2); the neglected
/// remainder is below 1/(6(N+w)^3), so N = 1e5 keeps it under 1e-15.
inline double hurwitz_zeta2(double w) {
  if (!(w > 0.0)) throw std::domain_error("hurwitz_zeta2: w must be positive");
  constexpr long long kTerms = 100000;
  double s = 0.0;
  for (long long n = kTerms - 1; n >= 0; --n) {
    const double t = static_cast<double>(n) + w;
    s += 1.0 / (t * t);
  }
  const double m = static_cast<double>(kTerms) + w;
  return s + 1.0 / m + 1.0 / (2.0 * m * m);
}

struct SosModel {
  double beta; // Q(j) = exp(-beta |j|)
};

struct InverseSquareModel {
  double a; // Q(0) = 1, Q(j) = a / j^2 otherwise
};

struct GeometricTail {
  double ratio; // Q(j) = Q(j_max) * ratio^(j - j_max) for j > j_max
};

struct PowerTail {
  double alpha; // Q(j) = c * j^(-alpha) for j > j_max
  double c;
};

struct CustomModel {
  std::vector<double> table; // Q(0), Q(1), ..., Q(j_max); symmetric extension Q(-j) = Q(j)
  std::optional<std::variant<GeometricTail, PowerTail>> tail;
};

/// Summable strictly positive even weight function Q on the integers.
/// Built-in models have closed-form Fourier transforms and periodizations;
/// custom tables fall back to truncated summation driven by their tail rule.
class TransferOperator {
public:
  static TransferOperator sos(double beta, double summation_tol = 1e-12) {
    if (!(beta > 0.0)) throw std::invalid_argument("sos: beta must be positive");
    return TransferOperator(SosModel{beta}, summation_tol);
  }

  static TransferOperator inverse_square(double a, double summation_tol = 1e-12) {
    if (!(a > 0.0)) throw std::invalid_argument("inverse_square: a must be positive");
    return TransferOperator(InverseSquareModel{a}, summation_tol);
  }

  static TransferOperator custom(CustomModel m, double summation_tol = 1e-12) {
    if (m.table.empty()) throw std::invalid_argument("custom: empty table");
    for (double x : m.table) {
      if (!(x > 0.0)) throw std::invalid_argument("custom: table values must be strictly positive");
    }
    if (m.tail) {
      if (const auto* g = std::get_if<GeometricTail>(&*m.tail)) {
        if (!(g->ratio > 0.0 && g->ratio < 1.0))
          throw std::invalid_argument("custom: geometric tail ratio must be in (0,1)");
      } else {
        const auto& p = std::get<PowerTail>(*m.tail);
        if (!(p.alpha > 1.0)) throw std::invalid_argument("custom: power tail needs alpha > 1");
        if (!(p.c > 0.0)) throw std::invalid_argument("custom: power tail needs c > 0");
      }
    }
    return TransferOperator(std::move(m), summation_tol);
  }

  /// Two-column "offset value" text format with offsets 0,1,2,...; an optional
  /// leading header line "geometric r" or "power alpha c" declares the tail rule.
  /// Lines starting with '#' are skipped.
  static TransferOperator from_file(const std::string& path, double summation_tol = 1e-12) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open table file: " + path);
    return from_stream(in, summation_tol);
  }

  static TransferOperator from_stream(std::istream& in, double summation_tol = 1e-12) {
    CustomModel m;
    std::string line;
    bool first_content = true;
    long long expected_offset = 0;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string tok;
      if (!(ls >> tok) || tok[0] == '#') continue;
      if (first_content && (tok == "geometric" || tok == "power")) {
        if (tok == "geometric") {
          double r;
          if (!(ls >> r)) throw std::invalid_argument("table: malformed geometric tail rule");
          m.tail = GeometricTail{r};
        } else {
          double alpha, c;
          if (!(ls >> alpha >> c)) throw std::invalid_argument("table: malformed power tail rule");
          m.tail = PowerTail{alpha, c};
        }
        first_content = false;
        continue;
      }
      first_content = false;
      long long offset;
      double value;
      try {
        offset = std::stoll(tok);
      } catch (const std::exception&) {
        throw std::invalid_argument("table: bad offset '" + tok + "'");
      }
      if (!(ls >> value)) throw std::invalid_argument("table: missing value for offset " + tok);
      if (offset != expected_offset)
        throw std::invalid_argument("table: offsets must be consecutive from 0");
      ++expected_offset;
      m.table.push_back(value);
    }
    return custom(std::move(m), summation_tol);
  }

  bool is_sos() const { return std::holds_alternative<SosModel>(model_); }
  bool is_inverse_square() const { return std::holds_alternative<InverseSquareModel>(model_); }
  bool is_custom() const { return std::holds_alternative<CustomModel>(model_); }
  const SosModel& as_sos() const { return std::get<SosModel>(model_); }
  const InverseSquareModel& as_inverse_square() const { return std::get<InverseSquareModel>(model_); }
  const CustomModel& as_custom() const { return std::get<CustomModel>(model_); }
  double summation_tol() const { return summation_tol_; }

  /// Q(j). Evenness is exact: only |j| enters.
  double evaluate(long long j) const {
    const long long n = j < 0 ? -j : j;
    if (const auto* s = std::get_if<SosModel>(&model_))
      return std::exp(-s->beta * static_cast<double>(n));
    if (const auto* i = std::get_if<InverseSquareModel>(&model_))
      return n == 0 ? 1.0 : i->a / (static_cast<double>(n) * static_cast<double>(n));
    const auto& c = std::get<CustomModel>(model_);
    const auto j_max = static_cast<long long>(c.table.size()) - 1;
    if (n <= j_max) return c.table[static_cast<size_t>(n)];
    if (!c.tail)
      throw std::invalid_argument("custom transfer operator: unsupported offset " + std::to_string(j) +
                                  " (outside table, no tail rule)");
    if (const auto* g = std::get_if<GeometricTail>(&*c.tail))
      return c.table.back() * std::pow(g->ratio, static_cast<double>(n - j_max));
    const auto& p = std::get<PowerTail>(*c.tail);
    return p.c * std::pow(static_cast<double>(n), -p.alpha);
  }

  /// Upper bound on sum_{|j| > n} Q(j).
  double tail_sum_bound(long long n) const {
    if (n < 0) throw std::invalid_argument("tail_sum_bound: n must be nonnegative");
    if (const auto* s = std::get_if<SosModel>(&model_)) {
      const double r = std::exp(-s->beta);
      return 2.0 * std::pow(r, static_cast<double>(n + 1)) / (1.0 - r);
    }
    if (const auto* i = std::get_if<InverseSquareModel>(&model_)) {
      // sum_{j>n} a/j^2 <= a/n  (integral bound); n = 0 falls back to the full mass
      return n == 0 ? mass() : 2.0 * i->a / static_cast<double>(n);
    }
    const auto& c = std::get<CustomModel>(model_);
    const auto j_max = static_cast<long long>(c.table.size()) - 1;
    if (!c.tail)
      throw numeric_error("custom transfer operator: no tail rule declared, tail mass unknown");
    const long long m = n < j_max ? j_max : n;
    double bound;
    if (const auto* g = std::get_if<GeometricTail>(&*c.tail)) {
      bound = 2.0 * c.table.back() * std::pow(g->ratio, static_cast<double>(m - j_max + 1)) /
              (1.0 - g->ratio);
    } else {
      const auto& p = std::get<PowerTail>(*c.tail);
      bound = 2.0 * p.c * std::pow(static_cast<double>(m), 1.0 - p.alpha) / (p.alpha - 1.0);
    }
    if (n < j_max) {
      for (long long j = n + 1; j <= j_max; ++j) bound += 2.0 * c.table[static_cast<size_t>(j)];
    }
    return bound;
  }

  /// Smallest cutoff N <= limit with tail_sum_bound(N) <= bound.
  long long tail_cutoff(double bound, long long limit = 10000000) const {
    long long lo = 0, hi = 1;
    while (tail_sum_bound(hi) > bound) {
      lo = hi;
      hi *= 2;
      if (hi > limit) {
        if (tail_sum_bound(limit) <= bound) { hi = limit; break; }
        throw numeric_error("transfer operator: tail bound " + std::to_string(bound) +
                            " unreachable within cutoff " + std::to_string(limit));
      }
    }
    while (lo < hi) {
      const long long mid = lo + (hi - lo) / 2;
      if (tail_sum_bound(mid) <= bound) hi = mid; else lo = mid + 1;
    }
    return hi;
  }

  /// Fourier transform Qhat(k) = sum_n Q(n) cos(nk) on [0, pi].
  double fourier(double k) const {
    if (!(k >= 0.0 && k <= std::numbers::pi))
      throw std::domain_error("fourier: k must lie in [0, pi]");
    if (const auto* s = std::get_if<SosModel>(&model_)) {
      const double e = std::exp(s->beta);
      return (e * e - 1.0) / (e * e - 2.0 * e * std::cos(k) + 1.0);
    }
    if (const auto* i = std::get_if<InverseSquareModel>(&model_)) {
      const double pi = std::numbers::pi;
      return 1.0 + i->a / 6.0 * (3.0 * k * k - 6.0 * pi * k + 2.0 * pi * pi);
    }
    return fourier_direct(k);
  }

  /// Truncated cosine sum. The cutoff comes from the declared tail bound; the
  /// inverse-square model instead exploits the oscillatory tail (bounded by
  /// a / (sin(k/2) N^2) after summation by parts) and an Euler-Maclaurin tail
  /// at k = 0, since its plain tail decays only like 1/N.
  double fourier_direct(double k) const {
    if (!(k >= 0.0 && k <= std::numbers::pi))
      throw std::domain_error("fourier: k must lie in [0, pi]");
    if (const auto* inv = std::get_if<InverseSquareModel>(&model_)) {
      constexpr long long kCutoff = 200000;
      double s = 1.0;
      for (long long n = kCutoff; n >= 1; --n)
        s += 2.0 * evaluate(n) * std::cos(static_cast<double>(n) * k);
      if (k == 0.0) {
        const double m = static_cast<double>(kCutoff) + 1.0;
        s += 2.0 * inv->a * (1.0 / m + 1.0 / (2.0 * m * m) + 1.0 / (6.0 * m * m * m));
      }
      return s;
    }
    const long long cutoff = tail_cutoff(summation_tol_);
    double s = evaluate(0);
    for (long long n = cutoff; n >= 1; --n) s += 2.0 * evaluate(n) * std::cos(static_cast<double>(n) * k);
    return s;
  }

  /// Total mass sum_j Q(j) = Qhat(0).
  double mass() const { return fourier(0.0); }

  /// Folds an arbitrary frequency into [0, pi] using evenness and periodicity.
  static double fold_frequency(double k) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(k, two_pi);
    if (r < 0.0) r += two_pi;
    return r <= std::numbers::pi ? r : two_pi - r;
  }

private:
  using Model = std::variant<SosModel, InverseSquareModel, CustomModel>;

  TransferOperator(Model m, double summation_tol) : model_(std::move(m)), summation_tol_(summation_tol) {
    if (!(summation_tol_ > 0.0)) throw std::invalid_argument("summation_tol must be positive");
  }

  Model model_;
  double summation_tol_;
};

} // namespace ggmtree
