#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ggmtree/simplex_dynamics.hpp"
#include "ggmtree/transfer_operator.hpp"

namespace ggmtree {

/// SOS model: non-invariant gradient states of every period q >= 2 exist iff
/// beta exceeds arcosh((d+1)/(d-1)).
inline double sos_all_q_threshold(int d) {
  if (d < 2) throw std::invalid_argument("sos_all_q_threshold: d >= 2 required");
  return std::acosh(static_cast<double>(d + 1) / (d - 1));
}

inline bool sos_region(double beta, int d) {
  if (!(beta > 0.0)) throw std::invalid_argument("sos_region: beta must be positive");
  return beta > sos_all_q_threshold(d);
}

/// Minimal period below the all-q threshold: ceil(2 pi / arccos(d - (d-1) cosh beta)).
inline int sos_min_period(double beta, int d) {
  if (!(beta > 0.0)) throw std::invalid_argument("sos_min_period: beta must be positive");
  if (beta > sos_all_q_threshold(d))
    throw std::invalid_argument("sos_min_period: beta above the all-q threshold (answer: all q >= 2)");
  const double x = d - (d - 1) * std::cosh(beta);
  return static_cast<int>(std::ceil(2.0 * std::numbers::pi / std::acos(x)));
}

/// Inverse-square model parameter regions. The window upper bound
/// 9/pi^2 (d+1)/(d-3) only exists for d >= 4; for d <= 3 the window is
/// treated as [lower, infinity) and flagged via `window_unbounded`.
struct InvsqRegion {
  bool all_q = false;         // outside the window: all periods q >= 2
  bool negative_side = false; // a > 6/pi^2 (d+1)/(d-2): period-2 states via the negative mode
  double window_lo = 0.0;
  double window_hi = std::numeric_limits<double>::infinity();
  bool window_unbounded = false;
};

inline InvsqRegion invsq_region(double a, int d) {
  if (!(a > 0.0)) throw std::invalid_argument("invsq_region: a must be positive");
  if (d < 2) throw std::invalid_argument("invsq_region: d >= 2 required");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  InvsqRegion r;
  r.window_lo = 6.0 / pi2 * (d - 1) / (d + 2);
  if (d >= 4) {
    r.window_hi = 9.0 / pi2 * (d + 1) / (d - 3);
  } else {
    r.window_unbounded = true;
  }
  r.all_q = a < r.window_lo || a > r.window_hi;
  if (d >= 3) r.negative_side = a > 6.0 / pi2 * (d + 1) / (d - 2);
  return r;
}

/// Minimal period inside the window, from the positive branch of the Fourier
/// ratio: ceil(2 pi / (pi - sqrt(pi^2/3 (1 + 2/d) - 2/a (1 - 1/d)))).
inline int invsq_min_period(double a, int d) {
  const InvsqRegion r = invsq_region(a, d);
  if (r.all_q)
    throw std::invalid_argument("invsq_min_period: a outside the window (answer: all q >= 2)");
  double rad = std::numbers::pi * std::numbers::pi / 3.0 * (1.0 + 2.0 / d) -
               2.0 / a * (1.0 - 1.0 / d);
  if (rad < 0.0 && rad > -1e-12) rad = 0.0; // exactly at the lower window edge
  if (rad < 0.0) throw std::invalid_argument("invsq_min_period: negative radicand");
  return static_cast<int>(std::ceil(2.0 * std::numbers::pi / (std::numbers::pi - std::sqrt(rad))));
}

/// One row of the brute-force period scan.
struct QScanRow {
  int q = 0;
  bool exists = false;          // expanding mode present with an admissible tau-gap
  int unstable_dim = 0;
  double max_modulus = 0.0;     // max_j |d Qhat(2 pi j / q) / Qhat(0)|
  std::vector<int> neutral;     // frequencies within 1e-9 of modulus one
};

struct QScan {
  std::vector<QScanRow> rows;
  std::optional<int> minimal_q; // smallest q whose row passes; absent if none up to q_max
};

/// Spectral existence scan over q = 2..q_max.
inline QScan scan_q0(const TransferOperator& op, int d, int q_max) {
  if (d < 2) throw std::invalid_argument("scan_q0: d >= 2 required");
  if (q_max < 2 || q_max > 512) throw std::invalid_argument("scan_q0: q_max must lie in [2, 512]");
  const double mass = op.fourier(0.0);
  QScan scan;
  for (int q = 2; q <= q_max; ++q) {
    const SpectrumReport rep = detail::spectrum_from_ratio(q, d, [&](int j) {
      const double k = std::min(2.0 * std::numbers::pi * j / q, std::numbers::pi);
      return op.fourier(k) / mass;
    });
    QScanRow row;
    row.q = q;
    row.neutral = rep.neutral_indices;
    row.exists = rep.tau.has_value() && rep.unstable_dim >= 1;
    row.unstable_dim = rep.unstable_dim;
    for (const auto& e : rep.eigenvalues) row.max_modulus = std::max(row.max_modulus, std::abs(e.value));
    if (row.exists && !scan.minimal_q) scan.minimal_q = q;
    scan.rows.push_back(std::move(row));
  }
  return scan;
}

/// Dobrushin-style uniqueness certificate for the q-spin model:
/// (d+1) delta_q(beta U) < 2 with beta U(j) = -log Q(j) and
/// delta_q the largest variation U(|j+r|) - U(|j|) over shifts 1 <= r <= q-1.
/// The supremum is scanned over j in [-10q, 10q]; a custom potential whose
/// variation still grows at the window edge yields an inconclusive result.
struct DobrushinResult {
  bool conclusive = false;
  bool unique = false;   // meaningful only when conclusive
  double delta_q = 0.0;  // scanned value of delta_q(beta U)
};

inline DobrushinResult dobrushin_unique(const TransferOperator& op, int q, int d);

/// Aggregated threshold analysis for one model and degree: closed-form region
/// and period where a formula exists, the brute-force scan, and the Dobrushin
/// certificate per period.
struct ThresholdReport {
  enum class PeriodKind { value, all_q, none };

  std::string model;
  std::vector<std::pair<std::string, double>> params;
  int d = 0;
  int q_max = 0;
  bool region_all_q = false;
  PeriodKind kind = PeriodKind::none;
  int minimal_period = 0;                 // meaningful when kind == value
  std::optional<int> closed_form_period;  // SOS / inverse-square formula, when in its domain
  QScan scan;
  std::vector<std::pair<int, DobrushinResult>> dobrushin;
  std::string notes;
};

inline ThresholdReport make_threshold_report(const TransferOperator& op, int d, int q_max) {
  ThresholdReport rep;
  rep.d = d;
  rep.q_max = q_max;
  rep.scan = scan_q0(op, d, q_max);
  if (op.is_sos()) {
    const double beta = op.as_sos().beta;
    rep.model = "sos";
    rep.params.emplace_back("beta", beta);
    rep.region_all_q = sos_region(beta, d);
    if (!rep.region_all_q) rep.closed_form_period = sos_min_period(beta, d);
  } else if (op.is_inverse_square()) {
    const double a = op.as_inverse_square().a;
    rep.model = "invsq";
    rep.params.emplace_back("a", a);
    const InvsqRegion region = invsq_region(a, d);
    rep.region_all_q = region.all_q;
    if (region.window_unbounded)
      rep.notes += "window upper bound undefined for d <= 3; treated as [lower, infinity). ";
    if (!region.all_q) {
      rep.closed_form_period = invsq_min_period(a, d);
      if (region.negative_side)
        rep.notes += "negative-side parameters: the closed form tracks the positive branch only, "
                     "period-2 states exist besides it. ";
    }
  } else {
    rep.model = "custom";
    bool all = true;
    for (const auto& row : rep.scan.rows) all = all && row.exists;
    rep.region_all_q = all; // brute-force evidence up to q_max only
    rep.notes += "custom model: region determined by scan up to q_max. ";
  }
  if (rep.region_all_q) {
    rep.kind = ThresholdReport::PeriodKind::all_q;
    rep.minimal_period = 2;
  } else if (rep.scan.minimal_q) {
    rep.kind = ThresholdReport::PeriodKind::value;
    rep.minimal_period = *rep.scan.minimal_q;
  } else {
    rep.kind = ThresholdReport::PeriodKind::none;
  }
  for (int q = 2; q <= q_max; ++q) rep.dobrushin.emplace_back(q, dobrushin_unique(op, q, d));
  return rep;
}

inline DobrushinResult dobrushin_unique(const TransferOperator& op, int q, int d) {
  if (q < 2) throw std::invalid_argument("dobrushin_unique: q >= 2 required");
  if (d < 2) throw std::invalid_argument("dobrushin_unique: d >= 2 required");
  const long long window = 10LL * q;

  DobrushinResult res;
  std::vector<double> pot(static_cast<size_t>(window + q + 1));
  try {
    for (long long m = 0; m <= window + q; ++m)
      pot[static_cast<size_t>(m)] = -std::log(op.evaluate(m));
  } catch (const std::invalid_argument&) {
    // custom table too short to scan the window
    return res;
  }

  double sup = 0.0, sup_inner = 0.0;
  bool edge_hit = false;
  for (int r = 1; r < q; ++r) {
    for (long long j = -window; j <= window; ++j) {
      const double v = pot[static_cast<size_t>(std::llabs(j + r))] -
                       pot[static_cast<size_t>(std::llabs(j))];
      if (v > sup) {
        sup = v;
        edge_hit = std::llabs(j) >= window - q;
      }
      if (std::llabs(j) <= (8 * window) / 10) sup_inner = std::max(sup_inner, v);
    }
  }
  if (edge_hit && sup > sup_inner * (1.0 + 1e-12)) return res; // still growing at the edge
  res.conclusive = true;
  res.delta_q = sup;
  res.unique = (d + 1) * sup < 2.0;
  return res;
}

} // namespace ggmtree
