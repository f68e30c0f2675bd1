#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ggmtree/simplex_dynamics.hpp"

namespace ggmtree {

/// Radially symmetric height-periodic boundary law around a root, stored per
/// depth: inbound vectors sit on edges pointing toward the root, outbound
/// vectors on edges pointing away. The full edge-indexed family is recovered
/// by depth lookup.
struct RadialBoundaryLaw {
  int q = 0;
  int d = 0;
  int depth = 0;
  SimplexVector seed;
  std::vector<SimplexVector> inbound;  // inbound[n-1] belongs to depth n, n = 1..depth
  std::vector<SimplexVector> outbound; // outbound[n] belongs to depth n, n = 0..depth
  bool truncated = false;
  std::string diagnostic;

  /// Value on an edge (x, y) with d(root, x) = n, d(root, y) = n - 1.
  const SimplexVector& inbound_at(int n) const {
    if (n < 1 || n > depth) throw std::invalid_argument("inbound_at: depth out of range");
    return inbound[static_cast<size_t>(n - 1)];
  }

  /// Value on an edge (x, y) with d(root, x) = n, d(root, y) = n + 1.
  const SimplexVector& outbound_at(int n) const {
    if (n < 0 || n > depth) throw std::invalid_argument("outbound_at: depth out of range");
    return outbound[static_cast<size_t>(n)];
  }

  /// Lookup by the depths of the edge endpoints (must differ by one).
  const SimplexVector& law_vector(int from_depth, int to_depth) const {
    if (from_depth == to_depth + 1) return inbound_at(from_depth);
    if (from_depth == to_depth - 1) return outbound_at(from_depth);
    throw std::invalid_argument("law_vector: endpoints must be adjacent depths");
  }
};

/// Builds the radial law from a backward orbit: inbound values are Hadamard
/// d-th powers of the orbit, outbound values follow the away-from-root
/// recursion seeded at G_d(S(u)). Orbit truncation shortens the law and sets
/// the flag.
inline RadialBoundaryLaw build_radial_law(const BackwardOrbit& orbit, int d, const FuzzyOperator& fz,
                                          int depth) {
  if (depth < 1) throw std::invalid_argument("build_radial_law: depth >= 1 required");
  if (orbit.points.empty()) throw std::invalid_argument("build_radial_law: empty orbit");
  if (orbit.points.front().size() != fz.q())
    throw std::invalid_argument("build_radial_law: dimension mismatch");

  RadialBoundaryLaw law{.q = fz.q(), .d = d, .depth = depth, .seed = orbit.points.front(),
                        .inbound = {}, .outbound = {}, .truncated = false, .diagnostic = {}};
  if (static_cast<int>(orbit.points.size()) < depth) {
    law.depth = static_cast<int>(orbit.points.size());
    law.truncated = true;
    law.diagnostic = orbit.truncated ? "orbit truncated: " + orbit.diagnostic
                                     : "orbit shorter than requested depth";
  }

  for (int n = 1; n <= law.depth; ++n)
    law.inbound.push_back(hadamard_power(orbit.points[static_cast<size_t>(n - 1)], d));

  law.outbound.push_back(hadamard_power(apply_S(fz, d, law.seed), d));
  for (int n = 1; n <= law.depth; ++n) {
    const std::vector<double> circ = fz.apply(law.outbound.back().entries());
    std::vector<double> w(static_cast<size_t>(law.q));
    const SimplexVector& point = orbit.points[static_cast<size_t>(n - 1)];
    for (int i = 0; i < law.q; ++i)
      w[static_cast<size_t>(i)] = circ[static_cast<size_t>(i)] * std::pow(point[i], d - 1);
    law.outbound.push_back(SimplexVector::normalized(std::move(w)));
  }

  for (const auto& v : law.inbound)
    for (int i = 0; i < law.q; ++i)
      if (!(v[i] > 1e-15)) throw numeric_error("build_radial_law: inbound vector touched the boundary");
  for (const auto& v : law.outbound)
    for (int i = 0; i < law.q; ++i)
      if (!(v[i] > 1e-15)) throw numeric_error("build_radial_law: outbound vector touched the boundary");
  return law;
}

/// F_a(z) = Qq z .* a, normalized. With a = eq this is the normalized
/// circulant action, a two-norm contraction near eq with factor
/// max_j |Qhat(2 pi j / q)| / Qhat(0).
inline SimplexVector apply_F(const FuzzyOperator& fz, const SimplexVector& a, const SimplexVector& z) {
  if (a.size() != fz.q() || z.size() != fz.q())
    throw std::invalid_argument("apply_F: dimension mismatch");
  std::vector<double> w = fz.apply(z.entries());
  for (int i = 0; i < fz.q(); ++i) w[static_cast<size_t>(i)] *= a[i];
  return SimplexVector::normalized(std::move(w));
}

struct ConvergenceDiagnostics {
  std::vector<double> distances; // |outbound[n] - eq|_2 for n = 0..depth
  double fitted_rate = 0.0;      // geometric factor per depth step (0 when undefined)
  bool monotone_tail = true;     // false when the tail of the distance sequence is not non-increasing
};

inline ConvergenceDiagnostics outbound_convergence(const RadialBoundaryLaw& law) {
  if (law.depth < 5) throw std::invalid_argument("outbound_convergence: law depth >= 5 required");
  ConvergenceDiagnostics diag;
  const SimplexVector eq = SimplexVector::uniform(law.q);
  for (const auto& v : law.outbound) diag.distances.push_back(l2_distance(v, eq));

  std::vector<double> logs;
  for (double dist : diag.distances) {
    if (dist > 1e-14) logs.push_back(std::log(dist));
  }
  if (logs.size() >= 2) {
    const auto n = static_cast<double>(logs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t k = 0; k < logs.size(); ++k) {
      const auto x = static_cast<double>(k);
      sx += x; sy += logs[k]; sxx += x * x; sxy += x * logs[k];
    }
    diag.fitted_rate = std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
  }

  const size_t start = diag.distances.size() / 2;
  for (size_t n = start + 1; n < diag.distances.size(); ++n) {
    // below the noise floor ordering is meaningless
    if (diag.distances[n] > 1e-14 && diag.distances[n] > diag.distances[n - 1] * (1.0 + 1e-9))
      diag.monotone_tail = false;
  }
  return diag;
}

} // namespace ggmtree
