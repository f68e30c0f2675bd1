#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "ggmtree/boundary_law.hpp"
#include "ggmtree/tree.hpp"

namespace ggmtree {

/// Class-conditional increment kernel rho(j | s) = Q(j) / Qq(s) on j = s mod q,
/// truncated at |j| <= j_max with the dropped mass recorded per class.
struct IncrementKernel {
  int q = 0;
  long long j_max = 0;
  // class_tables[s]: (j, rho(j|s)) over the truncated support of class s
  std::vector<std::vector<std::pair<long long, double>>> class_tables;
  std::vector<double> tail_mass;

  double prob(long long j) const {
    long long s = j % q;
    if (s < 0) s += q;
    for (const auto& [jj, p] : class_tables[static_cast<size_t>(s)])
      if (jj == j) return p;
    return 0.0;
  }
};

inline IncrementKernel increment_kernel(const TransferOperator& op, const FuzzyOperator& fz,
                                        double tail_tol) {
  if (!(tail_tol > 0.0)) throw std::invalid_argument("increment_kernel: tail_tol must be positive");
  const int q = fz.q();
  double min_class = fz.values()[0];
  for (double v : fz.values()) min_class = std::min(min_class, v);
  // every class keeps at least its two nearest representatives
  const long long j_max = std::max<long long>(op.tail_cutoff(tail_tol * min_class, 100000), q);

  IncrementKernel kernel;
  kernel.q = q;
  kernel.j_max = j_max;
  kernel.class_tables.resize(static_cast<size_t>(q));
  kernel.tail_mass.assign(static_cast<size_t>(q), 0.0);
  for (long long j = -j_max; j <= j_max; ++j) {
    long long s = j % q;
    if (s < 0) s += q;
    kernel.class_tables[static_cast<size_t>(s)].emplace_back(j, op.evaluate(j) / fz.value(s));
  }
  for (int s = 0; s < q; ++s) {
    double mass = 0.0;
    for (const auto& [j, p] : kernel.class_tables[static_cast<size_t>(s)]) mass += p;
    kernel.tail_mass[static_cast<size_t>(s)] = std::max(0.0, 1.0 - mass);
  }
  return kernel;
}

/// Distribution of the integer increment along a single edge carrying the
/// boundary-law pair (lam_xy, lam_yx). The normalizer is exact (it collapses
/// to a mod-q sum against Qq); only the reported support is truncated.
struct EdgeMarginal {
  std::map<long long, double> probs;
  double tail_mass = 0.0;
};

inline EdgeMarginal edge_marginal(const TransferOperator& op, const FuzzyOperator& fz,
                                  const SimplexVector& lam_xy, const SimplexVector& lam_yx,
                                  double tail_tol) {
  const int q = fz.q();
  if (lam_xy.size() != q || lam_yx.size() != q)
    throw std::invalid_argument("edge_marginal: dimension mismatch");
  std::vector<double> corr(static_cast<size_t>(q), 0.0);
  for (int s = 0; s < q; ++s) {
    double c = 0.0;
    for (int t = 0; t < q; ++t) c += lam_xy[t] * lam_yx[(t + s) % q];
    corr[static_cast<size_t>(s)] = c;
  }
  double z = 0.0, corr_max = 0.0;
  for (int s = 0; s < q; ++s) {
    z += fz.values()[static_cast<size_t>(s)] * corr[static_cast<size_t>(s)];
    corr_max = std::max(corr_max, corr[static_cast<size_t>(s)]);
  }
  const long long cutoff = op.tail_cutoff(tail_tol * z / corr_max, 100000);

  EdgeMarginal out;
  double total = 0.0;
  for (long long j = -cutoff; j <= cutoff; ++j) {
    long long s = j % q;
    if (s < 0) s += q;
    const double p = op.evaluate(j) * corr[static_cast<size_t>(s)] / z;
    out.probs[j] = p;
    total += p;
  }
  out.tail_mass = std::max(0.0, 1.0 - total);
  return out;
}

namespace detail {

// Per-class mass of Q restricted to |j| <= cutoff.
inline std::vector<double> truncated_class_masses(const TransferOperator& op, int q, long long cutoff) {
  std::vector<double> mass(static_cast<size_t>(q), 0.0);
  for (long long j = -cutoff; j <= cutoff; ++j) {
    long long s = j % q;
    if (s < 0) s += q;
    mass[static_cast<size_t>(s)] += op.evaluate(j);
  }
  return mass;
}

// Boundary-law vector on the edge (from, to) of adjacent depths.
inline const SimplexVector& law_on_edge(const RadialBoundaryLaw& law, const Vertex& from,
                                        const Vertex& to) {
  return law.law_vector(from.depth(), to.depth());
}

} // namespace detail

/// Marginal probability of a full increment assignment on the edges touching
/// the subtree. The mod-q layer is summed exactly by message passing over the
/// subtree; the integer layer is summed over the truncated increment box with
/// a per-edge share of tail_tol.
inline double subtree_marginal(const TransferOperator& op, const FuzzyOperator& fz,
                               const RadialBoundaryLaw& law, const FiniteSubtree& subtree,
                               const std::map<Vertex, int>& zeta, double tail_tol) {
  const int q = fz.q();
  if (law.q != q) throw std::invalid_argument("subtree_marginal: law and fuzzy operator disagree on q");
  if (subtree.max_depth_touched() > law.depth)
    throw std::invalid_argument("subtree_marginal: subtree deeper than the boundary law");
  const std::vector<Vertex> keys = subtree.increment_keys();
  for (const Vertex& k : keys)
    if (!zeta.contains(k))
      throw std::invalid_argument("subtree_marginal: missing increment on edge keyed " + k.to_string());

  const auto n_edges = static_cast<double>(keys.size());
  const long long cutoff = op.tail_cutoff(tail_tol / n_edges, 100000);
  const std::vector<double> class_mass = detail::truncated_class_masses(op, q, cutoff);

  // normalizer: height-class messages flowing toward the anchor
  const Vertex& anchor = subtree.anchor();
  auto message = [&](auto&& self, const Vertex& v, const Vertex& toward_anchor) -> std::vector<double> {
    if (!subtree.contains(v)) {
      const SimplexVector& lam = detail::law_on_edge(law, v, toward_anchor);
      std::vector<double> m(static_cast<size_t>(q));
      for (int h = 0; h < q; ++h) m[static_cast<size_t>(h)] = lam[h];
      return m;
    }
    std::vector<double> out(static_cast<size_t>(q), 1.0);
    for (const Vertex& u : subtree.neighbors(v)) {
      if (u == toward_anchor) continue;
      const std::vector<double> mu = self(self, u, v);
      for (int h = 0; h < q; ++h) {
        double s = 0.0;
        for (int c = 0; c < q; ++c)
          s += class_mass[static_cast<size_t>(c)] * mu[static_cast<size_t>((h + c) % q)];
        out[static_cast<size_t>(h)] *= s;
      }
    }
    return out;
  };
  std::vector<double> root_msg(static_cast<size_t>(q), 1.0);
  for (const Vertex& u : subtree.neighbors(anchor)) {
    const std::vector<double> mu = message(message, u, anchor);
    for (int h = 0; h < q; ++h) {
      double s = 0.0;
      for (int c = 0; c < q; ++c)
        s += class_mass[static_cast<size_t>(c)] * mu[static_cast<size_t>((h + c) % q)];
      root_msg[static_cast<size_t>(h)] *= s;
    }
  }
  double z = 0.0;
  for (double x : root_msg) z += x;

  // numerator: boundary-law factors at the shifted classes, times the Q weights
  double lam_sum = 0.0;
  for (int s = 0; s < q; ++s) {
    double prod = 1.0;
    for (const Vertex& y : subtree.boundary()) {
      long long shift;
      if (!anchor.is_root() && y == anchor.parent()) {
        shift = -zeta.at(anchor);
      } else {
        shift = 0;
        Vertex walk = anchor;
        for (size_t i = anchor.path.size(); i < y.path.size(); ++i) {
          walk = walk.child(y.path[i]);
          shift += zeta.at(walk);
        }
      }
      long long cls = (s + shift) % q;
      if (cls < 0) cls += q;
      // the unique neighbor of y inside the subtree
      Vertex inside;
      bool found = false;
      for (const Vertex& nb : subtree.neighbors(y)) {
        if (subtree.contains(nb)) {
          inside = nb;
          found = true;
          break;
        }
      }
      if (!found) throw std::logic_error("subtree_marginal: boundary vertex without inside neighbor");
      const SimplexVector& lam = detail::law_on_edge(law, y, inside);
      prod *= lam[static_cast<int>(cls)];
    }
    lam_sum += prod;
  }
  double q_weight = 1.0;
  for (const Vertex& k : keys) q_weight *= op.evaluate(zeta.at(k));
  return lam_sum * q_weight / z;
}

/// Antisymmetric edge increments drawn from the two-layer construction: the
/// mod-q chain first, then conditionally independent integer increments.
struct GradientSample {
  // keyed by the deeper endpoint; value oriented parent -> child
  std::map<Vertex, int> increments;
  std::uint64_t rng_seed = 0;

  /// Increment along (x, y) for adjacent vertices, antisymmetric by construction.
  long long increment(const Vertex& x, const Vertex& y) const {
    if (y.depth() == x.depth() + 1) return increments.at(y);
    if (x.depth() == y.depth() + 1) return -increments.at(x);
    throw std::invalid_argument("GradientSample::increment: vertices not adjacent");
  }
};

inline std::vector<GradientSample> sample_gradients(const TransferOperator& op, const FuzzyOperator& fz,
                                                    const RadialBoundaryLaw& law,
                                                    const FiniteSubtree& subtree, int n_samples,
                                                    std::uint64_t rng_seed, double tail_tol = 1e-9) {
  const int q = fz.q();
  if (law.q != q) throw std::invalid_argument("sample_gradients: law and fuzzy operator disagree on q");
  if (subtree.max_depth_touched() > law.depth)
    throw std::invalid_argument("sample_gradients: subtree deeper than the boundary law");
  const IncrementKernel kernel = increment_kernel(op, fz, tail_tol);

  const Vertex& anchor = subtree.anchor();
  std::vector<double> root_weights(static_cast<size_t>(q), 1.0);
  for (const Vertex& z : subtree.neighbors(anchor)) {
    const SimplexVector& lam = detail::law_on_edge(law, z, anchor);
    const std::vector<double> conv = fz.apply(lam.entries());
    for (int h = 0; h < q; ++h) root_weights[static_cast<size_t>(h)] *= conv[static_cast<size_t>(h)];
  }
  double w_total = 0.0;
  for (double w : root_weights) w_total += w;

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto pick = [&](const std::vector<double>& weights, double total) {
    double u = unif(rng) * total;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      if (u < weights[i]) return static_cast<int>(i);
      u -= weights[i];
    }
    return static_cast<int>(weights.size()) - 1;
  };

  // edges processed outward from the anchor: (v, u, key, sign)
  struct DirectedEdge {
    Vertex from, to, key;
    int sign;
  };
  std::vector<DirectedEdge> edges;
  std::vector<Vertex> order{anchor};
  for (size_t head = 0; head < order.size(); ++head) {
    const Vertex v = order[head];
    for (const Vertex& u : subtree.neighbors(v)) {
      if (v != anchor && u == v.parent()) continue;
      if (!anchor.is_root() && v == anchor && u == anchor.parent()) {
        edges.push_back({v, u, anchor, -1});
        continue;
      }
      edges.push_back({v, u, u, +1});
      if (subtree.contains(u)) order.push_back(u);
    }
  }

  std::vector<std::vector<double>> class_probs(static_cast<size_t>(q));
  std::vector<double> class_totals(static_cast<size_t>(q), 0.0);
  for (int c = 0; c < q; ++c) {
    for (const auto& [j, p] : kernel.class_tables[static_cast<size_t>(c)]) {
      class_probs[static_cast<size_t>(c)].push_back(p);
      class_totals[static_cast<size_t>(c)] += p;
    }
  }

  std::vector<GradientSample> samples;
  samples.reserve(static_cast<size_t>(n_samples));
  std::vector<double> trans(static_cast<size_t>(q));
  for (int s = 0; s < n_samples; ++s) {
    GradientSample sample;
    sample.rng_seed = rng_seed;
    std::map<Vertex, int> state;
    state[anchor] = pick(root_weights, w_total);
    for (const DirectedEdge& e : edges) {
      const int from_state = state.at(e.from);
      const SimplexVector& lam = detail::law_on_edge(law, e.to, e.from);
      double t_total = 0.0;
      for (int j = 0; j < q; ++j) {
        trans[static_cast<size_t>(j)] = fz.value(from_state - j) * lam[j];
        t_total += trans[static_cast<size_t>(j)];
      }
      const int to_state = pick(trans, t_total);
      state[e.to] = to_state;
      int cls = (to_state - from_state) % q;
      if (cls < 0) cls += q;
      const int slot = pick(class_probs[static_cast<size_t>(cls)], class_totals[static_cast<size_t>(cls)]);
      const long long drawn = kernel.class_tables[static_cast<size_t>(cls)][static_cast<size_t>(slot)].first;
      sample.increments[e.key] = static_cast<int>(e.sign * drawn);
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

/// Distribution of the total increment W_n along the outbound ray from the
/// root, by exact dynamic programming over (mod-q state, accumulated sum).
struct PathIncrementDistribution {
  std::map<long long, double> probs;
  double tail_mass = 0.0;
};

inline PathIncrementDistribution path_increment_distribution(const TransferOperator& op,
                                                             const FuzzyOperator& fz,
                                                             const RadialBoundaryLaw& law, int n,
                                                             double tail_tol) {
  const int q = fz.q();
  if (n < 1) throw std::invalid_argument("path_increment_distribution: n >= 1 required");
  if (law.q != q)
    throw std::invalid_argument("path_increment_distribution: law and fuzzy operator disagree on q");
  if (n > law.depth) throw std::invalid_argument("path_increment_distribution: n exceeds law depth");
  const IncrementKernel kernel = increment_kernel(op, fz, tail_tol / n);
  const auto j_max = kernel.j_max;
  const long long width = static_cast<long long>(n) * j_max;

  // state kept as dist[s][w + width]
  std::vector<std::vector<double>> dist(static_cast<size_t>(q),
                                        std::vector<double>(static_cast<size_t>(2 * width + 1), 0.0));
  {
    const std::vector<double> conv = fz.apply(law.inbound_at(1).entries());
    std::vector<double> init(static_cast<size_t>(q));
    double total = 0.0;
    for (int s = 0; s < q; ++s) {
      init[static_cast<size_t>(s)] = std::pow(conv[static_cast<size_t>(s)], law.d + 1);
      total += init[static_cast<size_t>(s)];
    }
    for (int s = 0; s < q; ++s) dist[static_cast<size_t>(s)][static_cast<size_t>(width)] =
        init[static_cast<size_t>(s)] / total;
  }

  for (int step = 1; step <= n; ++step) {
    const SimplexVector& lam = law.inbound_at(step);
    std::vector<std::vector<double>> next(static_cast<size_t>(q),
                                          std::vector<double>(static_cast<size_t>(2 * width + 1), 0.0));
    for (int i = 0; i < q; ++i) {
      std::vector<double> trans(static_cast<size_t>(q));
      double t_total = 0.0;
      for (int j = 0; j < q; ++j) {
        trans[static_cast<size_t>(j)] = fz.value(i - j) * lam[j];
        t_total += trans[static_cast<size_t>(j)];
      }
      for (int j = 0; j < q; ++j) {
        const double t_prob = trans[static_cast<size_t>(j)] / t_total;
        if (t_prob == 0.0) continue;
        int cls = (j - i) % q;
        if (cls < 0) cls += q;
        for (const auto& [inc, p] : kernel.class_tables[static_cast<size_t>(cls)]) {
          const double weight = t_prob * p;
          const long long lo = std::max(-width, -width - inc);
          const long long hi = std::min(width, width - inc);
          const auto& src = dist[static_cast<size_t>(i)];
          auto& dst = next[static_cast<size_t>(j)];
          for (long long w = lo; w <= hi; ++w) {
            const double mass = src[static_cast<size_t>(w + width)];
            if (mass != 0.0) dst[static_cast<size_t>(w + inc + width)] += mass * weight;
          }
        }
      }
    }
    dist = std::move(next);
  }

  PathIncrementDistribution out;
  double total = 0.0;
  for (long long w = -width; w <= width; ++w) {
    double p = 0.0;
    for (int s = 0; s < q; ++s) p += dist[static_cast<size_t>(s)][static_cast<size_t>(w + width)];
    if (p > 0.0) out.probs[w] = p;
    total += p;
  }
  out.tail_mass = std::max(0.0, 1.0 - total);
  return out;
}

/// Translation-invariance detector: the largest shifted inner product
/// |< Qq(u^{.d})^{.d}, (T_j u)^{.d} - u^{.d} >| over cyclic shifts j. A strictly
/// positive maximum certifies that the gradient measure built from u is not
/// translation invariant.
struct TiResult {
  double value = 0.0;
  int shift = 0;
};

inline TiResult ti_scalar(const FuzzyOperator& fz, const SimplexVector& u, int d) {
  const int q = fz.q();
  if (u.size() != q) throw std::invalid_argument("ti_scalar: dimension mismatch");
  std::vector<double> p(static_cast<size_t>(q));
  for (int i = 0; i < q; ++i) p[static_cast<size_t>(i)] = std::pow(u[i], d);
  std::vector<double> a = fz.apply(p);
  for (double& x : a) x = std::pow(x, d);
  TiResult best;
  for (int j = 0; j < q; ++j) {
    double inner = 0.0;
    for (int i = 0; i < q; ++i)
      inner += a[static_cast<size_t>(i)] * (p[static_cast<size_t>((i + j) % q)] - p[static_cast<size_t>(i)]);
    if (std::abs(inner) > best.value) {
      best.value = std::abs(inner);
      best.shift = j;
    }
  }
  return best;
}

/// Root-edge fingerprint of a law continued periodically to period q_ext:
/// the inner products of the inbound depth-1 vector against all cyclic shifts
/// of the outbound depth-0 vector.
inline std::vector<double> root_edge_fingerprint(const RadialBoundaryLaw& law, int q_ext) {
  if (q_ext < law.q || q_ext % law.q != 0)
    throw std::invalid_argument("root_edge_fingerprint: q_ext must be a multiple of the law period");
  const SimplexVector& in = law.inbound_at(1);
  const SimplexVector& out = law.outbound_at(0);
  std::vector<double> f(static_cast<size_t>(q_ext), 0.0);
  for (int j = 0; j < q_ext; ++j) {
    double v = 0.0;
    for (int i = 0; i < q_ext; ++i) v += in[i % law.q] * out[(i + j) % law.q];
    f[static_cast<size_t>(j)] = v;
  }
  return f;
}

/// Compares the root-edge fingerprints of two laws of coprime periods s and t,
/// both continued periodically to period s*t. Returns a shift at which the
/// normalized fingerprints differ, or nullopt when they are proportional.
inline std::optional<int> period_fingerprint(const FuzzyOperator& fz_st, const RadialBoundaryLaw& law_s,
                                             const RadialBoundaryLaw& law_t) {
  const int s = law_s.q, t = law_t.q;
  if (std::gcd(s, t) != 1) throw std::invalid_argument("period_fingerprint: periods must be coprime");
  const int q = s * t;
  if (fz_st.q() != q)
    throw std::invalid_argument("period_fingerprint: fuzzy operator period must equal s*t");

  auto fingerprint = [q](const RadialBoundaryLaw& law) {
    std::vector<double> f = root_edge_fingerprint(law, q);
    double mean = 0.0;
    for (double x : f) mean += x;
    mean /= q;
    for (double& x : f) x /= mean;
    return f;
  };

  const std::vector<double> fs = fingerprint(law_s);
  const std::vector<double> ft = fingerprint(law_t);
  int arg = 0;
  double best = 0.0;
  for (int j = 0; j < q; ++j) {
    const double diff = std::abs(fs[static_cast<size_t>(j)] - ft[static_cast<size_t>(j)]);
    if (diff > best) {
      best = diff;
      arg = j;
    }
  }
  if (best > 1e-9) return arg;
  return std::nullopt;
}

} // namespace ggmtree
