#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "ggmtree/fuzzy_operator.hpp"
#include "ggmtree/simplex.hpp"

namespace ggmtree {

/// The simplex map S(u) = Qq u^{.d} / (|Qq|_1 |u^{.d}|_1). The equidistribution
/// is a fixed point for every model, period and degree.
inline SimplexVector apply_S(const FuzzyOperator& fz, int d, const SimplexVector& u) {
  if (u.size() != fz.q()) throw std::invalid_argument("apply_S: dimension mismatch between u and Qq");
  if (d < 1) throw std::invalid_argument("apply_S: d >= 1 required");
  std::vector<double> p(static_cast<size_t>(u.size()));
  for (int i = 0; i < u.size(); ++i) p[static_cast<size_t>(i)] = std::pow(u[i], d);
  return SimplexVector::normalized(fz.apply(p));
}

struct EigenvalueEntry {
  int j = 0;             // frequency index, 1..floor(q/2)
  double value = 0.0;    // d Qhat(2 pi j / q) / Qhat(0)
  int multiplicity = 1;  // 2 for a cosine/sine pair, 1 for the j = q/2 mode
};

/// Spectrum of the differential of S at the equidistribution, with the gap
/// classification used to pick a pseudo-unstable level tau.
struct SpectrumReport {
  int q = 0;
  int d = 0;
  std::vector<EigenvalueEntry> eigenvalues;
  std::optional<double> tau;       // absent when no admissible gap exists
  int unstable_dim = 0;            // total multiplicity of |value| > tau
  std::vector<int> neutral_indices; // j with | |value| - 1 | <= 1e-9
};

namespace detail {

inline constexpr double kNeutralTol = 1e-9;
inline constexpr double kGapTol = 1e-9;

// tau = sqrt(min A * max B) where A holds the moduli strictly above 1 and B
// the rest together with 1 itself; neutral moduli are forced into B so that
// an exactly-critical mode lands on the stable side of the gap.
inline void classify_spectrum(SpectrumReport& rep) {
  double min_a = std::numeric_limits<double>::infinity();
  double max_b = 1.0;
  bool have_a = false;
  for (const auto& e : rep.eigenvalues) {
    const double m = std::abs(e.value);
    const bool neutral = std::abs(m - 1.0) <= kNeutralTol;
    if (neutral) rep.neutral_indices.push_back(e.j);
    if (m > 1.0 && !neutral) {
      have_a = true;
      min_a = std::min(min_a, m);
    } else {
      max_b = std::max(max_b, m);
    }
  }
  if (!have_a || min_a - max_b < kGapTol) return; // no admissible gap
  rep.tau = std::sqrt(min_a * max_b);
  for (const auto& e : rep.eigenvalues)
    if (std::abs(e.value) > *rep.tau) rep.unstable_dim += e.multiplicity;
}

inline SpectrumReport spectrum_from_ratio(int q, int d, const auto& ratio_at_j) {
  SpectrumReport rep;
  rep.q = q;
  rep.d = d;
  for (int j = 1; j <= q / 2; ++j) {
    EigenvalueEntry e;
    e.j = j;
    e.value = d * ratio_at_j(j);
    e.multiplicity = (q % 2 == 0 && j == q / 2) ? 1 : 2;
    rep.eigenvalues.push_back(e);
  }
  classify_spectrum(rep);
  return rep;
}

} // namespace detail

/// Spectrum from the circulant eigenvalues of Qq itself.
inline SpectrumReport spectrum_at_eq(const FuzzyOperator& fz, int d) {
  return detail::spectrum_from_ratio(fz.q(), d,
                                     [&](int j) { return fz.eigenvalue(j) / fz.one_norm(); });
}

/// Spectrum from the Fourier transform of the transfer operator sampled at
/// the frequencies 2 pi j / q.
inline SpectrumReport spectrum_at_eq(const FuzzyOperator& fz, int d, const TransferOperator& op) {
  const double mass = op.fourier(0.0);
  const int q = fz.q();
  return detail::spectrum_from_ratio(q, d, [&](int j) {
    // j = q/2 lands on pi exactly; keep rounding from pushing k past it
    const double k = std::min(2.0 * std::numbers::pi * j / q, std::numbers::pi);
    return op.fourier(k) / mass;
  });
}

/// Finite-difference differential of S restricted to the tangent space,
/// assembled in an orthonormal mean-zero (Helmert) basis. Serves as an
/// independent check of the analytic spectrum.
class JacobianFd {
public:
  JacobianFd(const FuzzyOperator& fz, int d, const SimplexVector& u, double h) : q_(fz.q()) {
    if (!(h >= 1e-8 && h <= 1e-4)) throw std::domain_error("JacobianFd: h must lie in [1e-8, 1e-4]");
    if (u.size() != q_) throw std::invalid_argument("JacobianFd: dimension mismatch");
    basis_ = helmert_basis(q_);
    columns_.resize(static_cast<size_t>(q_ - 1));
    for (int m = 0; m < q_ - 1; ++m) {
      std::vector<double> up(static_cast<size_t>(q_)), dn(static_cast<size_t>(q_));
      for (int i = 0; i < q_; ++i) {
        up[static_cast<size_t>(i)] = u[i] + h * basis_[static_cast<size_t>(m)][static_cast<size_t>(i)];
        dn[static_cast<size_t>(i)] = u[i] - h * basis_[static_cast<size_t>(m)][static_cast<size_t>(i)];
        if (!(up[static_cast<size_t>(i)] > 0.0) || !(dn[static_cast<size_t>(i)] > 0.0))
          throw numeric_error("JacobianFd: step size drives the argument out of the interior");
      }
      const SimplexVector su = apply_S(fz, d, SimplexVector::normalized(std::move(up)));
      const SimplexVector sd = apply_S(fz, d, SimplexVector::normalized(std::move(dn)));
      std::vector<double> col(static_cast<size_t>(q_));
      for (int i = 0; i < q_; ++i) col[static_cast<size_t>(i)] = (su[i] - sd[i]) / (2.0 * h);
      columns_[static_cast<size_t>(m)] = std::move(col);
    }
  }

  int q() const { return q_; }

  /// Directional derivative of S along a tangent vector.
  TangentVector apply(const TangentVector& v) const {
    if (v.size() != q_) throw std::invalid_argument("JacobianFd::apply: dimension mismatch");
    std::vector<double> out(static_cast<size_t>(q_), 0.0);
    for (int m = 0; m < q_ - 1; ++m) {
      double c = 0.0;
      for (int i = 0; i < q_; ++i) c += basis_[static_cast<size_t>(m)][static_cast<size_t>(i)] * v[i];
      for (int i = 0; i < q_; ++i)
        out[static_cast<size_t>(i)] += c * columns_[static_cast<size_t>(m)][static_cast<size_t>(i)];
    }
    // nudge the numerical column defect off the output so it stays tangent
    double s = 0.0;
    for (double x : out) s += x;
    for (double& x : out) x -= s / q_;
    return TangentVector(std::move(out));
  }

  /// Matrix of the restriction in the Helmert basis.
  Eigen::MatrixXd tangent_matrix() const {
    Eigen::MatrixXd m(q_ - 1, q_ - 1);
    for (int c = 0; c < q_ - 1; ++c)
      for (int r = 0; r < q_ - 1; ++r) {
        double s = 0.0;
        for (int i = 0; i < q_; ++i)
          s += basis_[static_cast<size_t>(r)][static_cast<size_t>(i)] *
               columns_[static_cast<size_t>(c)][static_cast<size_t>(i)];
        m(r, c) = s;
      }
    return m;
  }

  std::vector<std::complex<double>> eigenvalues() const {
    const Eigen::MatrixXd m = tangent_matrix();
    std::vector<std::complex<double>> out;
    // At eq the restriction is symmetric (a scaled circulant); take the robust
    // self-adjoint path whenever the finite-difference noise is all that
    // breaks symmetry, as the general Schur iteration can fail to converge on
    // the near-degenerate cosine/sine pairs.
    const double asym = (m - m.transpose()).norm();
    if (asym <= 1e-7 * std::max(1.0, m.norm())) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
      if (solver.info() != Eigen::Success)
        throw numeric_error("JacobianFd: eigenvalue iteration failed");
      for (int i = 0; i < solver.eigenvalues().size(); ++i)
        out.emplace_back(solver.eigenvalues()[i], 0.0);
    } else {
      Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
      if (solver.info() != Eigen::Success)
        throw numeric_error("JacobianFd: eigenvalue iteration failed");
      for (int i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()[i]);
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.real() < b.real(); });
    return out;
  }

  /// Raw finite-difference columns (images of the basis vectors).
  const std::vector<std::vector<double>>& columns() const { return columns_; }

private:
  static std::vector<std::vector<double>> helmert_basis(int q) {
    std::vector<std::vector<double>> basis;
    for (int m = 1; m < q; ++m) {
      std::vector<double> b(static_cast<size_t>(q), 0.0);
      const double norm = std::sqrt(static_cast<double>(m) * (m + 1));
      for (int i = 0; i < m; ++i) b[static_cast<size_t>(i)] = 1.0 / norm;
      b[static_cast<size_t>(m)] = -static_cast<double>(m) / norm;
      basis.push_back(std::move(b));
    }
    return basis;
  }

  int q_;
  std::vector<std::vector<double>> basis_;
  std::vector<std::vector<double>> columns_;
};

/// Orthonormal cosine/sine modes spanning the expanding subspace, ordered by
/// ascending frequency with cosine before sine.
inline std::vector<TangentVector> unstable_subspace(const SpectrumReport& rep) {
  if (!rep.tau || rep.unstable_dim < 1) {
    std::ostringstream msg;
    msg << "non-hyperbolic without gap: no admissible tau";
    if (!rep.neutral_indices.empty()) {
      msg << " (neutral indices:";
      for (int j : rep.neutral_indices) msg << ' ' << j;
      msg << ')';
    }
    throw numeric_error(msg.str());
  }
  const int q = rep.q;
  std::vector<TangentVector> modes;
  for (const auto& e : rep.eigenvalues) {
    if (!(std::abs(e.value) > *rep.tau)) continue;
    std::vector<double> c(static_cast<size_t>(q)), s(static_cast<size_t>(q));
    for (int r = 0; r < q; ++r) {
      c[static_cast<size_t>(r)] = std::cos(2.0 * std::numbers::pi * e.j * r / q);
      s[static_cast<size_t>(r)] = std::sin(2.0 * std::numbers::pi * e.j * r / q);
    }
    const double cn = two_norm(c);
    for (double& x : c) x /= cn;
    // remove the numerically tiny mean so the tangent invariant holds exactly
    double cm = 0.0;
    for (double x : c) cm += x;
    for (double& x : c) x -= cm / q;
    modes.emplace_back(std::move(c));
    if (e.multiplicity == 2) {
      const double sn = two_norm(s);
      for (double& x : s) x /= sn;
      double sm = 0.0;
      for (double x : s) sm += x;
      for (double& x : s) x -= sm / q;
      modes.emplace_back(std::move(s));
    }
  }
  return modes;
}

/// Default chart radius; keeps every seeded entry bounded away from zero.
inline double chart_eps_max(int q) { return 0.1 / std::sqrt(static_cast<double>(q)); }

/// Linear-chart seed eq + eps * sum_i coeffs_i mode_i, positivity-checked and
/// renormalized. The quadratic deviation of the manifold from its tangent is
/// left to the a-posteriori orbit residuals.
inline SimplexVector seed_on_manifold(const SpectrumReport& rep, const std::vector<TangentVector>& modes,
                                      double eps, std::span<const double> coeffs) {
  if (!(eps >= 0.0)) throw std::invalid_argument("seed_on_manifold: eps must be nonnegative");
  if (coeffs.size() != modes.size())
    throw std::invalid_argument("seed_on_manifold: one coefficient per mode required");
  if (modes.empty()) throw std::invalid_argument("seed_on_manifold: no modes given");
  double cnorm = 0.0;
  for (double c : coeffs) cnorm += c * c;
  cnorm = std::sqrt(cnorm);
  if (!(cnorm > 0.0)) throw std::invalid_argument("seed_on_manifold: zero coefficient vector");
  const int q = rep.q;
  std::vector<double> raw(static_cast<size_t>(q), 1.0 / q);
  for (size_t m = 0; m < modes.size(); ++m) {
    if (modes[m].size() != q) throw std::invalid_argument("seed_on_manifold: mode dimension mismatch");
    for (int i = 0; i < q; ++i) raw[static_cast<size_t>(i)] += eps * (coeffs[m] / cnorm) * modes[m][i];
  }
  for (double x : raw) {
    if (!(x > 0.0))
      throw numeric_error("seed_on_manifold: eps too large, entry left the interior before clamping");
  }
  for (double& x : raw) x = std::max(x, 1e-300);
  return SimplexVector::normalized(std::move(raw));
}

/// Backward trajectory u, S^{-1}u, S^{-2}u, ... computed by damped Newton
/// steps; `truncated` flags early termination with the diagnostic set.
struct BackwardOrbit {
  std::vector<SimplexVector> points;
  std::vector<double> residuals;    // one-norm defect of apply_S(points[k+1]) vs points[k]
  double rate_estimate = 0.0;       // fitted per-step contraction factor toward eq (0 when undefined)
  bool truncated = false;
  std::string diagnostic;
};

namespace detail {

// dS_i/du_k = (d u_k^{d-1} / (|Qq|_1 s)) (Qq(i-k) - (Qq p)_i / s), p = u^{.d}, s = |p|_1
inline Eigen::MatrixXd apply_S_jacobian(const FuzzyOperator& fz, int d, const std::vector<double>& u) {
  const int q = fz.q();
  std::vector<double> p(static_cast<size_t>(q));
  double s = 0.0;
  for (int i = 0; i < q; ++i) {
    p[static_cast<size_t>(i)] = std::pow(u[static_cast<size_t>(i)], d);
    s += p[static_cast<size_t>(i)];
  }
  const std::vector<double> qp = fz.apply(p);
  Eigen::MatrixXd jac(q, q);
  for (int k = 0; k < q; ++k) {
    const double g = d * std::pow(u[static_cast<size_t>(k)], d - 1) / (fz.one_norm() * s);
    for (int i = 0; i < q; ++i) jac(i, k) = g * (fz.value(i - k) - qp[static_cast<size_t>(i)] / s);
  }
  return jac;
}

inline std::vector<double> apply_S_raw(const FuzzyOperator& fz, int d, const std::vector<double>& u) {
  const int q = fz.q();
  std::vector<double> p(static_cast<size_t>(q));
  double s = 0.0;
  for (int i = 0; i < q; ++i) {
    p[static_cast<size_t>(i)] = std::pow(u[static_cast<size_t>(i)], d);
    s += p[static_cast<size_t>(i)];
  }
  std::vector<double> out = fz.apply(p);
  const double norm = fz.one_norm() * s;
  for (double& x : out) x /= norm;
  return out;
}

struct NewtonOutcome {
  std::vector<double> solution;
  double residual = 0.0;
  bool converged = false;
  std::string note;
};

// Solves apply_S(x) = target in the first q-1 coordinates, eliminating the sum
// constraint; steps are halved until the residual decreases.
inline NewtonOutcome invert_S(const FuzzyOperator& fz, int d, const std::vector<double>& target,
                              std::vector<double> guess, double tol) {
  const int q = fz.q();
  constexpr int kMaxIter = 50;
  constexpr double kFloor = 1e-13;
  auto residual_of = [&](const std::vector<double>& u) {
    const std::vector<double> s = apply_S_raw(fz, d, u);
    double r = 0.0;
    for (int i = 0; i < q; ++i) r += std::abs(s[static_cast<size_t>(i)] - target[static_cast<size_t>(i)]);
    return r;
  };
  std::vector<double> u = std::move(guess);
  double res = residual_of(u);
  NewtonOutcome out;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    if (res < tol) {
      out.solution = u;
      out.residual = res;
      out.converged = true;
      return out;
    }
    const Eigen::MatrixXd jac = apply_S_jacobian(fz, d, u);
    Eigen::MatrixXd reduced(q - 1, q - 1);
    Eigen::VectorXd rhs(q - 1);
    const std::vector<double> s = apply_S_raw(fz, d, u);
    for (int i = 0; i < q - 1; ++i) {
      rhs(i) = s[static_cast<size_t>(i)] - target[static_cast<size_t>(i)];
      for (int k = 0; k < q - 1; ++k) reduced(i, k) = jac(i, k) - jac(i, q - 1);
    }
    const Eigen::VectorXd delta = reduced.partialPivLu().solve(rhs);
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1e-10) {
      std::vector<double> trial(static_cast<size_t>(q));
      double head = 0.0;
      bool interior = true;
      for (int i = 0; i < q - 1; ++i) {
        trial[static_cast<size_t>(i)] = u[static_cast<size_t>(i)] - alpha * delta(i);
        head += trial[static_cast<size_t>(i)];
        interior = interior && trial[static_cast<size_t>(i)] > kFloor;
      }
      trial[static_cast<size_t>(q - 1)] = 1.0 - head;
      interior = interior && trial[static_cast<size_t>(q - 1)] > kFloor;
      if (interior) {
        const double trial_res = residual_of(trial);
        if (trial_res < res) {
          u = std::move(trial);
          res = trial_res;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      bool near_boundary = false;
      for (int i = 0; i < q; ++i) near_boundary = near_boundary || u[static_cast<size_t>(i)] < 1e-10;
      if (near_boundary)
        throw numeric_error("backward orbit: preimage drifted out of the interior of the simplex");
      out.solution = u;
      out.residual = res;
      out.note = "Newton stalled (no descending step)";
      return out;
    }
  }
  if (res < tol) {
    out.solution = u;
    out.residual = res;
    out.converged = true;
    return out;
  }
  out.solution = u;
  out.residual = res;
  out.note = "Newton did not converge within 50 iterations";
  return out;
}

} // namespace detail

inline BackwardOrbit backward_orbit(const FuzzyOperator& fz, int d, const SimplexVector& u0,
                                    int n_steps, double tol = 1e-12) {
  if (u0.size() != fz.q()) throw std::invalid_argument("backward_orbit: dimension mismatch");
  if (n_steps < 0) throw std::invalid_argument("backward_orbit: n_steps must be nonnegative");
  const int q = fz.q();
  const SimplexVector eq = SimplexVector::uniform(q);

  // Expanding modes drive the linearized inverse used as the Newton seed.
  const SpectrumReport rep = spectrum_at_eq(fz, d);
  std::vector<TangentVector> modes;
  std::vector<double> mode_values;
  if (rep.tau && rep.unstable_dim >= 1) {
    modes = unstable_subspace(rep);
    for (const auto& e : rep.eigenvalues) {
      if (!(std::abs(e.value) > *rep.tau)) continue;
      mode_values.push_back(e.value);
      if (e.multiplicity == 2) mode_values.push_back(e.value);
    }
  }

  BackwardOrbit orbit;
  orbit.points.push_back(u0);
  for (int step = 0; step < n_steps; ++step) {
    const SimplexVector& target = orbit.points.back();
    std::vector<double> guess(static_cast<size_t>(q));
    for (int i = 0; i < q; ++i) guess[static_cast<size_t>(i)] = target[i];
    for (size_t m = 0; m < modes.size(); ++m) {
      double c = 0.0;
      for (int i = 0; i < q; ++i) c += modes[m][i] * (target[i] - eq[i]);
      const double scale = c * (1.0 / mode_values[m] - 1.0);
      for (int i = 0; i < q; ++i) guess[static_cast<size_t>(i)] += scale * modes[m][i];
    }
    for (double& x : guess) x = std::max(x, 1e-12);

    auto outcome = detail::invert_S(fz, d, target.entries(), std::move(guess), tol);
    if (!outcome.converged) {
      orbit.truncated = true;
      orbit.diagnostic = outcome.note + " at step " + std::to_string(step + 1) +
                         " (residual " + std::to_string(outcome.residual) + ")";
      break;
    }
    orbit.points.emplace_back(SimplexVector::normalized(std::move(outcome.solution)));
    orbit.residuals.push_back(outcome.residual);
  }

  // Geometric fit of the distance decay toward eq over the usable range.
  std::vector<double> logs;
  for (const auto& p : orbit.points) {
    const double dist = l2_distance(p, eq);
    if (dist > 1e-13) logs.push_back(std::log(dist));
  }
  if (logs.size() >= 2) {
    const auto n = static_cast<double>(logs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t k = 0; k < logs.size(); ++k) {
      const auto x = static_cast<double>(k);
      sx += x; sy += logs[k]; sxx += x * x; sxy += x * logs[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    orbit.rate_estimate = std::exp(-slope);
  }
  return orbit;
}

} // namespace ggmtree
