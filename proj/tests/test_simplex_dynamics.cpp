#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "ggmtree/simplex_dynamics.hpp"
#include "test_support.hpp"

using namespace ggmtree;
using ggmtree_test::random_custom_operator;

namespace {

constexpr double kPi = std::numbers::pi;

FuzzyOperator reference_fuzzy() { return FuzzyOperator(2, {4.0, 1.0}); }

SimplexVector vec2(double a, double b) { return SimplexVector({a, b}); }

} // namespace

TEST_CASE("hadamard_power: examples and inverse pair") {
  for (int d : {2, 3, 5}) {
    const auto eq = SimplexVector::uniform(7);
    CHECK(l1_distance(hadamard_power(eq, d), eq) < 1e-15);
  }
  const auto g3 = hadamard_power(vec2(0.6, 0.4), 3.0);
  CHECK(g3[0] == Catch::Approx(0.216 / 0.28).epsilon(1e-12));
  CHECK(g3[1] == Catch::Approx(0.064 / 0.28).epsilon(1e-12));
  const auto back = hadamard_power(g3, 1.0 / 3.0);
  CHECK(back[0] == Catch::Approx(0.6).margin(1e-12));
  CHECK(back[1] == Catch::Approx(0.4).margin(1e-12));
  CHECK_THROWS_AS(hadamard_power(g3, 0.0), std::domain_error);
}

TEST_CASE("apply_S: reference example and symmetry fixed point") {
  const auto fz = reference_fuzzy();
  const auto out = apply_S(fz, 3, vec2(0.6, 0.4));
  CHECK(out[0] == Catch::Approx(0.928 / 1.4).epsilon(1e-12));
  CHECK(out[1] == Catch::Approx(0.472 / 1.4).epsilon(1e-12));
  const auto fixed = apply_S(fz, 3, vec2(0.5, 0.5));
  CHECK(fixed[0] == Catch::Approx(0.5).margin(1e-15));
  CHECK_THROWS_AS(apply_S(fz, 3, SimplexVector::uniform(3)), std::invalid_argument);
}

TEST_CASE("apply_S: equidistribution is a fixed point for all models") {
  std::mt19937_64 rng(77);
  std::vector<TransferOperator> ops = {TransferOperator::sos(0.5), TransferOperator::sos(2.0),
                                       TransferOperator::inverse_square(0.5),
                                       TransferOperator::inverse_square(3.0)};
  for (int i = 0; i < 3; ++i) ops.push_back(random_custom_operator(rng));
  for (const auto& op : ops) {
    for (int q = 2; q <= 32; ++q) {
      const auto fz = fuzzy(op, q);
      const auto eq = SimplexVector::uniform(q);
      for (int d = 2; d <= 6; ++d) CHECK(l1_distance(apply_S(fz, d, eq), eq) < 1e-14);
    }
  }
}

TEST_CASE("spectrum_at_eq: q=2 single eigenvalue from the fuzzy ratio") {
  const auto rep = spectrum_at_eq(reference_fuzzy(), 3);
  REQUIRE(rep.eigenvalues.size() == 1);
  CHECK(rep.eigenvalues[0].j == 1);
  CHECK(rep.eigenvalues[0].multiplicity == 1);
  CHECK(rep.eigenvalues[0].value == Catch::Approx(1.8).epsilon(1e-12));
  REQUIRE(rep.tau.has_value());
  CHECK(*rep.tau == Catch::Approx(std::sqrt(1.8)).epsilon(1e-12));
  CHECK(rep.unstable_dim == 1);
  CHECK(rep.neutral_indices.empty());
}

TEST_CASE("spectrum_at_eq: neutral mode of the inverse-square model at q=16, d=5") {
  const double a = 1536.0 / (73.0 * kPi * kPi);
  const auto op = TransferOperator::inverse_square(a);
  const auto fz = fuzzy(op, 16);
  const auto rep = spectrum_at_eq(fz, 5, op);
  REQUIRE(rep.eigenvalues.size() == 8);
  CHECK(std::abs(std::abs(rep.eigenvalues[2].value) - 1.0) < 1e-10); // j = 3
  REQUIRE(std::find(rep.neutral_indices.begin(), rep.neutral_indices.end(), 3) !=
          rep.neutral_indices.end());
  REQUIRE(rep.tau.has_value());
  CHECK(*rep.tau > 1.0);
  CHECK(rep.unstable_dim == 9); // j = 1, 2, 6, 7 (pairs) and j = 8 (single)
}

TEST_CASE("spectrum_at_eq: small frequencies approach d") {
  const auto op = TransferOperator::sos(1.0);
  for (int d : {2, 4}) {
    const auto rep = spectrum_at_eq(fuzzy(op, 64), d, op);
    CHECK(rep.eigenvalues.front().value > 0.98 * d);
    CHECK(rep.eigenvalues.front().value <= d);
  }
}

TEST_CASE("spectrum_at_eq: circulant and Fourier routes agree") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto op = random_custom_operator(rng);
    for (int q : {2, 5, 12}) {
      const auto fz = fuzzy(op, q);
      const auto a = spectrum_at_eq(fz, 3);
      const auto b = spectrum_at_eq(fz, 3, op);
      REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
      for (size_t i = 0; i < a.eigenvalues.size(); ++i)
        CHECK(a.eigenvalues[i].value == Catch::Approx(b.eigenvalues[i].value).margin(1e-9));
    }
  }
}

TEST_CASE("jacobian_fd: eigenvalue of the reference model at eq") {
  const auto fz = reference_fuzzy();
  const JacobianFd jac(fz, 3, SimplexVector::uniform(2), 1e-5);
  const auto eig = jac.eigenvalues();
  REQUIRE(eig.size() == 1);
  CHECK(eig[0].real() == Catch::Approx(1.8).margin(1e-6));
  CHECK(std::abs(eig[0].imag()) < 1e-10);
}

TEST_CASE("jacobian_fd: maps tangent vectors to tangent vectors") {
  const auto op = TransferOperator::sos(1.0);
  const auto fz = fuzzy(op, 5);
  const JacobianFd jac(fz, 3, SimplexVector::uniform(5), 1e-5);
  for (const auto& col : jac.columns()) {
    double sum = 0.0;
    for (double x : col) sum += x;
    CHECK(std::abs(sum) < 1e-9);
  }
  const TangentVector v({0.3, -0.1, -0.2, 0.1, -0.1});
  const auto image = jac.apply(v);
  double sum = 0.0;
  for (int i = 0; i < image.size(); ++i) sum += image[i];
  CHECK(std::abs(sum) < 1e-12);
}

TEST_CASE("jacobian_fd: d=1 eigenvalues are the normalized Fourier values") {
  const auto op = TransferOperator::sos(1.0);
  const auto fz = fuzzy(op, 6);
  const JacobianFd jac(fz, 1, SimplexVector::uniform(6), 1e-5);
  std::vector<double> expected;
  for (int j = 1; j <= 3; ++j) {
    const double v = op.fourier(2.0 * kPi * j / 6.0) / op.fourier(0.0);
    expected.push_back(v);
    if (j != 3) expected.push_back(v);
  }
  std::sort(expected.begin(), expected.end());
  const auto eig = jac.eigenvalues();
  REQUIRE(eig.size() == expected.size());
  for (size_t i = 0; i < eig.size(); ++i) {
    CHECK(eig[i].real() == Catch::Approx(expected[i]).margin(1e-6));
    CHECK(std::abs(eig[i].real()) <= 1.0 + 1e-9); // SOS is positive definite
  }
}

TEST_CASE("jacobian_fd: step size domain") {
  const auto fz = reference_fuzzy();
  CHECK_THROWS_AS(JacobianFd(fz, 3, SimplexVector::uniform(2), 1e-3), std::domain_error);
  CHECK_THROWS_AS(JacobianFd(fz, 3, SimplexVector::uniform(2), 1e-9), std::domain_error);
  // step larger than the distance to the boundary
  CHECK_THROWS_AS(JacobianFd(fz, 3, vec2(1e-5, 1.0 - 1e-5), 1e-4), numeric_error);
}

TEST_CASE("spectrum oracle: analytic eigenvalues match finite differences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto op = random_custom_operator(rng);
    for (int q = 2; q <= 12; ++q) {
      const auto fz = fuzzy(op, q);
      const auto rep = spectrum_at_eq(fz, 3, op);
      std::vector<double> analytic;
      for (const auto& e : rep.eigenvalues)
        for (int m = 0; m < e.multiplicity; ++m) analytic.push_back(e.value);
      std::sort(analytic.begin(), analytic.end());
      const JacobianFd jac(fz, 3, SimplexVector::uniform(q), 1e-5);
      const auto eig = jac.eigenvalues();
      REQUIRE(eig.size() == analytic.size());
      for (size_t i = 0; i < eig.size(); ++i) {
        CHECK(eig[i].real() == Catch::Approx(analytic[i]).margin(1e-6));
        CHECK(std::abs(eig[i].imag()) < 1e-8);
      }
    }
  }
}

TEST_CASE("unstable_subspace: modes and circulant action") {
  SECTION("q=2: the single mean-zero direction") {
    const auto rep = spectrum_at_eq(reference_fuzzy(), 3);
    const auto modes = unstable_subspace(rep);
    REQUIRE(modes.size() == 1);
    CHECK(modes[0][0] == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(modes[0][1] == Catch::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
  SECTION("q=4: cosine/sine pair at frequency 1, orthonormal") {
    // large beta expands every mode
    const auto op = TransferOperator::sos(3.0);
    const auto fz = fuzzy(op, 4);
    const auto rep = spectrum_at_eq(fz, 4, op);
    REQUIRE(rep.tau.has_value());
    const auto modes = unstable_subspace(rep);
    REQUIRE(modes.size() >= 2);
    double dot = 0.0, n0 = 0.0, n1 = 0.0;
    for (int i = 0; i < 4; ++i) {
      dot += modes[0][i] * modes[1][i];
      n0 += modes[0][i] * modes[0][i];
      n1 += modes[1][i] * modes[1][i];
    }
    CHECK(std::abs(dot) < 1e-12);
    CHECK(n0 == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(n1 == Catch::Approx(1.0).epsilon(1e-12));
    // circulant action multiplies each mode by its eigenvalue
    for (size_t m = 0; m < modes.size(); ++m) {
      double lambda = 0.0;
      size_t idx = 0;
      for (const auto& e : rep.eigenvalues) {
        if (!(std::abs(e.value) > *rep.tau)) continue;
        for (int c = 0; c < e.multiplicity; ++c) {
          if (idx == m) lambda = fz.eigenvalue(e.j);
          ++idx;
        }
      }
      const auto image = fz.apply(modes[m].entries());
      for (int i = 0; i < 4; ++i)
        CHECK(image[static_cast<size_t>(i)] == Catch::Approx(lambda * modes[m][i]).margin(1e-10));
    }
  }
  SECTION("no admissible gap lists the neutral indices") {
    // single eigenvalue pinned to modulus one: fuzzy ratio (d+1)/(d-1) = 2 at d = 3
    const FuzzyOperator fz(2, {2.0, 1.0});
    const auto rep = spectrum_at_eq(fz, 3);
    CHECK_FALSE(rep.tau.has_value());
    CHECK_THROWS_WITH(unstable_subspace(rep), Catch::Matchers::ContainsSubstring("neutral indices: 1"));
  }
}

TEST_CASE("seed_on_manifold: chart arithmetic") {
  const auto rep = spectrum_at_eq(reference_fuzzy(), 3);
  const auto modes = unstable_subspace(rep);
  const double coeffs[] = {1.0};

  const auto base = seed_on_manifold(rep, modes, 0.0, coeffs);
  CHECK(l1_distance(base, SimplexVector::uniform(2)) < 1e-15);

  const auto seeded = seed_on_manifold(rep, modes, 0.2, coeffs);
  CHECK(seeded[0] == Catch::Approx(0.5 + 0.2 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(seeded[1] == Catch::Approx(0.5 - 0.2 / std::sqrt(2.0)).epsilon(1e-12));

  for (double eps : {1e-2, 1e-3, 5e-2}) {
    const auto u = seed_on_manifold(rep, modes, eps, coeffs);
    CHECK(l2_distance(u, SimplexVector::uniform(2)) == Catch::Approx(eps).margin(1e-12));
    double sum = 0.0;
    for (int i = 0; i < u.size(); ++i) {
      CHECK(u[i] > 0.0);
      sum += u[i];
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-14));
  }

  CHECK_THROWS_AS(seed_on_manifold(rep, modes, 0.8, coeffs), numeric_error);
  CHECK(chart_eps_max(2) == Catch::Approx(0.1 / std::sqrt(2.0)));
}

TEST_CASE("backward_orbit: fixed point stays put") {
  const auto orbit = backward_orbit(reference_fuzzy(), 3, SimplexVector::uniform(2), 6);
  REQUIRE(orbit.points.size() == 7);
  for (const auto& p : orbit.points) CHECK(l1_distance(p, SimplexVector::uniform(2)) < 1e-12);
  CHECK_FALSE(orbit.truncated);
}

TEST_CASE("backward_orbit: inverts apply_S on the reference example") {
  const auto fz = reference_fuzzy();
  const auto image = apply_S(fz, 3, vec2(0.6, 0.4));
  const auto orbit = backward_orbit(fz, 3, image, 1, 1e-12);
  REQUIRE(orbit.points.size() == 2);
  CHECK(orbit.points[1][0] == Catch::Approx(0.6).margin(1e-10));
  CHECK(orbit.points[1][1] == Catch::Approx(0.4).margin(1e-10));
  CHECK(orbit.residuals[0] < 1e-12);
}

TEST_CASE("backward_orbit: monotone decrease from the 0.72 start") {
  const auto orbit = backward_orbit(reference_fuzzy(), 3, vec2(0.72, 0.28), 10, 1e-12);
  REQUIRE(orbit.points.size() == 11);
  for (size_t k = 0; k + 1 < orbit.points.size(); ++k) {
    CHECK(orbit.points[k + 1][0] < orbit.points[k][0]);
    CHECK(orbit.points[k + 1][0] > 0.5);
  }
  for (double r : orbit.residuals) CHECK(r < 1e-12);
}

TEST_CASE("backward_orbit: inversion property along the orbit") {
  const auto fz = reference_fuzzy();
  const auto orbit = backward_orbit(fz, 3, vec2(0.62, 0.38), 8, 1e-12);
  REQUIRE_FALSE(orbit.truncated);
  for (size_t k = 0; k + 1 < orbit.points.size(); ++k)
    CHECK(l1_distance(apply_S(fz, 3, orbit.points[k + 1]), orbit.points[k]) < 1e-12);
}

TEST_CASE("backward_orbit: contraction rate on chart seeds") {
  const auto fz = reference_fuzzy();
  const auto rep = spectrum_at_eq(fz, 3);
  const auto modes = unstable_subspace(rep);
  const double coeffs[] = {1.0};
  const auto eq = SimplexVector::uniform(2);
  for (double eps : {1e-2, 1e-3}) {
    const auto u0 = seed_on_manifold(rep, modes, eps, coeffs);
    const auto orbit = backward_orbit(fz, 3, u0, 8, 1e-12);
    REQUIRE_FALSE(orbit.truncated);
    for (size_t k = 2; k + 1 < orbit.points.size(); ++k) {
      const double d0 = l2_distance(orbit.points[k], eq);
      const double d1 = l2_distance(orbit.points[k + 1], eq);
      if (d0 < 1e-12) break;
      CHECK(d1 / d0 <= 1.0 / *rep.tau + 0.05);
    }
    CHECK(orbit.rate_estimate >= *rep.tau);
  }
}

TEST_CASE("backward_orbit: two-dimensional unstable subspace at q=3") {
  // SOS beta=2, d=3: the frequency-1 cosine/sine pair expands (3 Qhat(2pi/3)/Qhat(0) > 1)
  const auto op = TransferOperator::sos(2.0);
  const auto fz = fuzzy(op, 3);
  const auto rep = spectrum_at_eq(fz, 3, op);
  REQUIRE(rep.tau.has_value());
  REQUIRE(rep.unstable_dim == 2);
  const auto modes = unstable_subspace(rep);
  REQUIRE(modes.size() == 2);

  // mixed chart direction: both cosine and sine components
  const double coeffs[] = {0.6, -0.8};
  const auto u0 = seed_on_manifold(rep, modes, 2e-2, coeffs);
  CHECK(l2_distance(u0, SimplexVector::uniform(3)) == Catch::Approx(2e-2).margin(1e-12));

  const auto orbit = backward_orbit(fz, 3, u0, 10, 1e-12);
  REQUIRE_FALSE(orbit.truncated);
  const auto eq = SimplexVector::uniform(3);
  for (size_t k = 0; k + 1 < orbit.points.size(); ++k) {
    CHECK(l1_distance(apply_S(fz, 3, orbit.points[k + 1]), orbit.points[k]) < 1e-12);
    CHECK(l2_distance(orbit.points[k + 1], eq) < l2_distance(orbit.points[k], eq));
  }

  const auto law = build_radial_law(orbit, 3, fz, 10);
  for (int n = 1; n < law.depth; ++n) {
    const auto lhs = hadamard_power(law.inbound_at(n), 1.0 / 3.0);
    const auto rhs = apply_S(fz, 3, hadamard_power(law.inbound_at(n + 1), 1.0 / 3.0));
    CHECK(l1_distance(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("backward_orbit: target outside the image truncates with a diagnostic") {
  // S_2 of the ratio-4 model never exceeds 0.8 in the first component
  const auto orbit = backward_orbit(reference_fuzzy(), 3, vec2(0.95, 0.05), 3, 1e-12);
  CHECK(orbit.truncated);
  CHECK(orbit.points.size() < 4);
  CHECK_FALSE(orbit.diagnostic.empty());
}
