#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ggmtree/thresholds.hpp"

using namespace ggmtree;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("sos_region: threshold arcosh((d+1)/(d-1))") {
  CHECK(sos_all_q_threshold(2) == Catch::Approx(1.762747174039086).epsilon(1e-14));
  CHECK(sos_region(2.0, 2));
  CHECK_FALSE(sos_region(1.7, 2));
  CHECK(sos_region(50.0, 7));
}

TEST_CASE("sos_min_period: spot values and boundary consistency") {
  CHECK(sos_min_period(1.0, 2) == 6);
  // at the threshold the arccos argument reaches -1, so the period closes at 2
  CHECK(sos_min_period(sos_all_q_threshold(2), 2) == 2);
  CHECK_THROWS_AS(sos_min_period(2.0, 2), std::invalid_argument);
}

TEST_CASE("invsq_region: window and negative side for d = 5") {
  const auto r = invsq_region(1.0, 5);
  CHECK(r.window_lo == Catch::Approx(6.0 / (kPi * kPi) * 4.0 / 7.0).epsilon(1e-14));
  CHECK(r.window_hi == Catch::Approx(27.0 / (kPi * kPi)).epsilon(1e-14));
  CHECK_FALSE(r.all_q);
  CHECK_FALSE(r.negative_side);
  CHECK_FALSE(r.window_unbounded);

  CHECK(invsq_region(3.0, 5).all_q);
  CHECK(invsq_region(0.2, 5).all_q);
  // just above 6/pi^2 (d+1)/(d-2) = 12/pi^2 the negative mode appears
  CHECK(invsq_region(12.0 / (kPi * kPi) + 1e-6, 5).negative_side);
  CHECK_FALSE(invsq_region(12.0 / (kPi * kPi) - 1e-6, 5).negative_side);
}

TEST_CASE("invsq_region: window unbounded for d <= 3") {
  for (int d : {2, 3}) {
    const auto r = invsq_region(100.0, d);
    CHECK(r.window_unbounded);
    CHECK_FALSE(r.all_q); // large a stays inside [lower, infinity)
  }
}

TEST_CASE("invsq_min_period: spot value and window edge") {
  CHECK(invsq_min_period(1.0, 5) == 5);
  // at the lower window edge the radicand closes and the period reaches 2
  const double lo = 6.0 / (kPi * kPi) * 4.0 / 7.0;
  const double rad = kPi * kPi / 3.0 * (1.0 + 2.0 / 5.0) - 2.0 / lo * (1.0 - 1.0 / 5.0);
  CHECK(rad == Catch::Approx(0.0).margin(1e-12));
  CHECK(invsq_min_period(lo, 5) == 2);
  CHECK_THROWS_AS(invsq_min_period(3.0, 5), std::invalid_argument);
}

TEST_CASE("scan_q0: all-q region scans to minimal period 2") {
  const auto scan = scan_q0(TransferOperator::sos(2.0), 2, 16);
  REQUIRE(scan.minimal_q.has_value());
  CHECK(*scan.minimal_q == 2);
  CHECK_THROWS_AS(scan_q0(TransferOperator::sos(2.0), 2, 513), std::invalid_argument);
}

TEST_CASE("scan_q0: neutral hit recorded at the exceptional inverse-square value") {
  const double a = 1536.0 / (73.0 * kPi * kPi);
  const auto scan = scan_q0(TransferOperator::inverse_square(a), 5, 16);
  const auto& row = scan.rows[14]; // q = 16
  REQUIRE(row.q == 16);
  CHECK(row.exists);
  REQUIRE(row.neutral.size() == 1);
  CHECK(row.neutral[0] == 3);
  CHECK(row.unstable_dim == 9);
  CHECK(std::abs(row.max_modulus - 3.46) < 0.01);
}

TEST_CASE("scan_q0: closed forms agree with the scan on the SOS grid") {
  for (int d : {2, 3, 4}) {
    for (double beta : {0.3, 0.6, 0.9, 1.2, 1.5}) {
      const auto scan = scan_q0(TransferOperator::sos(beta), d, 64);
      REQUIRE(scan.minimal_q.has_value());
      if (sos_region(beta, d)) {
        CHECK(*scan.minimal_q == 2);
      } else {
        CHECK(*scan.minimal_q == sos_min_period(beta, d));
      }
    }
  }
}

TEST_CASE("scan_q0: closed forms agree with the scan on the inverse-square grid") {
  // positive-branch part of the window: below 6/pi^2 (d+1)/(d-2) the period-2
  // negative mode is absent and the formula governs the minimal period
  for (int d : {4, 5, 6}) {
    const auto region = invsq_region(1.0, d);
    const double top = 6.0 / (kPi * kPi) * (d + 1) / (d - 2);
    for (int i = 1; i <= 9; ++i) {
      const double a = region.window_lo + (top - region.window_lo) * i / 10.0;
      const auto scan = scan_q0(TransferOperator::inverse_square(a), d, 64);
      REQUIRE(scan.minimal_q.has_value());
      CHECK(*scan.minimal_q == invsq_min_period(a, d));
    }
    // above that sub-window the q = 2 negative mode takes over
    const double a_neg = top * 1.02;
    if (a_neg < invsq_region(a_neg, d).window_hi) {
      const auto scan = scan_q0(TransferOperator::inverse_square(a_neg), d, 16);
      REQUIRE(scan.minimal_q.has_value());
      CHECK(*scan.minimal_q == 2);
      CHECK(invsq_min_period(a_neg, d) > 2);
    }
  }
}

TEST_CASE("scan_q0: minimal period non-increasing in d") {
  const auto op = TransferOperator::sos(0.8);
  int last = 1000;
  for (int d : {2, 3, 4, 5, 6}) {
    const auto scan = scan_q0(op, d, 64);
    REQUIRE(scan.minimal_q.has_value());
    CHECK(*scan.minimal_q <= last);
    last = *scan.minimal_q;
  }
}

TEST_CASE("dobrushin_unique: SOS spot checks") {
  // q = 2, d = 2: unique iff beta < 2/3
  auto r = dobrushin_unique(TransferOperator::sos(0.5), 2, 2);
  CHECK(r.conclusive);
  CHECK(r.unique);
  CHECK(r.delta_q == Catch::Approx(0.5).epsilon(1e-12)); // beta (q-1)
  r = dobrushin_unique(TransferOperator::sos(0.7), 2, 2);
  CHECK(r.conclusive);
  CHECK_FALSE(r.unique);
  // q = 5, d = 3: unique iff beta < 1/8
  CHECK(dobrushin_unique(TransferOperator::sos(0.12), 5, 3).unique);
  CHECK_FALSE(dobrushin_unique(TransferOperator::sos(0.13), 5, 3).unique);
}

TEST_CASE("dobrushin_unique: variation is nonnegative") {
  for (const auto& op : {TransferOperator::sos(0.3), TransferOperator::inverse_square(1.0)}) {
    for (int q : {2, 3, 7}) {
      const auto r = dobrushin_unique(op, q, 3);
      CHECK(r.conclusive);
      CHECK(r.delta_q >= 0.0);
    }
  }
}

TEST_CASE("dobrushin_unique: growing variation is inconclusive") {
  // Gaussian-like table: the potential grows quadratically through the window
  CustomModel m;
  for (int j = 0; j <= 40; ++j) m.table.push_back(std::exp(-0.02 * j * j));
  const auto op = TransferOperator::custom(std::move(m));
  const auto r = dobrushin_unique(op, 2, 2);
  CHECK_FALSE(r.conclusive);
}

TEST_CASE("dobrushin vs existence: no overlap on the SOS grid") {
  for (int d : {2, 3, 4}) {
    for (double beta : {0.1, 0.3, 0.5, 0.7, 0.9, 1.2, 1.5, 2.0}) {
      const auto op = TransferOperator::sos(beta);
      const auto scan = scan_q0(op, d, 12);
      for (const auto& row : scan.rows) {
        const auto dob = dobrushin_unique(op, row.q, d);
        CHECK_FALSE((dob.conclusive && dob.unique && row.exists));
      }
    }
  }
}

TEST_CASE("make_threshold_report: shapes and consistency") {
  SECTION("SOS inside the window") {
    const auto rep = make_threshold_report(TransferOperator::sos(1.0), 2, 16);
    CHECK(rep.model == "sos");
    CHECK_FALSE(rep.region_all_q);
    CHECK(rep.kind == ThresholdReport::PeriodKind::value);
    CHECK(rep.minimal_period == 6);
    REQUIRE(rep.closed_form_period.has_value());
    CHECK(*rep.closed_form_period == 6);
    CHECK(rep.scan.rows.size() == 15);
    CHECK(rep.dobrushin.size() == 15);
  }
  SECTION("inverse-square d=2 carries the unbounded-window note") {
    const auto rep = make_threshold_report(TransferOperator::inverse_square(5.0), 2, 8);
    CHECK(rep.notes.find("infinity") != std::string::npos);
  }
  SECTION("all-q region") {
    const auto rep = make_threshold_report(TransferOperator::sos(2.0), 2, 8);
    CHECK(rep.region_all_q);
    CHECK(rep.kind == ThresholdReport::PeriodKind::all_q);
    CHECK(rep.minimal_period == 2);
  }
}
