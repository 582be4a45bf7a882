#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "circlemap/invariant.hpp"
#include "oracles.hpp"

using namespace circlemap;

namespace {

// the irrational-regime fixture used across these tests: slope 1/2 with the
// offset on the b_- curve near rotation value 1/sqrt2
struct IrrationalFixture {
  MapParams par;
  RotationNumber rho;
  IrrationalFixture()
      : par(0.5, b_lower(0.5, 1.0 / std::numbers::sqrt2, 1e-15).mid()),
        rho(RotationNumber::make_enclosure(
            Enclosure(1.0 / std::numbers::sqrt2 - 1e-12,
                      1.0 / std::numbers::sqrt2 + 1e-12))) {}
};

double calibrated_ks_threshold() {
  std::ifstream in(std::string(CIRCLEMAP_TEST_DATA) + "/calibration.json");
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j.at("ks_threshold").get<double>();
}

}  // namespace

TEST_CASE("invariant interval recursion basics") {
  MapParams p(0.5, 2.0 / 3.0);
  IntervalUnion u0 = invariant_intervals(p, 0);
  REQUIRE(u0.intervals.size() == 1);
  CHECK(u0.total_length() == 1.0);

  IntervalUnion u1 = invariant_intervals(p, 1);
  REQUIRE(u1.intervals.size() == 2);
  CHECK(u1.intervals[0].first == Catch::Approx(0.0));
  CHECK(u1.intervals[0].second == Catch::Approx(1.0 / 6.0));
  CHECK(u1.intervals[1].first == Catch::Approx(2.0 / 3.0));
  CHECK(u1.intervals[1].second == Catch::Approx(1.0));
  CHECK(u1.total_length() == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("interval count, length, and nesting over random parameters") {
  std::mt19937_64 rng(211);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    double a = 0.15 + 0.7 * unif(rng);
    double b = unif(rng);
    MapParams p(a, b);
    IntervalUnion prev = invariant_intervals(p, 0);
    for (std::size_t n = 1; n <= 30; ++n) {
      IntervalUnion cur = invariant_intervals(p, n);
      CHECK(cur.intervals.size() <= n + 1);
      CHECK(cur.total_length() ==
            Catch::Approx(std::pow(a, double(n))).margin(1e-9));
      // nesting: endpoints of the refinement stay inside the previous union
      for (const auto& [lo, hi] : cur.intervals) {
        CHECK(prev.covers(lo, 1e-9));
        CHECK(prev.covers(hi, 1e-9));
      }
      prev = cur;
    }
  }
}

TEST_CASE("intervals shrink onto the cycle when one exists away from tau") {
  MapParams p(0.5, 0.75);
  auto info = periodic_orbit(p);
  REQUIRE(info.has_value());
  for (std::size_t n : {5, 15, 30}) {
    IntervalUnion u = invariant_intervals(p, n);
    for (double c : info->points) CHECK(u.covers(c, 1e-9));
  }
  IntervalUnion deep = invariant_intervals(p, 40);
  for (const auto& [lo, hi] : deep.intervals) {
    double dlo = 1.0, dhi = 1.0;
    for (double c : info->points) {
      dlo = std::min(dlo, std::abs(c - lo));
      dhi = std::min(dhi, std::abs(c - hi));
    }
    CHECK(dlo <= 1e-9);
    CHECK(dhi <= 1e-9);
  }
}

TEST_CASE("gap structure in the irrational regime") {
  IrrationalFixture fx;
  auto gs = gaps(fx.par, fx.rho, 12, 1e-10);
  REQUIRE(gs.size() == 12);
  double a = fx.par.a;
  double sum = 0.0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    double want = (1.0 - a) * std::pow(a, double(i));
    CHECK(gs[i].hi - gs[i].lo == Catch::Approx(want).margin(1e-10));
    sum += gs[i].hi - gs[i].lo;
    CHECK(gs[i].lo >= -1e-9);
    CHECK(gs[i].hi <= 1.0 + 1e-9);
    CHECK(gs[i].err <= 1e-9);  // the rotation enclosure is far tighter than that
  }
  CHECK(sum == Catch::Approx(1.0 - std::pow(a, 12.0)).margin(1e-9));

  // the map carries gap i linearly onto gap i+1
  for (std::size_t i = 0; i + 1 < gs.size(); ++i) {
    CHECK(step_lower(fx.par, gs[i].lo, 0.0) ==
          Catch::Approx(gs[i + 1].lo).margin(1e-9));
    CHECK(step_lower(fx.par, gs[i].hi, 0.0) ==
          Catch::Approx(gs[i + 1].hi).margin(1e-9));
  }

  // gaps are disjoint from the depth-n interval cover
  IntervalUnion u = invariant_intervals(fx.par, 12);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    double inner = 0.5 * (gs[i].lo + gs[i].hi);
    CHECK_FALSE(u.covers(inner, -1e-9));
  }

  CHECK_THROWS_AS(
      gaps(fx.par, RotationNumber::make_rational({1, 2, PlateauSide::interior, false}),
           5, 1e-10),
      std::invalid_argument);
}

TEST_CASE("classification trichotomy") {
  CHECK(classify(MapParams(0.5, 0.70)).cls == DynamicsClass::case1a);
  Classification lo = classify(MapParams(0.5, 2.0 / 3.0));
  CHECK(lo.cls == DynamicsClass::case1b_zero);
  CHECK(lo.boundary_uncertain);
  CHECK(classify(MapParams(0.5, 5.0 / 6.0)).cls == DynamicsClass::case1b_one);
  // double resolution pins the 1/sqrt2 fixture to a flagged plateau edge
  IrrationalFixture fx;
  Classification near = classify(fx.par);
  CHECK(near.cls == DynamicsClass::case1b_one);
  CHECK(near.boundary_uncertain);
  // a genuinely enclosure-regime point sits between the 21/34 and 34/55
  // plateaus at a = 0.9
  double bg = 0.5 * (b_upper(0.9, 21, 34, 1e-15).mid() + b_lower(0.9, 34, 55, 1e-15).mid());
  CHECK(classify(MapParams(0.9, bg)).cls == DynamicsClass::case2);

  // reflection swaps the two boundary classes
  std::mt19937_64 rng(223);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int done = 0;
  while (done < 6) {
    double a = 0.2 + 0.6 * unif(rng);
    double b = unif(rng);
    if (a + b <= 1.0) continue;
    Classification c = classify(MapParams(a, b));
    Classification cr = classify(reflect(MapParams(a, b)));
    auto swap_case = [](DynamicsClass d) {
      if (d == DynamicsClass::case1b_zero) return DynamicsClass::case1b_one;
      if (d == DynamicsClass::case1b_one) return DynamicsClass::case1b_zero;
      return d;
    };
    CHECK(cr.cls == swap_case(c.cls));
    ++done;
  }
}

TEST_CASE("gauge covering values") {
  MapParams p(0.5, 0.7);
  CHECK(gauge_cover_value(p, 1, Gauge::log_inv()) ==
        Catch::Approx(2.0 / std::log(2.0)));
  // h(t) = 1/|log t|: the covering value decreases monotonely to 1/|log a|
  // and is within 1% of it from n = 100 on
  for (std::size_t n : {100, 1000, 100000})
    CHECK(gauge_cover_value(p, n, Gauge::log_inv()) <=
          1.01 / std::abs(std::log(p.a)) + 1e-12);
  for (std::size_t n : {1, 5, 50, 500})
    CHECK(gauge_cover_value(p, n + 1, Gauge::log_inv()) <
          gauge_cover_value(p, n, Gauge::log_inv()));
  // power gauges collapse to zero
  CHECK(gauge_cover_value(p, 2000, Gauge::power(0.05)) < 1e-12);
  // squared-log gauge vanishes as well for a single map
  CHECK(gauge_cover_value(p, 100000, Gauge::log_inv_sq()) < 1e-3);
}

TEST_CASE("empirical measure of a periodic map is the cycle average") {
  MapParams p(0.5, 2.0 / 3.0);
  MeasureSample s = empirical_measure(p, 0.0, 1000, BranchPolicy::always_lower());
  REQUIRE(s.points.size() == 1000);
  CHECK(s.mean() == Catch::Approx(1.0 / 3.0).margin(1e-12));
  // exactly two atoms
  for (double x : s.points) CHECK((x == 0.0 || x == Catch::Approx(2.0 / 3.0)));
}

TEST_CASE("empirical measure concentrates near the invariant set") {
  IrrationalFixture fx;
  MeasureSample s = empirical_measure(fx.par, 0.37, 400, BranchPolicy::always_lower());
  IntervalUnion u = invariant_intervals(fx.par, 12);
  double slack = std::pow(fx.par.a, 12.0);
  for (std::size_t i = 20; i < s.points.size(); ++i)
    CHECK(u.distance_to(s.points[i]) <= slack + 1e-9);
  // orbit average approaches chi; at this resolution-degenerate parameter
  // the iterated doubles lock onto one of the nearby plateau cycles (which
  // one depends on rounding details), spreading the mean by a few 1e-3
  MeasureSample big = empirical_measure(fx.par, 0.37, 200000, BranchPolicy::always_lower());
  double rho = fx.rho.enclosure().mid();
  CHECK(big.mean() == Catch::Approx(chi(fx.par, rho)).margin(0.01));
}

TEST_CASE("pushforward measure against the empirical sample") {
  IrrationalFixture fx;
  MeasureSample push = pushforward_measure(fx.par, fx.rho, 10000, 1e-10);
  REQUIRE(push.points.size() == 10000);
  for (double x : push.points) {
    CHECK(x >= -1e-9);
    CHECK(x <= 1.0 + 1e-9);
  }
  MeasureSample emp = empirical_measure(fx.par, 0.5, 100000, BranchPolicy::always_lower());
  double ks = oracle::ks_distance(push.points, emp.points);
  CHECK(ks <= calibrated_ks_threshold());
  double rho = fx.rho.enclosure().mid();
  CHECK(push.mean() == Catch::Approx(chi(fx.par, rho)).margin(0.01));

  CHECK_THROWS_AS(
      pushforward_measure(fx.par,
                          RotationNumber::make_rational({1, 2, PlateauSide::interior, false}),
                          100, 1e-10),
      std::invalid_argument);
}

TEST_CASE("measure csv export") {
  MapParams p(0.5, 2.0 / 3.0);
  MeasureSample s = empirical_measure(p, 0.0, 4, BranchPolicy::always_lower());
  std::ostringstream os;
  write_csv(s, os);
  std::string text = os.str();
  CHECK(text.find("empirical") != std::string::npos);
  CHECK(text.find("a=0.5") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);  // header + 4 values
}
