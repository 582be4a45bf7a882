#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "circlemap/map.hpp"

using namespace circlemap;

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(MapParams(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(MapParams(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(MapParams(0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MapParams(0.5, -0.1), std::invalid_argument);
  CHECK(MapParams::rotation_limit(0.25).is_rotation());
}

TEST_CASE("discontinuity point") {
  CHECK(discontinuity(MapParams(0.5, 2.0 / 3.0)).value() == Catch::Approx(2.0 / 3.0));
  CHECK(discontinuity(MapParams(0.5, 0.5)).value() == Catch::Approx(1.0));
  CHECK_FALSE(discontinuity(MapParams(0.5, 0.25)).has_value());
  CHECK(discontinuity(MapParams(0.5, 0.0)).value() == 0.0);
}

TEST_CASE("branch steps at and away from tau") {
  MapParams p(0.5, 2.0 / 3.0);
  double tau = 2.0 / 3.0;
  CHECK(step_lower(p, tau) == 0.0);
  CHECK(step_upper(p, tau) == 1.0);
  CHECK(step_lower(p, 0.0) == Catch::Approx(2.0 / 3.0));
  CHECK(step_upper(p, 0.0) == Catch::Approx(2.0 / 3.0));
  CHECK(step_lower(p, 1.0) == Catch::Approx(1.0 / 6.0));

  MapParams half(0.5, 0.5);
  CHECK(step_upper(half, 1.0) == 1.0);
  CHECK(step_lower(half, 1.0) == 0.0);

  // equal branches off tau, exactly one apart at tau
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    double x = unif(rng);
    if (std::abs(x - tau) <= 1e-12) continue;
    CHECK(step_lower(p, x) == step_upper(p, x));
  }
  CHECK(step_upper(p, tau) - step_lower(p, tau) == 1.0);
}

TEST_CASE("lifts: periodicity, projection, monotonicity") {
  MapParams p(0.5, 2.0 / 3.0);
  CHECK(lift_lower(p, 0.0) == Catch::Approx(2.0 / 3.0));
  CHECK(lift_lower(p, 1.0) == Catch::Approx(5.0 / 3.0));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    double x = unif(rng);
    CHECK(lift_lower(p, x + 1.0) == Catch::Approx(lift_lower(p, x) + 1.0));
    CHECK(lift_upper(p, x + 1.0) == Catch::Approx(lift_upper(p, x) + 1.0));
    double y = unif(rng);
    if (x < y) {
      CHECK(lift_lower(p, x) < lift_lower(p, y));
      CHECK(lift_upper(p, x) < lift_upper(p, y));
    }
  }

  // frac(F^n(x)) = f^n(frac(x)) along branch orbits
  for (int t = 0; t < 20; ++t) {
    double x = unif(rng);
    double lifted = x, projected = frac(x);
    for (int n = 0; n < 50; ++n) {
      lifted = lift_lower(p, lifted);
      projected = step_lower(p, projected, 0.0);  // raw branch, no snapping
      CHECK(frac(lifted) == Catch::Approx(projected).margin(1e-9));
    }
  }
}

TEST_CASE("inverse on the two image pieces") {
  MapParams p(0.5, 2.0 / 3.0);
  CHECK(inverse(p, 0.0).value() == Catch::Approx(2.0 / 3.0));
  CHECK(inverse(p, 1.0).value() == Catch::Approx(2.0 / 3.0));
  CHECK_FALSE(inverse(p, 0.5).has_value());
  CHECK_THROWS_AS(inverse(MapParams(0.5, 0.25), 0.1), std::invalid_argument);

  // inverse undoes both branches wherever defined
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    double x = unif(rng);
    double ylo = step_lower(p, x);
    double yhi = step_upper(p, x);
    CHECK(inverse(p, ylo).value() == Catch::Approx(x).margin(1e-9));
    CHECK(inverse(p, yhi).value() == Catch::Approx(x).margin(1e-9));
  }
}

TEST_CASE("reflection conjugacy") {
  MapParams p(0.5, 2.0 / 3.0);
  MapParams r = reflect(p);
  CHECK(r.a == 0.5);
  CHECK(r.b == Catch::Approx(5.0 / 6.0));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // involution where a + b > 1
  for (int t = 0; t < 50; ++t) {
    double a = 0.1 + 0.8 * unif(rng);
    double b = unif(rng);
    if (a + b <= 1.0) continue;
    MapParams q(a, b);
    MapParams qq = reflect(reflect(q));
    CHECK(qq.b == Catch::Approx(q.b).margin(1e-12));
  }
  // s(f_+(s(x))) equals the lower branch of the reflected map
  for (int t = 0; t < 200; ++t) {
    double x = unif(rng);
    double lhs = 1.0 - step_upper(p, 1.0 - x);
    double rhs = step_lower(r, x);
    CHECK(lhs == Catch::Approx(rhs).margin(1e-9));
  }
}

TEST_CASE("orbits reproduce worked trajectories") {
  MapParams p(0.5, 2.0 / 3.0);
  Orbit o = orbit(p, 1.0, 4, BranchPolicy::always_lower());
  std::vector<double> want = {1.0, 1.0 / 6.0, 3.0 / 4.0, 1.0 / 24.0, 11.0 / 16.0};
  REQUIRE(o.points.size() == 5);
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(o.points[i] == Catch::Approx(want[i]).margin(1e-12));

  Orbit per = orbit(p, 0.0, 4, BranchPolicy::always_lower());
  std::vector<double> want2 = {0.0, 2.0 / 3.0, 0.0, 2.0 / 3.0, 0.0};
  for (std::size_t i = 0; i < want2.size(); ++i)
    CHECK(per.points[i] == Catch::Approx(want2[i]).margin(1e-12));
  CHECK(per.choices_at_tau.size() == 2);  // the orbit passes tau twice

  MapParams fix(0.5, 0.5);
  Orbit fo = orbit(fix, 0.0, 3, BranchPolicy::always_lower());
  std::vector<double> want3 = {0.0, 0.5, 0.75, 0.875};
  for (std::size_t i = 0; i < want3.size(); ++i)
    CHECK(fo.points[i] == Catch::Approx(want3[i]).margin(1e-12));
}

TEST_CASE("orbit symbols satisfy the defining identity") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    double a = 0.1 + 0.85 * unif(rng);
    double b = unif(rng);
    MapParams p(a, b);
    Orbit o = orbit(p, unif(rng), 300, BranchPolicy::seeded(t));
    bool wrap = a + b >= 1.0;
    for (std::size_t i = 0; i < o.symbols.size(); ++i) {
      int e = o.symbols[i];
      if (wrap)
        CHECK((e == 0 || e == 1));
      else
        CHECK((e == -1 || e == 0));
      // reconstruct the next point from (x_i, eps_i)
      double rebuilt = a * o.points[i] + b - e;
      CHECK(rebuilt == Catch::Approx(o.points[i + 1]).margin(1e-9));
    }
  }
}

TEST_CASE("scripted policy consumption and exhaustion") {
  MapParams p(0.5, 2.0 / 3.0);
  Orbit o = orbit(p, 2.0 / 3.0, 3,
                  BranchPolicy::scripted({Branch::upper, Branch::lower}));
  CHECK(o.points[1] == 1.0);  // upper choice at tau
  CHECK_THROWS_AS(orbit(p, 0.0, 10, BranchPolicy::scripted({Branch::lower})),
                  std::runtime_error);
}
