#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "stadium/billiard_map.hpp"

using namespace stadium;

namespace {
constexpr double pi = std::numbers::pi;

PhasePoint top_midpoint(const StadiumTable& t, double phi = 0.0) {
  return {pi + t.ell / 2, phi};
}
PhasePoint right_apex(double phi = 0.0) { return {pi / 2, phi}; }
PhasePoint left_apex(const StadiumTable& t, double phi = 0.0) {
  return {pi + t.ell + pi / 2, phi};
}
}  // namespace

TEST_CASE("perpendicular bounce between the segments") {
  const StadiumTable table(4.0);
  const auto out = step(table, top_midpoint(table));
  CHECK(out.next.r == doctest::Approx(2 * pi + 4.0 + 2.0));  // bottom midpoint
  CHECK(out.next.phi == doctest::Approx(0.0).scale(1.0));
  CHECK(out.flight_length == doctest::Approx(2.0));
}

TEST_CASE("axis orbit bounces between the apexes") {
  const StadiumTable table(4.0);
  const auto out = step(table, right_apex());
  CHECK(out.next.r == doctest::Approx(left_apex(table).r));
  CHECK(out.next.phi == doctest::Approx(0.0).scale(1.0));
  CHECK(out.flight_length == doctest::Approx(6.0));
}

TEST_CASE("step matches the ray-march oracle") {
  std::mt19937_64 rng(23);
  for (double ell : {4.0, 10.0}) {
    const StadiumTable table(ell);
    const auto sample = sample_regular_phase_points(table, 200, 1000 + int(ell));
    for (const auto& p : sample) {
      const auto out = step(table, p);
      const double oracle_r = oracles::ray_march_next_r(table, p);
      CHECK(circular_distance(out.next.r, oracle_r, table.perimeter()) < 1e-7);
      CHECK(out.flight_length >= 1e-9);
    }
  }
}

TEST_CASE("reverse is the time-reversal involution") {
  const PhasePoint p{1.0, 0.3};
  CHECK(reverse(p).r == 1.0);
  CHECK(reverse(p).phi == -0.3);
  CHECK(reverse(reverse(p)).phi == p.phi);
  CHECK(reverse(PhasePoint{2.0, 0.0}).phi == 0.0);
}

TEST_CASE("time reversal conjugates the map to its inverse") {
  const StadiumTable table(10.0);
  const auto sample = sample_regular_phase_points(table, 150, 31);
  for (const auto& p : sample) {
    const PhasePoint q = step(table, p).next;
    PhasePoint back{};
    try {
      back = step(table, reverse(q)).next;
    } catch (const SingularTrajectory&) {
      continue;  // reversed flight may start too close to the cutoffs
    }
    CHECK(circular_distance(back.r, p.r, table.perimeter()) < 1e-8);
    CHECK(std::abs(back.phi - (-p.phi)) < 1e-8);
  }
}

TEST_CASE("specular reflection holds at every computed collision") {
  const StadiumTable table(10.0);
  const auto sample = sample_regular_phase_points(table, 200, 37);
  for (const auto& p : sample)
    CHECK(oracles::specular_residual(table, p) < 1e-9);
}

TEST_CASE("trajectory iterates and propagates the failing index") {
  const StadiumTable table(4.0);

  const auto bouncer = trajectory(table, top_midpoint(table), 4);
  REQUIRE(bouncer.size() == 5);
  for (int k = 0; k <= 4; ++k) {
    const double expected = k % 2 == 0 ? pi + 2.0 : 2 * pi + 6.0;
    CHECK(bouncer[k].r == doctest::Approx(expected));
  }

  const auto axis = trajectory(table, right_apex(), 3);
  CHECK(axis[1].r == doctest::Approx(left_apex(table).r));
  CHECK(axis[2].r == doctest::Approx(right_apex().r));
  CHECK(axis[3].r == doctest::Approx(left_apex(table).r));

  try {
    trajectory(table, right_apex(pi / 2 - 1e-13), 3);
    FAIL("expected a singular trajectory");
  } catch (const SingularTrajectory& e) {
    CHECK(e.step_index() == 0);
    CHECK(e.cause() == SingularCause::GrazingStart);
  }
}

TEST_CASE("corner hits are singular, not silently reflected") {
  const StadiumTable table(4.0);
  // from the bottom midpoint straight at the top-right junction (2, 1)
  const Eigen::Vector2d from(0.0, -1.0);
  const Eigen::Vector2d target(2.0, 1.0);
  const Eigen::Vector2d d = (target - from).normalized();
  const Eigen::Vector2d n(0.0, 1.0);
  const double phi = std::atan2(cross2<double>(n, d), n.dot(d));
  try {
    step(table, PhasePoint{2 * pi + 4.0 + 2.0, phi});
    FAIL("expected a singular step");
  } catch (const SingularTrajectory& e) {
    CHECK(e.cause() == SingularCause::CornerHit);
  }

  CHECK_THROWS_AS(step(table, PhasePoint{0.0, 0.1}), SingularTrajectory);
  try {
    step(table, PhasePoint{pi + 5e-10, 0.2});
    FAIL("expected a singular step");
  } catch (const SingularTrajectory& e) {
    CHECK(e.cause() == SingularCause::CornerStart);
  }
}

TEST_CASE("near-tangent chords on an arc are reported as grazing") {
  const StadiumTable table(4.0);
  // an almost-grazing start creeps along its own arc and arrives grazing
  try {
    step(table, right_apex(pi / 2 - 5e-10));
    FAIL("expected a singular step");
  } catch (const SingularTrajectory& e) {
    CHECK(e.cause() == SingularCause::GrazingHit);
  }
}

TEST_CASE("measure distortion is 1 at the symmetric orbits") {
  const StadiumTable table(4.0);
  CHECK(measure_distortion(table, top_midpoint(table), 1e-5) ==
        doctest::Approx(1.0).epsilon(1e-3));
  CHECK(measure_distortion(table, right_apex(), 1e-5) ==
        doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("measure distortion is 1 on random regular points") {
  const StadiumTable table(10.0);
  const auto sample = sample_regular_phase_points(table, 100, 41);
  for (const auto& p : sample)
    CHECK(std::abs(measure_distortion(table, p, 1e-5) - 1.0) < 1e-3);
}

TEST_CASE("measure distortion converges with at least first order in h") {
  const StadiumTable table(10.0);
  const auto sample = sample_regular_phase_points(table, 25, 43, /*margin=*/1e-2,
                                                  /*h=*/1e-3);
  int informative = 0;
  for (const auto& p : sample) {
    const double coarse = std::abs(measure_distortion(table, p, 1e-3) - 1.0);
    const double fine = std::abs(measure_distortion(table, p, 1e-4) - 1.0);
    if (coarse < 1e-9) continue;  // too close to the roundoff floor
    ++informative;
    CHECK(fine < coarse);
    CHECK(fine * 10.0 <= coarse * 1.0001);  // observed order >= 1
  }
  CHECK(informative > 0);
}

TEST_CASE("distortion probes propagate singularities") {
  const StadiumTable table(4.0);
  CHECK_THROWS_AS(measure_distortion(table, right_apex(pi / 2 - 1e-13), 1e-5),
                  SingularTrajectory);
}

TEST_CASE("the map agrees between double and long double") {
  const StadiumTable table(10.0);
  const auto sample = sample_regular_phase_points(table, 50, 47);
  for (const auto& p : sample) {
    const auto d = step(table, p);
    const auto l =
        step(table, PhasePointT<long double>{p.r, p.phi});
    CHECK(std::abs(double(l.next.r) - d.next.r) < 1e-10);
    CHECK(std::abs(double(l.next.phi) - d.next.phi) < 1e-10);
  }
}
