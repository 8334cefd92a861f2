#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "stadium/geometry.hpp"

// The billiard map on the phase space boundary x [-pi/2, pi/2].  A phase
// point is (r, phi): arc-length position and reflection angle, where phi is
// measured from the inward normal to the outgoing velocity, positive
// counterclockwise.  The map is undefined on the singular set (grazing
// collisions and the four corner points); those inputs throw
// SingularTrajectory instead of returning extended-by-continuity values.

namespace stadium {

/// Cutoff on pi/2 - |phi| below which a starting angle counts as grazing.
inline constexpr double kGrazingStartTol = 1e-12;
/// Cutoff on pi/2 - |phi'| below which an arrival counts as grazing.
inline constexpr double kGrazingHitTol = 1e-9;
/// Arc-length distance to a junction below which a collision is a corner hit.
inline constexpr double kCornerTol = 1e-9;
/// Minimal admissible flight time; excludes the departure point itself.
inline constexpr double kMinFlightTime = 1e-12;

template <typename Scalar>
struct PhasePointT {
  Scalar r;
  Scalar phi;
};

using PhasePoint = PhasePointT<double>;

template <typename Scalar>
struct StepOutcomeT {
  PhasePointT<Scalar> next;
  Scalar flight_length;
};

using StepOutcome = StepOutcomeT<double>;

/// Time-reversal involution (r, phi) -> (r, -phi).
template <typename Scalar>
PhasePointT<Scalar> reverse(const PhasePointT<Scalar>& p) {
  return {p.r, -p.phi};
}

/// Outgoing unit velocity of a phase point.
template <typename Scalar>
Vec2<Scalar> velocity(const StadiumTable& table, const PhasePointT<Scalar>& p) {
  return rotate(inward_normal(table, p.r), p.phi);
}

namespace detail {

// Roots of t^2 + 2 b t + c = 0 in a cancellation-safe form.
template <typename Scalar>
int stable_quadratic(Scalar b, Scalar c, Scalar roots[2]) {
  const Scalar disc = b * b - c;
  if (disc < 0) return 0;
  const Scalar sq = std::sqrt(disc);
  if (b == Scalar(0)) {
    roots[0] = -sq;
    roots[1] = sq;
    return 2;
  }
  const Scalar q = -(b + std::copysign(sq, b));
  roots[0] = q;
  roots[1] = (q == Scalar(0)) ? Scalar(0) : c / q;
  if (roots[0] > roots[1]) std::swap(roots[0], roots[1]);
  return 2;
}

}  // namespace detail

/// One application of the billiard map.  Throws SingularTrajectory (with
/// step index 0) when the map is undefined at p or the flight ends on the
/// singular set.
template <typename Scalar>
StepOutcomeT<Scalar> step(const StadiumTable& table,
                          const PhasePointT<Scalar>& p) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar ell = static_cast<Scalar>(table.ell);
  const Scalar half = ell / 2;
  const Scalar per = 2 * pi + 2 * ell;

  if (pi / 2 - std::abs(p.phi) < static_cast<Scalar>(kGrazingStartTol))
    throw SingularTrajectory(SingularCause::GrazingStart, 0);
  for (double corner : table.corners())
    if (circular_distance(p.r, static_cast<Scalar>(corner), per) <
        static_cast<Scalar>(kCornerTol))
      throw SingularTrajectory(SingularCause::CornerStart, 0);

  const Vec2<Scalar> q0 = boundary_point(table, p.r).first;
  const Vec2<Scalar> d = velocity(table, p);

  Scalar best_t = std::numeric_limits<Scalar>::infinity();
  Vec2<Scalar> hit;
  bool hit_is_arc = false;
  Vec2<Scalar> hit_center;

  const Scalar tmin = static_cast<Scalar>(kMinFlightTime);

  // Straight segments y = +-1, |x| <= ell/2.
  for (int sgn : {+1, -1}) {
    if (sgn * d.y() <= Scalar(0)) continue;
    const Scalar t = (Scalar(sgn) - q0.y()) / d.y();
    if (t <= tmin || t >= best_t) continue;
    const Scalar x = q0.x() + t * d.x();
    if (std::abs(x) <= half) {
      best_t = t;
      hit = Vec2<Scalar>(x, Scalar(sgn));
      hit_is_arc = false;
    }
  }

  // Semicircles: full circles restricted to their outward half-planes.
  for (int sgn : {+1, -1}) {
    const Vec2<Scalar> c(sgn * half, 0);
    const Vec2<Scalar> u = q0 - c;
    Scalar roots[2];
    const int nroots =
        detail::stable_quadratic(u.dot(d), u.squaredNorm() - Scalar(1), roots);
    for (int k = 0; k < nroots; ++k) {
      const Scalar t = roots[k];
      if (t <= tmin || t >= best_t) continue;
      const Vec2<Scalar> q = q0 + t * d;
      if (sgn * (q.x() - sgn * half) < Scalar(0)) continue;  // inner half
      best_t = t;
      hit = q;
      hit_is_arc = true;
      hit_center = c;
      break;  // roots are sorted; the first admissible one is the nearest
    }
  }

  if (!std::isfinite(best_t))
    throw GeometryError("no forward boundary intersection found");

  // Snap onto the exact boundary before inverting the parametrization.
  if (hit_is_arc)
    hit = hit_center + (hit - hit_center).normalized();
  else
    hit.y() = std::copysign(Scalar(1), hit.y());

  const Scalar r1 = arc_param(table, hit);
  for (double corner : table.corners())
    if (circular_distance(r1, static_cast<Scalar>(corner), per) <
        static_cast<Scalar>(kCornerTol))
      throw SingularTrajectory(SingularCause::CornerHit, 0);

  const Vec2<Scalar> n1 = inward_normal(table, r1);
  const Vec2<Scalar> out = d - 2 * d.dot(n1) * n1;
  const Scalar phi1 = std::atan2(cross2(n1, out), n1.dot(out));
  if (pi / 2 - std::abs(phi1) < static_cast<Scalar>(kGrazingHitTol))
    throw SingularTrajectory(SingularCause::GrazingHit, 0);

  return {{r1, phi1}, (hit - q0).norm()};
}

/// Iterates of the billiard map: element 0 is p, element k+1 = step(element
/// k).  Throws SingularTrajectory carrying the failing iterate index.
template <typename Scalar>
std::vector<PhasePointT<Scalar>> trajectory(const StadiumTable& table,
                                            const PhasePointT<Scalar>& p,
                                            int n) {
  if (n < 0) throw DomainError("trajectory length must be nonnegative");
  std::vector<PhasePointT<Scalar>> out;
  out.reserve(static_cast<size_t>(n) + 1);
  out.push_back(p);
  for (int k = 0; k < n; ++k) {
    try {
      out.push_back(step(table, out.back()).next);
    } catch (const SingularTrajectory& e) {
      throw e.with_step(k);
    }
  }
  return out;
}

/// Finite-difference check of the invariant measure cos(phi) dr dphi:
/// |det J| cos(phi') / cos(phi) for the central-difference Jacobian J of the
/// map at p.  Tends to 1 as h -> 0 at regular points.
template <typename Scalar>
Scalar measure_distortion(const StadiumTable& table,
                          const PhasePointT<Scalar>& p, Scalar h) {
  if (!(h > Scalar(0))) throw DomainError("finite-difference step must be positive");
  const Scalar per = static_cast<Scalar>(table.perimeter());

  const auto wrap_r = [per](Scalar r) {
    r = std::fmod(r, per);
    return r < Scalar(0) ? r + per : r;
  };

  const auto center = step(table, p).next;
  const auto rp = step(table, PhasePointT<Scalar>{wrap_r(p.r + h), p.phi}).next;
  const auto rm = step(table, PhasePointT<Scalar>{wrap_r(p.r - h), p.phi}).next;
  const auto pp = step(table, PhasePointT<Scalar>{p.r, p.phi + h}).next;
  const auto pm = step(table, PhasePointT<Scalar>{p.r, p.phi - h}).next;

  const auto wrap = [per](Scalar d) {
    d = std::fmod(d, per);
    if (d > per / 2) d -= per;
    if (d < -per / 2) d += per;
    return d;
  };

  const Scalar j00 = wrap(rp.r - rm.r) / (2 * h);
  const Scalar j01 = wrap(pp.r - pm.r) / (2 * h);
  const Scalar j10 = (rp.phi - rm.phi) / (2 * h);
  const Scalar j11 = (pp.phi - pm.phi) / (2 * h);
  const Scalar det = j00 * j11 - j01 * j10;

  return std::abs(det) * std::cos(center.phi) / std::cos(p.phi);
}

/// Deterministic sample of phase points that keep a `margin` of safety from
/// the singular set: the point itself and all four centered probes at offset
/// h step successfully and land at least `margin` (in arc length / angle)
/// away from corners and grazing.  Suitable for finite-difference checks.
inline std::vector<PhasePoint> sample_regular_phase_points(
    const StadiumTable& table, int count, std::uint64_t seed,
    double margin = 1e-4, double h = 1e-5) {
  const double per = table.perimeter();
  const double pi = std::numbers::pi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick_r(0.0, per);
  std::uniform_real_distribution<double> pick_phi(-1.2, 1.2);

  const auto comfortable = [&](const PhasePoint& q) {
    try {
      const auto next = step(table, q).next;
      for (double corner : table.corners())
        if (circular_distance(next.r, corner, per) < margin) return false;
      if (pi / 2 - std::abs(next.phi) < margin) return false;
    } catch (const SingularTrajectory&) {
      return false;
    }
    return true;
  };

  std::vector<PhasePoint> out;
  out.reserve(count);
  for (long attempt = 0; attempt < 1'000'000 && int(out.size()) < count;
       ++attempt) {
    const PhasePoint p{pick_r(rng), pick_phi(rng)};
    bool ok = true;
    for (double corner : table.corners())
      if (circular_distance(p.r, corner, per) < margin) ok = false;
    if (!ok) continue;
    const double wrap_lo = p.r - h < 0 ? p.r - h + per : p.r - h;
    const double wrap_hi = p.r + h >= per ? p.r + h - per : p.r + h;
    for (const PhasePoint& q :
         {p, PhasePoint{wrap_hi, p.phi}, PhasePoint{wrap_lo, p.phi},
          PhasePoint{p.r, p.phi + h}, PhasePoint{p.r, p.phi - h}})
      if (!comfortable(q)) {
        ok = false;
        break;
      }
    if (ok) out.push_back(p);
  }
  if (int(out.size()) < count)
    throw NumericError("could not sample enough regular phase points",
                       double(out.size()));
  return out;
}

}  // namespace stadium
