#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "stadium/errors.hpp"

// Stadium boundary geometry: a table made of two unit semicircles centered at
// (+-ell/2, 0) joined by straight segments at y = +-1.  The boundary is
// parametrized by arc length r in [0, 2*ell + 2*pi), with r = 0 at
// (ell/2, -1) and counterclockwise orientation:
//
//   RightArc      [0, pi)
//   TopSegment    [pi, pi + ell)
//   LeftArc       [pi + ell, 2*pi + ell)
//   BottomSegment [2*pi + ell, 2*pi + 2*ell)
//
// Functions are templated on the scalar; double is the working type, long
// double instantiations serve as cross-checks.

namespace stadium {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// Absolute tolerance for boundary membership.
inline constexpr double kBoundaryTol = 1e-9;

enum class BoundaryPiece : int {
  RightArc = 0,
  TopSegment = 1,
  LeftArc = 2,
  BottomSegment = 3,
};

inline const char* to_string(BoundaryPiece p) {
  switch (p) {
    case BoundaryPiece::RightArc: return "RightArc";
    case BoundaryPiece::TopSegment: return "TopSegment";
    case BoundaryPiece::LeftArc: return "LeftArc";
    case BoundaryPiece::BottomSegment: return "BottomSegment";
  }
  return "?";
}

inline bool is_arc(BoundaryPiece p) {
  return p == BoundaryPiece::RightArc || p == BoundaryPiece::LeftArc;
}

struct StadiumTable {
  double ell;

  explicit StadiumTable(double straight_length) : ell(straight_length) {
    if (!(ell > 0.0) || !std::isfinite(ell))
      throw DomainError("stadium straight-segment length must be positive");
  }

  double perimeter() const { return 2.0 * ell + 2.0 * std::numbers::pi; }

  /// Arc-length positions of the four arc/segment junctions.
  std::array<double, 4> corners() const {
    const double pi = std::numbers::pi;
    return {0.0, pi, pi + ell, 2.0 * pi + ell};
  }
};

/// Piece owning arc-length position r.  Piece boundaries are half-open, so
/// every junction belongs to exactly one piece.
template <typename Scalar>
BoundaryPiece piece_at(const StadiumTable& table, Scalar r) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar ell = static_cast<Scalar>(table.ell);
  if (!(r >= Scalar(0)) || !(r < 2 * pi + 2 * ell))
    throw DomainError("arc-length parameter out of range");
  if (r < pi) return BoundaryPiece::RightArc;
  if (r < pi + ell) return BoundaryPiece::TopSegment;
  if (r < 2 * pi + ell) return BoundaryPiece::LeftArc;
  return BoundaryPiece::BottomSegment;
}

template <typename Scalar>
Vec2<Scalar> arc_center(const StadiumTable& table, BoundaryPiece arc) {
  const Scalar half = static_cast<Scalar>(table.ell) / 2;
  if (arc == BoundaryPiece::RightArc) return Vec2<Scalar>(half, 0);
  if (arc == BoundaryPiece::LeftArc) return Vec2<Scalar>(-half, 0);
  throw DomainError("piece is not an arc");
}

template <typename Scalar>
std::pair<Vec2<Scalar>, BoundaryPiece> boundary_point(const StadiumTable& table,
                                                      Scalar r) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar ell = static_cast<Scalar>(table.ell);
  const Scalar half = ell / 2;
  const BoundaryPiece piece = piece_at(table, r);
  switch (piece) {
    case BoundaryPiece::RightArc: {
      const Scalar theta = r - pi / 2;  // polar angle about (ell/2, 0)
      return {Vec2<Scalar>(half + std::cos(theta), std::sin(theta)), piece};
    }
    case BoundaryPiece::TopSegment:
      return {Vec2<Scalar>(half - (r - pi), Scalar(1)), piece};
    case BoundaryPiece::LeftArc: {
      const Scalar theta = pi / 2 + (r - (pi + ell));
      return {Vec2<Scalar>(-half + std::cos(theta), std::sin(theta)), piece};
    }
    case BoundaryPiece::BottomSegment:
      return {Vec2<Scalar>(-half + (r - (2 * pi + ell)), Scalar(-1)), piece};
  }
  throw GeometryError("unreachable");
}

/// Inverse of boundary_point: arc-length position of a point that lies on the
/// boundary (within kBoundaryTol).
template <typename Scalar>
Scalar arc_param(const StadiumTable& table, const Vec2<Scalar>& p) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar ell = static_cast<Scalar>(table.ell);
  const Scalar half = ell / 2;
  const Scalar per = 2 * pi + 2 * ell;
  const Scalar tol = static_cast<Scalar>(kBoundaryTol);

  // Arcs first: the four junction points belong to arc formulas or segment
  // formulas consistently because results are wrapped into [0, per).
  if (p.x() >= half - tol) {
    const Vec2<Scalar> u = p - Vec2<Scalar>(half, 0);
    if (std::abs(u.norm() - 1) <= tol) {
      Scalar r = std::atan2(u.y(), u.x()) + pi / 2;  // theta + pi/2
      if (r >= per) r -= per;
      if (r < 0) r += per;
      return r;
    }
  }
  if (p.x() <= -half + tol) {
    const Vec2<Scalar> u = p + Vec2<Scalar>(half, 0);
    if (std::abs(u.norm() - 1) <= tol) {
      Scalar theta = std::atan2(u.y(), u.x());
      if (theta < 0) theta += 2 * pi;  // into [pi/2, 3*pi/2] on the left arc
      Scalar r = pi + ell + (theta - pi / 2);
      if (r >= per) r -= per;
      return r;
    }
  }
  if (std::abs(p.x()) <= half + tol) {
    const Scalar x = std::clamp(p.x(), -half, half);
    if (std::abs(p.y() - 1) <= tol) {
      return pi + (half - x);  // x = -half gives the left junction r = pi + ell
    }
    if (std::abs(p.y() + 1) <= tol) {
      Scalar r = 2 * pi + ell + (x + half);
      if (r >= per) r -= per;
      return r;
    }
  }
  throw GeometryError("point is not on the stadium boundary");
}

/// Unit normal pointing into the table interior.
template <typename Scalar>
Vec2<Scalar> inward_normal(const StadiumTable& table, Scalar r) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar ell = static_cast<Scalar>(table.ell);
  switch (piece_at(table, r)) {
    case BoundaryPiece::RightArc: {
      const Scalar theta = r - pi / 2;
      return Vec2<Scalar>(-std::cos(theta), -std::sin(theta));
    }
    case BoundaryPiece::TopSegment:
      return Vec2<Scalar>(0, -1);
    case BoundaryPiece::LeftArc: {
      const Scalar theta = pi / 2 + (r - (pi + ell));
      return Vec2<Scalar>(-std::cos(theta), -std::sin(theta));
    }
    case BoundaryPiece::BottomSegment:
      return Vec2<Scalar>(0, 1);
  }
  throw GeometryError("unreachable");
}

/// Polar angle of an arc point about its arc center, measured from the
/// outward horizontal axis of that arc (apex -> 0), in [-pi/2, pi/2].
/// Mirror symmetry x -> -x preserves the value; y -> -y negates it.
template <typename Scalar>
Scalar arc_argument(const StadiumTable& table, Scalar r) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar ell = static_cast<Scalar>(table.ell);
  switch (piece_at(table, r)) {
    case BoundaryPiece::RightArc:
      return r - pi / 2;
    case BoundaryPiece::LeftArc:
      return pi / 2 - (r - (pi + ell));
    default:
      throw DomainError("arc_argument: parameter lies on a straight segment");
  }
}

/// Counterclockwise rotation.
template <typename Scalar>
Vec2<Scalar> rotate(const Vec2<Scalar>& v, Scalar angle) {
  const Scalar c = std::cos(angle), s = std::sin(angle);
  return Vec2<Scalar>(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

template <typename Scalar>
Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Distance between arc-length positions on the closed boundary.
template <typename Scalar>
Scalar circular_distance(Scalar a, Scalar b, Scalar period) {
  Scalar d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

}  // namespace stadium
