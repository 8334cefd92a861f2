#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "stadium/coding.hpp"

// Constructive realization of admissible Levels words as billiard orbits.
// The stadium is unfolded across its straight segments: copies are stacked
// vertically so that level k occupies y in (2k-1, 2k+1) and carries unit
// semicircles centered at (-ell/2, 2k) and (ell/2, 2k).  A Levels word maps
// to a sequence of semicircle copies (alternating sides); the orbit is the
// polyline through those copies whose length is maximal when the endpoints
// are pinned at the semicircle midpoints.  At the maximum every interior
// point satisfies the specular reflection law, which is what the certificate
// checks.

namespace stadium {

/// Reflection-law tolerance for a passing certificate (radians).
inline constexpr double kCertificateResidualTol = 1e-9;

enum class Side { Left, Right };

inline const char* to_string(Side s) { return s == Side::Left ? "Left" : "Right"; }

struct UnfoldedSemicircleSpec {
  Side side;
  int level;
  bool operator==(const UnfoldedSemicircleSpec&) const = default;
};

inline Eigen::Vector2d semicircle_center(const StadiumTable& table,
                                         const UnfoldedSemicircleSpec& spec) {
  const double x = (spec.side == Side::Right ? 1.0 : -1.0) * table.ell / 2.0;
  return {x, 2.0 * spec.level};
}

/// Point on an unfolded semicircle at arc argument alpha in [-pi/2, pi/2]
/// (alpha = 0 at the apex, i.e. the midpoint of the semicircular arc).
inline Eigen::Vector2d semicircle_point(const StadiumTable& table,
                                        const UnfoldedSemicircleSpec& spec,
                                        double alpha) {
  const double s = spec.side == Side::Right ? 1.0 : -1.0;
  return semicircle_center(table, spec) +
         Eigen::Vector2d(s * std::cos(alpha), std::sin(alpha));
}

struct UnfoldedPolyline {
  std::vector<Eigen::Vector2d> points;
  std::vector<UnfoldedSemicircleSpec> specs;
  std::vector<double> arc_args;  // alpha of each point on its semicircle

  double total_length() const {
    double total = 0.0;
    for (size_t i = 0; i + 1 < points.size(); ++i)
      total += (points[i + 1] - points[i]).norm();
    return total;
  }
};

/// Semicircle copies visited by a zero-delimited, grammar-valid Levels word:
/// one per 0 symbol, sides alternating starting at (Left, 0).  A block of m
/// segment symbols is one straight chord crossing m level lines; whether a
/// positive (top-first) block climbs or descends depends on the orientation
/// of the current copy, which flips with every reflection.  From an even
/// level a positive block goes up; from an odd level the copy is mirrored
/// and the same block goes down.
inline std::vector<UnfoldedSemicircleSpec> unfold_word(const SymbolWord& word) {
  if (word.alphabet != Alphabet::Levels)
    throw DomainError("unfold_word expects a Levels word");
  if (const auto bad = grammar_violation(word))
    throw GrammarError("word violates the level-subshift grammar", *bad);
  if (word.symbols.empty() || word.symbols.front() != 0)
    throw GrammarError("word must start with 0", 0);
  if (word.symbols.back() != 0)
    throw GrammarError("word must end with 0", word.size() - 1);

  std::vector<UnfoldedSemicircleSpec> specs;
  int level = 0;
  Side side = Side::Left;
  int i = 0;
  while (i < word.size()) {
    if (word.symbols[i] == 0) {
      specs.push_back({side, level});
      side = (side == Side::Left) ? Side::Right : Side::Left;
      ++i;
      continue;
    }
    int j = i;
    while (j < word.size() && word.symbols[j] != 0) ++j;
    const int block_sign = word.symbols[i] > 0 ? +1 : -1;
    const int orientation = (level % 2 == 0) ? +1 : -1;
    level += block_sign * orientation * (j - i);
    i = j;
  }
  return specs;
}

/// Extend a grammar-valid word so it starts and ends with 0: a leading
/// partial block (m, m+1, ...) is completed downward and prefixed with 0, a
/// trailing one is closed by appending 0.
inline SymbolWord zero_delimit(const SymbolWord& word) {
  if (word.alphabet != Alphabet::Levels)
    throw DomainError("zero_delimit expects a Levels word");
  if (word.symbols.empty()) throw DomainError("word must be nonempty");
  if (const auto bad = grammar_violation(word))
    throw GrammarError("word violates the level-subshift grammar", *bad);
  std::vector<int> symbols;
  const int first = word.symbols.front();
  if (first != 0) {
    symbols.push_back(0);
    const int sign = first > 0 ? +1 : -1;
    for (int v = 1; v < std::abs(first); ++v) symbols.push_back(sign * v);
  }
  symbols.insert(symbols.end(), word.symbols.begin(), word.symbols.end());
  if (symbols.back() != 0) symbols.push_back(0);
  if (symbols.size() < 2) symbols.push_back(0);  // lone "0" carries no flight
  return SymbolWord::levels(std::move(symbols), word.level_cap);
}

struct AscentTrace {
  std::vector<double> lengths;  // total length after each sweep
  int sweeps = 0;
  double final_residual = 0.0;
  double final_movement = 0.0;
};

namespace detail {

struct ArcObjective {
  Eigen::Vector2d center;
  double s;  // +1 right, -1 left
  Eigen::Vector2d a, b;

  Eigen::Vector2d point(double alpha) const {
    return center + Eigen::Vector2d(s * std::cos(alpha), std::sin(alpha));
  }
  double value(double alpha) const {
    const Eigen::Vector2d p = point(alpha);
    return (p - a).norm() + (p - b).norm();
  }
  // d(value)/d(alpha)
  double slope(double alpha) const {
    const Eigen::Vector2d p = point(alpha);
    const Eigen::Vector2d t(-s * std::sin(alpha), std::cos(alpha));
    return t.dot((p - a).normalized() + (p - b).normalized());
  }
};

inline constexpr double kAlphaLimit = 1.5607;  // just inside (-pi/2, pi/2)

inline double golden_section_max(const ArcObjective& obj, double lo, double hi) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = obj.value(x1), f2 = obj.value(x2);
  for (int it = 0; it < 90 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = obj.value(x2);
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = obj.value(x1);
    }
  }
  return (lo + hi) / 2;
}

inline double newton_polish(const ArcObjective& obj, double alpha) {
  constexpr double h = 1e-6;
  for (int it = 0; it < 40; ++it) {
    const double g = obj.slope(alpha);
    const double gp = (obj.slope(alpha + h) - obj.slope(alpha - h)) / (2 * h);
    if (!(gp < 0)) break;  // keep only strict local maxima
    double next = alpha - g / gp;
    next = std::clamp(next, -kAlphaLimit, kAlphaLimit);
    if (std::abs(next - alpha) < 1e-15) return next;
    alpha = next;
  }
  return alpha;
}

inline double maximize_on_arc(const ArcObjective& obj, double alpha_hint,
                              bool use_grid) {
  double candidate = alpha_hint;
  if (use_grid) {
    constexpr int kGrid = 49;
    double best = -std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k < kGrid; ++k) {
      const double alpha = -kAlphaLimit + 2 * kAlphaLimit * k / (kGrid - 1);
      const double v = obj.value(alpha);
      if (v > best) {
        best = v;
        best_k = k;
      }
    }
    const double step = 2 * kAlphaLimit / (kGrid - 1);
    const double lo = std::max(-kAlphaLimit, -kAlphaLimit + (best_k - 1) * step);
    const double hi = std::min(kAlphaLimit, -kAlphaLimit + (best_k + 1) * step);
    candidate = golden_section_max(obj, lo, hi);
  }
  return newton_polish(obj, candidate);
}

// Angle between the outgoing direction and the specular reflection of the
// incoming one, at interior point i.
inline double reflection_residual(const StadiumTable& table,
                                  const UnfoldedPolyline& poly, size_t i) {
  const Eigen::Vector2d n =
      (poly.points[i] - semicircle_center(table, poly.specs[i])).normalized();
  const Eigen::Vector2d v_in = (poly.points[i] - poly.points[i - 1]).normalized();
  const Eigen::Vector2d v_out = (poly.points[i + 1] - poly.points[i]).normalized();
  const Eigen::Vector2d expected = v_in - 2.0 * v_in.dot(n) * n;
  return std::abs(std::atan2(expected.x() * v_out.y() - expected.y() * v_out.x(),
                             expected.dot(v_out)));
}

}  // namespace detail

/// Longest polyline through the prescribed semicircle copies with the first
/// and last point pinned at the midpoints: cyclic coordinate ascent, one
/// golden-section/Newton maximization per interior point per sweep.  The
/// total length never decreases across updates; a decrease beyond rounding
/// aborts with NumericError.  Converged when no interior point moves more
/// than 1e-12 or every reflection residual is below tol.
inline UnfoldedPolyline maximize_length(const StadiumTable& table,
                                        const std::vector<UnfoldedSemicircleSpec>& specs,
                                        double tol = 1e-10,
                                        AscentTrace* trace = nullptr) {
  if (specs.size() < 2)
    throw DomainError("need at least two semicircle copies");
  int max_diff = 0;
  for (size_t i = 0; i + 1 < specs.size(); ++i) {
    if (specs[i].side == specs[i + 1].side)
      throw DomainError("consecutive semicircle copies must alternate sides");
    max_diff = std::max(max_diff, std::abs(specs[i + 1].level - specs[i].level));
  }
  if (!(table.ell > 2.0 * max_diff + 2.0))
    throw DomainError("table too short for the requested level jumps");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");

  const size_t n = specs.size();
  UnfoldedPolyline poly;
  poly.specs = specs;
  poly.arc_args.assign(n, 0.0);
  poly.points.resize(n);
  poly.points.front() = semicircle_point(table, specs.front(), 0.0);
  poly.points.back() = semicircle_point(table, specs.back(), 0.0);

  // Start interior points facing the chord between the pinned endpoints.
  const Eigen::Vector2d chord_a = poly.points.front();
  const Eigen::Vector2d chord_d = poly.points.back() - chord_a;
  const double chord_len2 = chord_d.squaredNorm();
  for (size_t i = 1; i + 1 < n; ++i) {
    const Eigen::Vector2d c = semicircle_center(table, specs[i]);
    double t = chord_len2 > 0 ? chord_d.dot(c - chord_a) / chord_len2 : 0.0;
    const Eigen::Vector2d foot = chord_a + std::clamp(t, 0.0, 1.0) * chord_d;
    const Eigen::Vector2d dir = foot - c;
    const double s = specs[i].side == Side::Right ? 1.0 : -1.0;
    double alpha = (dir.norm() < 1e-12) ? 0.0 : std::atan2(dir.y(), s * dir.x());
    poly.arc_args[i] = std::clamp(alpha, -1.4, 1.4);
    poly.points[i] = semicircle_point(table, specs[i], poly.arc_args[i]);
  }

  const auto residual_max = [&]() {
    double worst = 0.0;
    for (size_t i = 1; i + 1 < n; ++i)
      worst = std::max(worst, detail::reflection_residual(table, poly, i));
    return worst;
  };

  constexpr int kMaxSweeps = 100'000;
  double movement = 0.0, residual = residual_max();
  if (trace) trace->lengths.push_back(poly.total_length());
  int sweep = 0;
  for (; sweep < kMaxSweeps && n > 2; ++sweep) {
    if (residual < tol) break;
    movement = 0.0;
    for (size_t i = 1; i + 1 < n; ++i) {
      detail::ArcObjective obj{semicircle_center(table, poly.specs[i]),
                               poly.specs[i].side == Side::Right ? 1.0 : -1.0,
                               poly.points[i - 1], poly.points[i + 1]};
      const double before = obj.value(poly.arc_args[i]);
      const double slope_before = std::abs(obj.slope(poly.arc_args[i]));
      // Near the maximum the length is quadratically flat, so value
      // comparisons bottom out around sqrt(eps); the slope stays informative.
      const double value_noise = 1e-13 * (1.0 + before);

      double alpha = detail::maximize_on_arc(obj, poly.arc_args[i], sweep == 0);
      double after = obj.value(alpha);
      double slope_after = std::abs(obj.slope(alpha));
      if (after < before - value_noise) {  // wandered off; retry from a scan
        alpha = detail::maximize_on_arc(obj, poly.arc_args[i], true);
        after = obj.value(alpha);
        slope_after = std::abs(obj.slope(alpha));
      }
      if (after < before - 1e-9 * (1.0 + before))
        throw NumericError("coordinate ascent lost monotonicity", before - after);
      if (after > before + value_noise ||
          (after >= before - value_noise && slope_after < slope_before)) {
        movement = std::max(movement, std::abs(alpha - poly.arc_args[i]));
        poly.arc_args[i] = alpha;
        poly.points[i] = semicircle_point(table, poly.specs[i], alpha);
      }
    }
    residual = residual_max();
    if (trace) trace->lengths.push_back(poly.total_length());
    if (movement < 1e-12) break;
  }

  if (trace) {
    trace->sweeps = sweep;
    trace->final_residual = residual;
    trace->final_movement = movement;
  }
  if (n > 2 && residual >= tol && movement >= 1e-12)
    throw NumericError("length maximization did not converge", residual);
  return poly;
}

struct OrbitCertificate {
  double max_reflection_residual = 0.0;
  double max_abs_arc_argument = 0.0;
  double endpoint_clearance = 0.0;
  bool extra_intersection_found = false;
  double curvature_margin = 0.0;
  double total_length = 0.0;

  bool passes() const {
    return max_reflection_residual < kCertificateResidualTol &&
           max_abs_arc_argument < std::numbers::pi / 4.0 &&
           !extra_intersection_found && curvature_margin > 0.0;
  }
};

/// Checks the three properties that make a maximal polyline a genuine orbit
/// piece: the reflection law at interior points, arc arguments below pi/4
/// (hence clearance from the semicircle endpoints), and no stray
/// intersection of any chord with any semicircle copy.  The curvature margin
/// 1 - ell / (ell^2 - (2N+1)^2) is the slack in the ellipse-curvature
/// comparison that makes the maximum a strict one.
inline OrbitCertificate certify(const StadiumTable& table,
                                const UnfoldedPolyline& poly, int N) {
  if (poly.points.size() != poly.specs.size() ||
      poly.points.size() != poly.arc_args.size() || poly.points.size() < 2)
    throw DomainError("malformed polyline");

  OrbitCertificate cert;
  cert.total_length = poly.total_length();

  const double denom = table.ell * table.ell - double(2 * N + 1) * (2 * N + 1);
  cert.curvature_margin = denom > 0 ? 1.0 - table.ell / denom : -1.0;

  const size_t n = poly.points.size();
  for (size_t i = 1; i + 1 < n; ++i)
    cert.max_reflection_residual = std::max(
        cert.max_reflection_residual, detail::reflection_residual(table, poly, i));

  cert.endpoint_clearance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    cert.max_abs_arc_argument =
        std::max(cert.max_abs_arc_argument, std::abs(poly.arc_args[i]));
    const Eigen::Vector2d c = semicircle_center(table, poly.specs[i]);
    const double to_top = (poly.points[i] - (c + Eigen::Vector2d(0, 1))).norm();
    const double to_bottom = (poly.points[i] - (c - Eigen::Vector2d(0, 1))).norm();
    cert.endpoint_clearance =
        std::min({cert.endpoint_clearance, to_top, to_bottom});
  }

  // Scan every chord against every semicircle copy the polyline could reach.
  int lo_level = poly.specs.front().level, hi_level = lo_level;
  for (const auto& s : poly.specs) {
    lo_level = std::min(lo_level, s.level);
    hi_level = std::max(hi_level, s.level);
  }
  for (size_t i = 0; i + 1 < n && !cert.extra_intersection_found; ++i) {
    const Eigen::Vector2d p0 = poly.points[i];
    const Eigen::Vector2d delta = poly.points[i + 1] - p0;
    const double a = delta.squaredNorm();
    for (int level = lo_level - 1; level <= hi_level + 1; ++level) {
      for (Side side : {Side::Left, Side::Right}) {
        const UnfoldedSemicircleSpec spec{side, level};
        const Eigen::Vector2d c = semicircle_center(table, spec);
        const Eigen::Vector2d u = p0 - c;
        const double b = delta.dot(u);
        const double cc = u.squaredNorm() - 1.0;
        const double disc = b * b - a * cc;
        if (disc < 0) continue;
        const double sq = std::sqrt(disc);
        for (double t : {(-b - sq) / a, (-b + sq) / a}) {
          if (t < 0.0 || t > 1.0) continue;
          const Eigen::Vector2d q = p0 + t * delta;
          const double sgn = side == Side::Right ? 1.0 : -1.0;
          if (sgn * (q.x() - c.x()) < -1e-12) continue;  // inner half
          if ((q - poly.points[i]).norm() < 1e-9) continue;
          if ((q - poly.points[i + 1]).norm() < 1e-9) continue;
          cert.extra_intersection_found = true;
        }
      }
    }
  }
  return cert;
}

/// Phase point at the first polyline vertex: the first semicircle copy is at
/// level 0 on the left, where unfolded coordinates coincide with the table's.
inline PhasePoint fold_to_phase_point(const StadiumTable& table,
                                      const UnfoldedPolyline& poly) {
  if (poly.points.size() < 2) throw DomainError("polyline too short");
  if (poly.specs.front().side != Side::Left || poly.specs.front().level != 0)
    throw DomainError("polyline must start on the left semicircle at level 0");
  const double r = arc_param(table, poly.points.front());
  const Eigen::Vector2d d = (poly.points[1] - poly.points[0]).normalized();
  const Eigen::Vector2d nrm = inward_normal(table, r);
  const double phi = std::atan2(cross2<double>(nrm, d), nrm.dot(d));
  return {r, phi};
}

/// Unfolded positions of the first n+1 collisions of the orbit of p: segment
/// reflections become straight-line continuations.
inline std::vector<Eigen::Vector2d> unfold_trajectory(const StadiumTable& table,
                                                      const PhasePoint& p,
                                                      int n) {
  const auto points = trajectory(table, p, n);
  std::vector<Eigen::Vector2d> out;
  out.reserve(points.size());
  double offset = 0.0, sign = 1.0;
  for (const auto& q : points) {
    const auto [pos, piece] = boundary_point(table, q.r);
    out.emplace_back(pos.x(), offset + sign * pos.y());
    if (piece == BoundaryPiece::TopSegment) {
      offset += 2.0 * sign;
      sign = -sign;
    } else if (piece == BoundaryPiece::BottomSegment) {
      offset -= 2.0 * sign;
      sign = -sign;
    }
  }
  return out;
}

struct RealizedOrbit {
  SymbolWord word;  // the realized (zero-delimited) word
  PhasePoint start;
  OrbitCertificate certificate;
  UnfoldedPolyline polyline;
};

/// Realize a grammar-valid Levels word as a billiard orbit: unfold, maximize
/// the polyline length, certify, fold back, and verify that the simulated
/// itinerary recodes to the word.  Requires ell > 2N + 2.
inline RealizedOrbit realize_word(const StadiumTable& table,
                                  const SymbolWord& word, int N,
                                  double tol = 1e-10) {
  if (N < 1) throw DomainError("level cap must be at least 1");
  if (!(table.ell > 2.0 * N + 2.0))
    throw DomainError("realization requires ell > 2N + 2");
  if (word.alphabet != Alphabet::Levels)
    throw DomainError("realize_word expects a Levels word");
  if (word.level_cap != N)
    throw DomainError("word level cap does not match N");

  const SymbolWord normalized = zero_delimit(word);
  const auto specs = unfold_word(normalized);
  const UnfoldedPolyline poly = maximize_length(table, specs, tol);
  const OrbitCertificate cert = certify(table, poly, N);
  const PhasePoint start = fold_to_phase_point(table, poly);

  if (cert.passes()) {
    try {
      const SymbolWord traced = recode_levels(
          to_three(itinerary(table, start, normalized.size() - 1, Alphabet::Four)),
          N);
      if (traced.symbols != normalized.symbols)
        throw NumericError("realized orbit does not reproduce the word",
                           cert.max_reflection_residual);
    } catch (const SingularTrajectory&) {
      throw NumericError("realized orbit hit the singular set",
                         cert.max_reflection_residual);
    } catch (const CodingError&) {
      throw NumericError("realized orbit does not reproduce the word",
                         cert.max_reflection_residual);
    }
  }
  return {normalized, start, cert, poly};
}

}  // namespace stadium
