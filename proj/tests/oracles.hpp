#pragma once

// Test-only oracles, kept independent of the implementation paths they
// check: a dense ray-march next-collision solver, brute-force word and
// periodic-point counting by graph walks, and a plain bisection root finder.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "stadium/billiard_map.hpp"
#include "stadium/sft.hpp"

namespace oracles {

inline bool inside_stadium(const stadium::StadiumTable& table,
                           const Eigen::Vector2d& p) {
  const double half = table.ell / 2.0;
  if (std::abs(p.x()) <= half) return std::abs(p.y()) < 1.0;
  const double cx = p.x() > 0 ? half : -half;
  return (p - Eigen::Vector2d(cx, 0.0)).norm() < 1.0;
}

// Next-collision arc-length position found by marching along the ray until
// the point leaves the (convex) table and bisecting the exit time.
inline double ray_march_next_r(const stadium::StadiumTable& table,
                               const stadium::PhasePoint& p) {
  const Eigen::Vector2d q0 = stadium::boundary_point(table, p.r).first;
  const Eigen::Vector2d d = stadium::velocity(table, p);

  double t_in = 1e-9;
  if (!inside_stadium(table, q0 + t_in * d)) return p.r;  // grazing start
  double t_out = t_in;
  const double coarse = 0.01;
  while (inside_stadium(table, q0 + t_out * d)) {
    t_in = t_out;
    t_out += coarse;
    if (t_out > 100.0 * (table.ell + 2.0)) throw std::runtime_error("lost ray");
  }
  for (int it = 0; it < 200 && t_out - t_in > 1e-14; ++it) {
    const double mid = (t_in + t_out) / 2.0;
    (inside_stadium(table, q0 + mid * d) ? t_in : t_out) = mid;
  }
  Eigen::Vector2d hit = q0 + 0.5 * (t_in + t_out) * d;
  // project to the nearest boundary feature before inverting
  const double half = table.ell / 2.0;
  if (hit.x() > half) {
    hit = Eigen::Vector2d(half, 0) + (hit - Eigen::Vector2d(half, 0)).normalized();
  } else if (hit.x() < -half) {
    hit = Eigen::Vector2d(-half, 0) + (hit - Eigen::Vector2d(-half, 0)).normalized();
  } else {
    hit.y() = std::copysign(1.0, hit.y());
  }
  return stadium::arc_param(table, hit);
}

// Number of admissible symbol words of n symbols, by explicit DFS.
inline unsigned long long brute_count_words(const stadium::TransitionMatrix& m,
                                            int n) {
  const int size = m.size();
  unsigned long long total = 0;
  const std::function<void(int, int)> walk = [&](int state, int len) {
    if (len == n) {
      ++total;
      return;
    }
    for (int next = 0; next < size; ++next)
      if (m.at(state, next)) walk(next, len + 1);
  };
  for (int s = 0; s < size; ++s) walk(s, 1);
  return total;
}

// Number of period-n symbolic points (closed walks of length n), by DFS.
inline unsigned long long brute_count_periodic(const stadium::TransitionMatrix& m,
                                               int n) {
  const int size = m.size();
  unsigned long long total = 0;
  std::function<void(int, int, int)> walk = [&](int start, int state, int len) {
    if (len == n) {
      if (state == start) ++total;
      return;
    }
    for (int next = 0; next < size; ++next)
      if (m.at(state, next)) walk(start, next, len + 1);
  };
  for (int s = 0; s < size; ++s) walk(s, s, 0);
  return total;
}

// Largest root of a polynomial (coefficients highest-first) on [lo, hi],
// assuming a single sign change from negative to positive at the root.
inline double polynomial_largest_root(const std::vector<double>& coeffs,
                                      double lo, double hi) {
  const auto eval = [&](double x) {
    double v = 0.0;
    for (double c : coeffs) v = v * x + c;
    return v;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = (lo + hi) / 2.0;
    (eval(mid) < 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2.0;
}

// Incidence-vs-reflection mismatch (radians) at the arrival of a step,
// recomputed purely from collision positions.
inline double specular_residual(const stadium::StadiumTable& table,
                                const stadium::PhasePoint& p) {
  const auto outcome = stadium::step(table, p);
  const Eigen::Vector2d a = stadium::boundary_point(table, p.r).first;
  const Eigen::Vector2d b = stadium::boundary_point(table, outcome.next.r).first;
  const Eigen::Vector2d incoming = (b - a).normalized();
  const Eigen::Vector2d n = stadium::inward_normal(table, outcome.next.r);
  const Eigen::Vector2d reflected = incoming - 2.0 * incoming.dot(n) * n;
  const Eigen::Vector2d outgoing = stadium::velocity(table, outcome.next);
  return std::abs(std::atan2(
      reflected.x() * outgoing.y() - reflected.y() * outgoing.x(),
      reflected.dot(outgoing)));
}

}  // namespace oracles
