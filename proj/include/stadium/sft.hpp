#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "stadium/errors.hpp"

// Subshifts of finite type behind the stadium codings, and four routes to
// their topological entropy: Perron root by power iteration, closed-form
// characteristic polynomials for sizes <= 3, the rome first-return-path
// reduction, and the closed-form equation x^2 - 2x - 1 + 2x^(1-K) = 0 for the
// level subshifts.

namespace stadium {

/// Growth-rate constant 1 + sqrt(2), the Perron root of x^2 - 2x - 1.
inline const double kSilverRatio = 1.0 + std::numbers::sqrt2;

/// Square 0/1 matrix of allowed one-step transitions.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Eigen::MatrixXi entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
      throw DomainError("transition matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
      for (Eigen::Index j = 0; j < m_.cols(); ++j)
        if (m_(i, j) != 0 && m_(i, j) != 1)
          throw DomainError("transition matrix entries must be 0 or 1");
  }

  int size() const { return static_cast<int>(m_.rows()); }
  int at(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXi& entries() const { return m_; }

  /// True when some row or column is identically zero.
  bool has_stranded_state() const {
    for (int i = 0; i < size(); ++i)
      if (m_.row(i).sum() == 0 || m_.col(i).sum() == 0) return true;
    return false;
  }

 private:
  Eigen::MatrixXi m_;
};

/// Transition matrix of the three-state coding {0, A, B}: the only forbidden
/// transitions are A -> A and B -> B.
inline TransitionMatrix matrix_sigma_prime() {
  Eigen::MatrixXi m(3, 3);
  // states ordered 0, A, B
  m << 1, 1, 1,
       1, 0, 1,
       1, 1, 0;
  return TransitionMatrix(m);
}

/// Transition matrix of the level subshift with states -N..N (row/column
/// index = level + N): 0 -> {-1, 0, 1}; i -> {i+1, 0} for 1 <= i < N;
/// N -> {0}; mirrored for negative levels.  N = 0 yields the single-state
/// full shift [1].
inline TransitionMatrix matrix_sigma_tilde(int N) {
  if (N < 0) throw DomainError("level cap must be nonnegative");
  const int size = 2 * N + 1;
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(size, size);
  const auto idx = [N](int level) { return level + N; };
  m(idx(0), idx(0)) = 1;
  if (N >= 1) {
    m(idx(0), idx(1)) = 1;
    m(idx(0), idx(-1)) = 1;
  }
  for (int i = 1; i <= N; ++i) {
    m(idx(i), idx(0)) = 1;
    m(idx(-i), idx(0)) = 1;
    if (i < N) {
      m(idx(i), idx(i + 1)) = 1;
      m(idx(-i), idx(-i - 1)) = 1;
    }
  }
  return TransitionMatrix(m);
}

enum class EntropyMethod { PowerIteration, CharPoly, Rome, ClosedForm };

inline const char* to_string(EntropyMethod m) {
  switch (m) {
    case EntropyMethod::PowerIteration: return "PowerIteration";
    case EntropyMethod::CharPoly: return "CharPoly";
    case EntropyMethod::Rome: return "Rome";
    case EntropyMethod::ClosedForm: return "ClosedForm";
  }
  return "?";
}

struct EntropyResult {
  double spectral_radius = 0.0;
  double entropy = 0.0;  // log(spectral_radius)
  EntropyMethod method = EntropyMethod::PowerIteration;
  double residual = 0.0;

  static EntropyResult make(double rho, EntropyMethod method, double residual) {
    return {rho, std::log(rho), method, residual};
  }
};

namespace detail {

// Largest real root of the monic cubic x^3 + a x^2 + b x + c (must exist).
inline double cubic_largest_real_root(double a, double b, double c) {
  // depressed cubic y^3 + p y + q with x = y - a/3
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  double y;
  if (disc > 0) {
    const double s = std::sqrt(disc);
    y = std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s);
  } else if (p == 0.0) {
    y = std::cbrt(-q);
  } else {
    const double rr = std::sqrt(-p * p * p / 27.0);
    const double phi = std::acos(std::clamp(-q / (2.0 * rr), -1.0, 1.0));
    const double mag = 2.0 * std::sqrt(-p / 3.0);
    y = mag * std::cos(phi / 3.0);  // largest of the three real roots
  }
  double x = y - a / 3.0;
  for (int it = 0; it < 8; ++it) {  // Newton polish
    const double f = ((x + a) * x + b) * x + c;
    const double df = (3.0 * x + 2.0 * a) * x + b;
    if (df == 0.0) break;
    const double nx = x - f / df;
    if (nx == x) break;
    x = nx;
  }
  return x;
}

inline double charpoly_largest_root(const Eigen::MatrixXi& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 1) return static_cast<double>(m(0, 0));
  if (n == 2) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::max(0.0, tr * tr - 4.0 * det);
    return (tr + std::sqrt(disc)) / 2.0;
  }
  // det(xI - M) = x^3 - tr x^2 + c1 x - det
  const Eigen::Matrix3i mm = m.topLeftCorner<3, 3>();
  const int tr = mm.trace();
  const int c1 = (mm(0, 0) * mm(1, 1) - mm(0, 1) * mm(1, 0)) +
                 (mm(0, 0) * mm(2, 2) - mm(0, 2) * mm(2, 0)) +
                 (mm(1, 1) * mm(2, 2) - mm(1, 2) * mm(2, 1));
  const int det = mm(0, 0) * (mm(1, 1) * mm(2, 2) - mm(1, 2) * mm(2, 1)) -
                  mm(0, 1) * (mm(1, 0) * mm(2, 2) - mm(1, 2) * mm(2, 0)) +
                  mm(0, 2) * (mm(1, 0) * mm(2, 1) - mm(1, 1) * mm(2, 0));
  return cubic_largest_real_root(-tr, c1, -det);
}

}  // namespace detail

/// Integer coefficients of det(xI - M) for size <= 3, highest power first.
inline std::vector<long long> charpoly_coefficients(const TransitionMatrix& M) {
  const auto& m = M.entries();
  const int n = M.size();
  if (n > 3) throw DomainError("charpoly_coefficients supports size <= 3 only");
  if (n == 1) return {1, -m(0, 0)};
  if (n == 2)
    return {1, -(m(0, 0) + m(1, 1)),
            static_cast<long long>(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0))};
  const Eigen::Matrix3i mm = m.topLeftCorner<3, 3>();
  const long long tr = mm.trace();
  const long long c1 = (mm(0, 0) * mm(1, 1) - mm(0, 1) * mm(1, 0)) +
                       (mm(0, 0) * mm(2, 2) - mm(0, 2) * mm(2, 0)) +
                       (mm(1, 1) * mm(2, 2) - mm(1, 2) * mm(2, 1));
  const long long det =
      mm(0, 0) * (mm(1, 1) * mm(2, 2) - mm(1, 2) * mm(2, 1)) -
      mm(0, 1) * (mm(1, 0) * mm(2, 2) - mm(1, 2) * mm(2, 0)) +
      mm(0, 2) * (mm(1, 0) * mm(2, 1) - mm(1, 1) * mm(2, 0));
  return {1, -tr, c1, -det};
}

/// Perron root of a 0/1 transition matrix: closed-form characteristic
/// polynomial for size <= 3, otherwise power iteration on M + I (the shift
/// suppresses sign oscillation from period-2 structure).
inline EntropyResult spectral_radius(const TransitionMatrix& M,
                                     double tol = 1e-12) {
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  if (M.has_stranded_state())
    throw DomainError("matrix has a stranded state (zero row or column)");
  const int n = M.size();
  if (n <= 3) {
    const double rho = detail::charpoly_largest_root(M.entries());
    double res = 0.0;
    {  // residual of the characteristic polynomial at the root
      const auto c = charpoly_coefficients(M);
      double v = 0.0;
      for (long long ck : c) v = v * rho + static_cast<double>(ck);
      res = std::abs(v);
    }
    return EntropyResult::make(rho, EntropyMethod::CharPoly, res);
  }

  const Eigen::MatrixXd A = M.entries().cast<double>();
  const Eigen::MatrixXd B = A + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double mu = 0.0;
  bool converged = false;
  double res = std::numeric_limits<double>::infinity();
  constexpr long kMaxIterations = 1'000'000;
  for (long it = 0; it < kMaxIterations; ++it) {
    const Eigen::VectorXd w = B * v;
    mu = v.dot(w);  // Rayleigh quotient of B
    res = (w - mu * v).lpNorm<Eigen::Infinity>();
    v = w.normalized();
    if (res < 0.1 * tol * std::max(1.0, mu)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericError("power iteration did not converge", res);
  const double rho = mu - 1.0;
  const double residual = (A * v - rho * v).lpNorm<Eigen::Infinity>();
  return EntropyResult::make(rho, EntropyMethod::PowerIteration, residual);
}

/// First-return decomposition with respect to a rome (a set of states met by
/// every cycle): the multiset of edge-lengths of all paths that start and end
/// in the rome and avoid it in between.
struct RomeReduction {
  std::vector<int> rome;
  std::vector<int> path_lengths;  // sorted ascending
};

inline RomeReduction rome_reduce(const TransitionMatrix& M,
                                 std::vector<int> rome) {
  const int n = M.size();
  if (rome.empty()) throw DomainError("rome must be nonempty");
  std::vector<char> in_rome(n, 0);
  for (int s : rome) {
    if (s < 0 || s >= n) throw DomainError("rome state out of range");
    in_rome[s] = 1;
  }

  // Every cycle must meet the rome, i.e. the induced subgraph on the
  // complement is acyclic.
  {
    std::vector<int> color(n, 0);  // 0 white, 1 gray, 2 black
    const std::function<void(int)> dfs = [&](int u) {
      color[u] = 1;
      for (int w = 0; w < n; ++w) {
        if (!M.at(u, w) || in_rome[w]) continue;
        if (color[w] == 1)
          throw StructuralError("a cycle avoids the rome; path family is infinite");
        if (color[w] == 0) dfs(w);
      }
      color[u] = 2;
    };
    for (int u = 0; u < n; ++u)
      if (!in_rome[u] && color[u] == 0) dfs(u);
  }

  std::vector<int> lengths;
  constexpr size_t kMaxPaths = 10'000'000;
  const std::function<void(int, int)> walk = [&](int u, int len) {
    for (int w = 0; w < n; ++w) {
      if (!M.at(u, w)) continue;
      if (in_rome[w]) {
        lengths.push_back(len + 1);
        if (lengths.size() > kMaxPaths)
          throw NumericError("rome path family too large", double(lengths.size()));
      } else {
        walk(w, len + 1);
      }
    }
  };
  for (int s : rome) walk(s, 0);

  std::sort(lengths.begin(), lengths.end());
  std::sort(rome.begin(), rome.end());
  return {std::move(rome), std::move(lengths)};
}

namespace detail {

// Bisection for a strictly decreasing f with f(lo) >= 0 on [lo, hi];
// hi is grown until f(hi) < 0.
template <typename F>
double decreasing_root(F&& f, double lo, double hi, double tol) {
  while (f(hi) >= 0) {
    lo = hi;
    hi *= 2;
    if (hi > 1e18) throw NumericError("root bracket expansion failed", hi);
  }
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = lo + (hi - lo) / 2;
    (f(mid) >= 0 ? lo : hi) = mid;
  }
  return lo + (hi - lo) / 2;
}

}  // namespace detail

/// Largest zero of sum_i x^(-p_i) - 1 over the first-return path lengths;
/// this equals the Perron root of the reduced matrix.  The function is
/// strictly decreasing for x > 0, so the zero is found by bisection.
inline EntropyResult rome_root(const RomeReduction& reduction,
                               double tol = 1e-13) {
  if (reduction.path_lengths.empty())
    throw DomainError("rome reduction has no paths");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const auto f = [&](double x) {
    double s = -1.0;
    for (int p : reduction.path_lengths) s += std::pow(x, -double(p));
    return s;
  };
  // f(1) = (#paths - 1) >= 0, so the zero is >= 1.
  const double rho = detail::decreasing_root(f, 1.0, 4.0, tol);
  return EntropyResult::make(rho, EntropyMethod::Rome, std::abs(f(rho)));
}

/// Largest real root of x^2 - 2x - 1 + 2 x^(1-K) = 0 for K >= 1, i.e. the
/// zero of the equivalent decreasing function
///   1/x + 2 * sum_{p=2..K} x^(-p) - 1.
/// Roots increase with K toward 1 + sqrt(2); K = 1 gives exactly 1.
inline EntropyResult eq0_root(int K, double tol = 1e-13) {
  if (K < 1) throw DomainError("eq0_root requires K >= 1");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const auto f = [K](double x) {
    const double u = 1.0 / x;
    // u + 2 * (u^2 + ... + u^K) - 1, with the geometric sum in closed form
    return u + 2.0 * (u * u - std::pow(u, double(K + 1))) / (1.0 - u) - 1.0;
  };
  const double lo = 1.0 + 1e-12;
  double rho;
  if (f(lo) <= 0) {
    rho = 1.0;  // K = 1: the root is exactly 1 (double root of (x-1)^2)
  } else {
    rho = detail::decreasing_root(f, lo, kSilverRatio + 1e-9, tol);
  }
  const double poly = rho * rho - 2.0 * rho - 1.0 + 2.0 * std::pow(rho, 1.0 - K);
  return EntropyResult::make(rho, EntropyMethod::ClosedForm, std::abs(poly));
}

/// Wide accumulator for word counts; enough for every admissible matrix here
/// up to n = 64.
using WordCount = unsigned __int128;

inline std::string to_string(WordCount v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s += char('0' + int(v % 10));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

namespace detail {

using BigMatrix = std::vector<WordCount>;  // row-major n x n

inline BigMatrix big_multiply(const BigMatrix& a, const BigMatrix& b, int n) {
  BigMatrix out(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const WordCount aik = a[i * n + k];
      if (aik == 0) continue;
      for (int j = 0; j < n; ++j) {
        WordCount prod, sum;
        if (__builtin_mul_overflow(aik, b[k * n + j], &prod) ||
            __builtin_add_overflow(out[i * n + j], prod, &sum))
          throw NumericError("word count overflow", 0.0);
        out[i * n + j] = sum;
      }
    }
  return out;
}

inline BigMatrix big_power(const TransitionMatrix& M, int e) {
  const int n = M.size();
  BigMatrix base(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) base[i * n + j] = WordCount(M.at(i, j));
  BigMatrix result(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) result[i * n + i] = 1;
  while (e > 0) {
    if (e & 1) result = big_multiply(result, base, n);
    e >>= 1;
    if (e > 0) base = big_multiply(base, base, n);
  }
  return result;
}

}  // namespace detail

/// Number of admissible words of n symbols (n-1 transitions): the sum of all
/// entries of M^(n-1).
inline WordCount count_words(const TransitionMatrix& M, int n) {
  if (n < 1) throw DomainError("word length must be at least 1");
  const auto power = detail::big_power(M, n - 1);
  WordCount total = 0;
  for (WordCount v : power)
    if (__builtin_add_overflow(total, v, &total))
      throw NumericError("word count overflow", 0.0);
  return total;
}

/// Number of period-n symbolic points: trace of M^n.
inline WordCount count_periodic(const TransitionMatrix& M, int n) {
  if (n < 1) throw DomainError("period must be at least 1");
  const auto power = detail::big_power(M, n);
  const int size = M.size();
  WordCount total = 0;
  for (int i = 0; i < size; ++i)
    if (__builtin_add_overflow(total, power[i * size + i], &total))
      throw NumericError("word count overflow", 0.0);
  return total;
}

/// Largest level cap certified for a table of straight length ell:
/// max{N >= 1 : ell > 2N + 2}, or 0 when none qualifies.
inline int max_certified_level_cap(double ell) {
  if (!(ell > 4.0)) return 0;
  int n = static_cast<int>(std::floor((ell - 2.0) / 2.0));
  while (n >= 1 && !(ell > 2.0 * n + 2.0)) --n;
  while (ell > 2.0 * (n + 1) + 2.0) ++n;
  return std::max(n, 0);
}

struct EntropyBound {
  int n_used = 0;
  EntropyResult result;
  bool nontrivial = false;  // false when only arc alternation is certified
};

/// Certified topological-entropy lower bound for the table of straight
/// length ell: the entropy of the level subshift at the largest admissible
/// cap.  Dense power iteration up to caps of 64; beyond that the Perron root
/// comes from the closed-form equation (the two agree to 1e-9, see tests).
inline EntropyBound entropy_lower_bound(double ell, int n_cap = 0,
                                        double tol = 1e-12) {
  if (!(ell > 0.0) || !std::isfinite(ell))
    throw DomainError("table length must be positive");
  int n = max_certified_level_cap(ell);
  if (n_cap > 0) n = std::min(n, n_cap);
  if (n < 1)
    return {0, spectral_radius(matrix_sigma_tilde(0), tol), false};
  constexpr int kDenseCap = 64;
  if (n <= kDenseCap)
    return {n, spectral_radius(matrix_sigma_tilde(n), tol), true};
  return {n, eq0_root(n + 1, tol), true};
}

}  // namespace stadium
