#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stadium/billiard_map.hpp"

// Symbolic itineraries and the factor maps between alphabets.
//
//   Four   0 RightArc, 1 TopSegment, 2 LeftArc, 3 BottomSegment
//   Six    0 RightArc+, 1 RightArc-, 2 TopSegment,
//          3 LeftArc+,  4 LeftArc-,  5 BottomSegment   (sign of phi on arcs)
//   Three  0 arc, 1 A (top), 2 B (bottom)
//   Levels 0 arc; a maximal run of m segment symbols becomes 1..m when it
//          starts at the top and -1..-m when it starts at the bottom.
//
// Levels words live in the subshift with states -N..N and transitions
// 0 -> {-1, 0, 1},  i -> {i+1, 0} for 1 <= i < N,  N -> {0}  (mirrored for
// negative states).

namespace stadium {

enum class Alphabet { Six, Four, Three, Levels };

inline constexpr int kThreeZero = 0;
inline constexpr int kThreeA = 1;
inline constexpr int kThreeB = 2;

struct SymbolWord {
  Alphabet alphabet;
  int level_cap = 0;  // N; meaningful for Levels words only
  std::vector<int> symbols;

  static SymbolWord four(std::vector<int> symbols);
  static SymbolWord six(std::vector<int> symbols);
  static SymbolWord three(std::vector<int> symbols);
  static SymbolWord levels(std::vector<int> symbols, int level_cap);

  int size() const { return static_cast<int>(symbols.size()); }
  bool operator==(const SymbolWord&) const = default;
};

inline SymbolWord SymbolWord::four(std::vector<int> symbols) {
  for (int s : symbols)
    if (s < 0 || s > 3) throw DomainError("Four symbol out of range");
  return {Alphabet::Four, 0, std::move(symbols)};
}

inline SymbolWord SymbolWord::six(std::vector<int> symbols) {
  for (int s : symbols)
    if (s < 0 || s > 5) throw DomainError("Six symbol out of range");
  return {Alphabet::Six, 0, std::move(symbols)};
}

inline SymbolWord SymbolWord::three(std::vector<int> symbols) {
  for (int s : symbols)
    if (s < 0 || s > 2) throw DomainError("Three symbol out of range");
  return {Alphabet::Three, 0, std::move(symbols)};
}

inline SymbolWord SymbolWord::levels(std::vector<int> symbols, int level_cap) {
  if (level_cap < 0) throw DomainError("level cap must be nonnegative");
  for (int s : symbols)
    if (s < -level_cap || s > level_cap)
      throw DomainError("Levels symbol out of range");
  return {Alphabet::Levels, level_cap, std::move(symbols)};
}

inline std::string to_string(const SymbolWord& w) {
  std::string out = "(";
  for (int i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(w.symbols[i]);
  }
  return out + ")";
}

/// Drop the first symbol.
inline SymbolWord shift(const SymbolWord& w) {
  if (w.symbols.empty()) throw DomainError("cannot shift an empty word");
  SymbolWord out = w;
  out.symbols.erase(out.symbols.begin());
  return out;
}

/// Itinerary of the first n steps (n+1 symbols) in the Four or Six alphabet.
inline SymbolWord itinerary(const StadiumTable& table, const PhasePoint& p,
                            int n, Alphabet alphabet) {
  if (alphabet != Alphabet::Four && alphabet != Alphabet::Six)
    throw DomainError("itinerary: alphabet must be Four or Six");
  const auto points = trajectory(table, p, n);
  std::vector<int> symbols;
  symbols.reserve(points.size());
  for (const auto& q : points) {
    const BoundaryPiece piece = piece_at(table, q.r);
    if (alphabet == Alphabet::Four) {
      symbols.push_back(static_cast<int>(piece));
    } else {
      switch (piece) {
        case BoundaryPiece::RightArc:
          symbols.push_back(q.phi >= 0 ? 0 : 1);
          break;
        case BoundaryPiece::TopSegment:
          symbols.push_back(2);
          break;
        case BoundaryPiece::LeftArc:
          symbols.push_back(q.phi >= 0 ? 3 : 4);
          break;
        case BoundaryPiece::BottomSegment:
          symbols.push_back(5);
          break;
      }
    }
  }
  return alphabet == Alphabet::Four ? SymbolWord::four(std::move(symbols))
                                    : SymbolWord::six(std::move(symbols));
}

/// 2-to-1 factor identifying the two arcs: Four -> Three.
inline SymbolWord to_three(const SymbolWord& w) {
  if (w.alphabet != Alphabet::Four)
    throw DomainError("to_three expects a Four word");
  std::vector<int> out;
  out.reserve(w.symbols.size());
  for (int s : w.symbols) {
    switch (static_cast<BoundaryPiece>(s)) {
      case BoundaryPiece::RightArc:
      case BoundaryPiece::LeftArc: out.push_back(kThreeZero); break;
      case BoundaryPiece::TopSegment: out.push_back(kThreeA); break;
      case BoundaryPiece::BottomSegment: out.push_back(kThreeB); break;
    }
  }
  return SymbolWord::three(std::move(out));
}

/// Collapse the Six word onto Four (forget the phi sign).
inline SymbolWord six_to_four(const SymbolWord& w) {
  if (w.alphabet != Alphabet::Six)
    throw DomainError("six_to_four expects a Six word");
  std::vector<int> out;
  out.reserve(w.symbols.size());
  for (int s : w.symbols) {
    switch (s) {
      case 0: case 1: out.push_back(0); break;
      case 2: out.push_back(1); break;
      case 3: case 4: out.push_back(2); break;
      default: out.push_back(3); break;
    }
  }
  return SymbolWord::four(std::move(out));
}

/// Trim a Three word to its first and last 0 symbol.
inline SymbolWord trim_to_zero(const SymbolWord& w) {
  if (w.alphabet != Alphabet::Three)
    throw DomainError("trim_to_zero expects a Three word");
  int lo = 0, hi = w.size() - 1;
  while (lo < w.size() && w.symbols[lo] != kThreeZero) ++lo;
  while (hi >= 0 && w.symbols[hi] != kThreeZero) --hi;
  if (lo > hi) throw CodingError(CodingError::Kind::BoundaryNotZero, 0);
  return SymbolWord::three(std::vector<int>(w.symbols.begin() + lo,
                                            w.symbols.begin() + hi + 1));
}

/// Recoding of a zero-delimited Three word into the Levels alphabet: each
/// maximal nonzero block of length m becomes (1..m) when it starts with A and
/// (-1..-m) when it starts with B.
inline SymbolWord recode_levels(const SymbolWord& w, int level_cap) {
  if (w.alphabet != Alphabet::Three)
    throw DomainError("recode_levels expects a Three word");
  if (level_cap < 1) throw DomainError("level cap must be at least 1");
  if (w.symbols.empty() || w.symbols.front() != kThreeZero)
    throw CodingError(CodingError::Kind::BoundaryNotZero, 0);
  if (w.symbols.back() != kThreeZero)
    throw CodingError(CodingError::Kind::BoundaryNotZero, w.size() - 1);

  std::vector<int> out(w.symbols.size());
  int i = 0;
  while (i < w.size()) {
    if (w.symbols[i] == kThreeZero) {
      out[i] = 0;
      ++i;
      continue;
    }
    int j = i;
    while (j < w.size() && w.symbols[j] != kThreeZero) ++j;
    const int m = j - i;
    if (m > level_cap) throw CodingError(CodingError::Kind::BlockTooLong, i);
    const int sign = (w.symbols[i] == kThreeA) ? +1 : -1;
    for (int k = 0; k < m; ++k) out[i + k] = sign * (k + 1);
    i = j;
  }
  return SymbolWord::levels(std::move(out), level_cap);
}

/// Index of the first grammar violation of a Levels word, if any.
inline std::optional<int> grammar_violation(const SymbolWord& w) {
  if (w.alphabet != Alphabet::Levels)
    throw DomainError("grammar_violation expects a Levels word");
  const int n = w.level_cap;
  for (int i = 0; i < w.size(); ++i)
    if (std::abs(w.symbols[i]) > n) return i;
  for (int i = 0; i + 1 < w.size(); ++i) {
    const int a = w.symbols[i], b = w.symbols[i + 1];
    bool ok;
    if (a == 0)
      ok = (b == 0 || b == 1 || b == -1);
    else if (a > 0)
      ok = (b == 0 || (a < n && b == a + 1));
    else
      ok = (b == 0 || (-a < n && b == a - 1));
    if (!ok) return i + 1;
  }
  return std::nullopt;
}

/// Inverse of recode_levels on its image: Levels -> Three with each block
/// decoded as an alternation starting at A (positive) or B (negative).
inline SymbolWord decode_levels(const SymbolWord& w) {
  if (const auto bad = grammar_violation(w))
    throw GrammarError("invalid Levels word", *bad);
  std::vector<int> out(w.symbols.size());
  for (int i = 0; i < w.size(); ++i) {
    const int s = w.symbols[i];
    if (s == 0)
      out[i] = kThreeZero;
    else {
      const bool starts_top = s > 0;
      const bool even_offset = (std::abs(s) - 1) % 2 == 0;
      out[i] = (starts_top == even_offset) ? kThreeA : kThreeB;
    }
  }
  return SymbolWord::three(std::move(out));
}

/// All grammar-valid Levels words over the cap-N alphabet that start and end
/// with 0 and have between 2 and max_len symbols, in depth-first order with
/// successors visited in ascending numeric order.
inline std::vector<SymbolWord> enumerate_zero_delimited_words(int N,
                                                              int max_len) {
  if (N < 1) throw DomainError("level cap must be at least 1");
  if (max_len < 0) throw DomainError("maximal length must be nonnegative");
  std::vector<SymbolWord> out;
  std::vector<int> prefix{0};
  const std::function<void()> extend = [&]() {
    if (static_cast<int>(prefix.size()) >= 2 && prefix.back() == 0)
      out.push_back(SymbolWord::levels(prefix, N));
    if (static_cast<int>(prefix.size()) >= max_len) return;
    const int a = prefix.back();
    std::vector<int> nexts;
    if (a == 0)
      nexts = {-1, 0, 1};
    else if (a > 0) {
      nexts = {0};
      if (a < N) nexts.push_back(a + 1);
    } else {
      if (-a < N) nexts.push_back(a - 1);
      nexts.push_back(0);
    }
    for (int b : nexts) {
      prefix.push_back(b);
      extend();
      prefix.pop_back();
    }
  };
  if (max_len >= 1) extend();
  return out;
}

enum class MembershipReason { None, SameArcTwice, SegmentRunTooLong, Singular };

inline const char* to_string(MembershipReason r) {
  switch (r) {
    case MembershipReason::None: return "None";
    case MembershipReason::SameArcTwice: return "SameArcTwice";
    case MembershipReason::SegmentRunTooLong: return "SegmentRunTooLong";
    case MembershipReason::Singular: return "Singular";
  }
  return "?";
}

struct MembershipReport {
  bool in_K = false;
  bool in_KN = false;
  std::optional<int> violation_index;
  MembershipReason reason = MembershipReason::None;
};

/// Finite-horizon membership test: in_K iff no two consecutive collisions
/// with the same arc within the horizon, in_KN iff additionally no run of
/// more than N consecutive segment collisions.  A singular iterate is
/// reported as non-membership.
inline MembershipReport membership(const StadiumTable& table,
                                   const PhasePoint& p, int horizon, int N) {
  if (horizon < 0) throw DomainError("horizon must be nonnegative");
  if (N < 0) throw DomainError("N must be nonnegative");

  MembershipReport report;
  report.in_K = true;
  report.in_KN = true;

  PhasePoint cur = p;
  int prev_symbol = -1;
  int segment_run = 0;
  for (int k = 0; k <= horizon; ++k) {
    if (k > 0) {
      try {
        cur = step(table, cur).next;
      } catch (const SingularTrajectory&) {
        if (report.in_K && report.in_KN) {
          report.in_K = false;
          report.in_KN = false;
          report.violation_index = k - 1;
          report.reason = MembershipReason::Singular;
        }
        return report;
      }
    }
    const int symbol = static_cast<int>(piece_at(table, cur.r));
    const bool arc = is_arc(static_cast<BoundaryPiece>(symbol));
    if (arc && symbol == prev_symbol && report.in_K) {
      report.in_K = false;
      report.in_KN = false;
      if (!report.violation_index) {
        report.violation_index = k;
        report.reason = MembershipReason::SameArcTwice;
      }
    }
    segment_run = arc ? 0 : segment_run + 1;
    if (segment_run > N && report.in_KN) {
      report.in_KN = false;
      if (!report.violation_index) {
        report.violation_index = k;
        report.reason = MembershipReason::SegmentRunTooLong;
      }
    }
    prev_symbol = symbol;
  }
  return report;
}

}  // namespace stadium
