#pragma once

#include <stdexcept>
#include <string>

namespace stadium {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the documented domain (range, sign, size).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A point is not on the boundary, or no admissible intersection exists.
class GeometryError : public Error {
 public:
  using Error::Error;
};

enum class SingularCause { GrazingStart, CornerStart, GrazingHit, CornerHit };

inline const char* to_string(SingularCause c) {
  switch (c) {
    case SingularCause::GrazingStart: return "GrazingStart";
    case SingularCause::CornerStart: return "CornerStart";
    case SingularCause::GrazingHit: return "GrazingHit";
    case SingularCause::CornerHit: return "CornerHit";
  }
  return "?";
}

/// The billiard map is undefined here: the trajectory meets the singular set
/// (grazing collision or corner hit). `step_index` is the index of the
/// iterate from which the failing step was attempted.
class SingularTrajectory : public Error {
 public:
  SingularTrajectory(SingularCause cause, int step_index)
      : Error(std::string("singular trajectory at step ") +
              std::to_string(step_index) + " (" + to_string(cause) + ")"),
        cause_(cause),
        step_(step_index) {}

  SingularCause cause() const { return cause_; }
  int step_index() const { return step_; }

  SingularTrajectory with_step(int step_index) const {
    return SingularTrajectory(cause_, step_index);
  }

 private:
  SingularCause cause_;
  int step_;
};

/// A symbol sequence breaks the subshift grammar; `index` points at the
/// offending symbol.
class GrammarError : public Error {
 public:
  GrammarError(const std::string& what, int index)
      : Error(what + " (symbol index " + std::to_string(index) + ")"),
        index_(index) {}

  int index() const { return index_; }

 private:
  int index_;
};

/// A word cannot be recoded.
class CodingError : public Error {
 public:
  enum class Kind { BlockTooLong, BoundaryNotZero };

  CodingError(Kind kind, int index)
      : Error(std::string(kind == Kind::BlockTooLong
                              ? "block of segment symbols too long"
                              : "word does not start and end with symbol 0") +
              " (index " + std::to_string(index) + ")"),
        kind_(kind),
        index_(index) {}

  Kind kind() const { return kind_; }
  int index() const { return index_; }

 private:
  Kind kind_;
  int index_;
};

/// The matrix structure does not admit the requested reduction
/// (e.g. a cycle avoids the rome, so first-return paths are not finite).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An iteration failed to converge; carries the best residual seen.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace stadium
