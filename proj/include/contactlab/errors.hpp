#ifndef CONTACTLAB_ERRORS_HPP
#define CONTACTLAB_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contactlab {

/// Base class for all workbench errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
  std::size_t position;
  std::string expected;
  SyntaxError(std::size_t pos, std::string what_expected)
      : Error("syntax error at position " + std::to_string(pos) + ": expected " + what_expected),
        position(pos),
        expected(std::move(what_expected)) {}
};

struct UnknownIdentifier : Error {
  std::string name;
  explicit UnknownIdentifier(std::string ident)
      : Error("unknown identifier '" + ident + "'"), name(std::move(ident)) {}
};

struct DomainError : Error {
  using Error::Error;
};

struct ChartMismatch : Error {
  using Error::Error;
};

struct DegreeOverflow : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct EvenDimension : Error {
  using Error::Error;
};

struct DegenerateTangentBasis : Error {
  using Error::Error;
};

struct SingularSystem : Error {
  double condition;
  SingularSystem(const std::string& msg, double cond)
      : Error(msg + " (condition estimate " + std::to_string(cond) + ")"), condition(cond) {}
};

struct NotHorizontal : Error {
  using Error::Error;
};

struct NotSemibasic : Error {
  using Error::Error;
};

struct NotContactField : Error {
  using Error::Error;
};

struct NotSymplectic : Error {
  using Error::Error;
};

struct NotTransverse : Error {
  using Error::Error;
};

struct LiouvilleFailed : Error {
  using Error::Error;
};

struct NotReebIntegral : Error {
  using Error::Error;
};

struct BadParams : Error {
  using Error::Error;
};

struct BadComponentList : Error {
  using Error::Error;
};

struct DegenerateFrequencyDenominator : Error {
  using Error::Error;
};

struct LeftDomain : Error {
  using Error::Error;
};

struct StepRejected : Error {
  using Error::Error;
};

struct NotLevelSet : Error {
  using Error::Error;
};

struct NotCoprime : Error {
  using Error::Error;
};

struct NotPrimitive : Error {
  using Error::Error;
};

struct EmptyInterior : Error {
  using Error::Error;
};

struct NotGoodCone : Error {
  using Error::Error;
};

struct RightInverseNotFound : Error {
  using Error::Error;
};

struct ZeroMomentValue : Error {
  using Error::Error;
};

struct UnsupportedDerivativeDepth : Error {
  using Error::Error;
};

struct SceneError : Error {
  std::size_t line;
  std::size_t column;
  SceneError(std::size_t ln, std::size_t col, const std::string& msg)
      : Error("scene error at line " + std::to_string(ln) + ", column " + std::to_string(col) +
              ": " + msg),
        line(ln),
        column(col) {}
};

}  // namespace contactlab

#endif
