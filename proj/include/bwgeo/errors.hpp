#pragma once

#include <stdexcept>
#include <string>

namespace bwgeo {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input matrix exceeds the allowed asymmetry.
class AsymmetricInput : public Error {
 public:
  using Error::Error;
};

// Symmetric input has an eigenvalue below the PSD clipping band.
class NotPsd : public Error {
 public:
  using Error::Error;
};

// Input is not positive definite where strict definiteness is required.
class NotSpd : public Error {
 public:
  using Error::Error;
};

// A factor or basis does not have the full column rank the operation needs.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

// A factor does not reproduce the matrix it is claimed to factor.
class FactorMismatch : public Error {
 public:
  using Error::Error;
};

// The candidate rotation or tangent does not describe a geodesic that
// actually reaches the target point.
class NotPreimage : public Error {
 public:
  using Error::Error;
};

// A unique result was requested but the problem has several solutions.
class NotUnique : public Error {
 public:
  using Error::Error;
};

// Operand ranks violate the operation's rank preconditions.
class RankMismatch : public Error {
 public:
  using Error::Error;
};

// A ball parameter lies outside the closed spectral unit ball or has the
// wrong shape.
class ParamOutOfBall : public Error {
 public:
  using Error::Error;
};

// Operand dimensions are inconsistent.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A curve expected to keep constant interior rank changes rank on the grid.
class NonConstantRank : public Error {
 public:
  using Error::Error;
};

// A vector fails the tangency condition of the stratum it is used on.
class NotTangent : public Error {
 public:
  using Error::Error;
};

// An iterative backend failed to converge.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

// A matrix file does not parse or violates its own declared shape.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace bwgeo
