#pragma once

#include <stdexcept>
#include <string>

namespace cavitykin {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Beam direction (nearly) parallel to the reference plane.
struct DegenerateProjection : Error {
  using Error::Error;
};

// No points available for a selection/averaging step.
struct EmptySelection : Error {
  using Error::Error;
};

// Regression data cannot support a fit (constant inputs, too few samples).
struct DegenerateData : Error {
  using Error::Error;
};

// Constraint set is empty or inconsistent with the equality plane.
struct InfeasibleStart : Error {
  using Error::Error;
};

// Paired surfaces have different point counts.
struct CardinalityMismatch : Error {
  using Error::Error;
};

// Malformed input file; the message carries the path and line/field.
struct ParseError : Error {
  using Error::Error;
};

struct EmptyFile : Error {
  using Error::Error;
};

// Point set is collinear or too small for plane fitting / normalization.
struct DegenerateGeometry : Error {
  using Error::Error;
};

// Measured surface does not cover enough of the evaluation grid.
struct SparseCoverage : Error {
  using Error::Error;
};

}  // namespace cavitykin
