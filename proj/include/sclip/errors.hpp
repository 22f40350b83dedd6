#pragma once

#include <stdexcept>
#include <string>

namespace sclip {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Quadrature refinements failed to agree within tolerance.
struct NonConvergence : Error {
  explicit NonConvergence(const std::string& msg) : Error(msg) {}
};

// Bad interval, e.g. truncation lo >= hi.
struct InvalidRange : Error {
  explicit InvalidRange(const std::string& msg) : Error(msg) {}
};

// Sampling requested before the CDF table was built.
struct SamplerNotBuilt : Error {
  explicit SamplerNotBuilt(const std::string& msg) : Error(msg) {}
};

// Requested circulant degree does not fit the node count.
struct DegreeTooLarge : Error {
  explicit DegreeTooLarge(const std::string& msg) : Error(msg) {}
};

// Graph is not connected.
struct Disconnected : Error {
  explicit Disconnected(const std::string& msg) : Error(msg) {}
};

// Matrix is not doubly stochastic within tolerance.
struct NonStochastic : Error {
  explicit NonStochastic(const std::string& msg) : Error(msg) {}
};

// Aggregate Hessian sum is numerically singular.
struct SingularAggregate : Error {
  explicit SingularAggregate(const std::string& msg) : Error(msg) {}
};

// mu/L inputs violate 0 < mu <= L.
struct InvalidCurvature : Error {
  explicit InvalidCurvature(const std::string& msg) : Error(msg) {}
};

// Too few points for a regression window.
struct InsufficientData : Error {
  explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

// Log-log fit requires strictly positive values.
struct NonPositiveValues : Error {
  explicit NonPositiveValues(const std::string& msg) : Error(msg) {}
};

// Traces passed to aggregation disagree in shape or config.
struct MismatchedTraces : Error {
  explicit MismatchedTraces(const std::string& msg) : Error(msg) {}
};

// Config file could not be parsed.
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Config parsed but failed validation; message carries the field path.
struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Grid search invoked with an empty grid.
struct EmptyGrid : Error {
  explicit EmptyGrid(const std::string& msg) : Error(msg) {}
};

// Operator-bound quadrature failed.
struct QuadratureFailure : Error {
  explicit QuadratureFailure(const std::string& msg) : Error(msg) {}
};

}  // namespace sclip
