#pragma once

#include <stdexcept>
#include <string>

namespace sglab {

// Base of every error raised by the library. kind() is a stable snake_case tag
// used in reports and NDJSON exit reasons.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class MeanViolationError : public Error {
 public:
  MeanViolationError(double mean, double tolerance);
  double mean() const noexcept { return mean_; }

 private:
  double mean_;
};

class UnsupportedOrderError : public Error {
 public:
  UnsupportedOrderError(int a, int b);
};

// Picard iterate left the contractive regime.
class DivergenceError : public Error {
 public:
  DivergenceError(int iteration, double eps_hessian);
  double eps_hessian() const noexcept { return eps_hessian_; }

 private:
  double eps_hessian_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(int iterations, double last_update);
};

class StepSizeError : public Error {
 public:
  StepSizeError(double dt, double dt_max);
};

// Sinkhorn did not reach the marginal tolerance within the iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(int iterations, double marginal_error);
  double marginal_error() const noexcept { return marginal_error_; }

 private:
  double marginal_error_;
};

#define SGLAB_SIMPLE_ERROR(Name, tag)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& message) : Error(tag, message) {} \
  };

SGLAB_SIMPLE_ERROR(ConfigError, "config")
SGLAB_SIMPLE_ERROR(CoverageError, "coverage")
SGLAB_SIMPLE_ERROR(ShapeError, "shape")
SGLAB_SIMPLE_ERROR(ResourceError, "resource")
SGLAB_SIMPLE_ERROR(PreconditionError, "precondition")
SGLAB_SIMPLE_ERROR(DegenerateInputError, "degenerate_input")
SGLAB_SIMPLE_ERROR(SamplingError, "sampling")
SGLAB_SIMPLE_ERROR(AlignmentError, "alignment")
SGLAB_SIMPLE_ERROR(IoError, "io")

#undef SGLAB_SIMPLE_ERROR

}  // namespace sglab
