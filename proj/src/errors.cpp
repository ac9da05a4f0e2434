#include "sglab/errors.hpp"

#include <sstream>

namespace sglab {

namespace {

std::string format(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(message), kind_(std::move(kind)) {}

MeanViolationError::MeanViolationError(double mean, double tolerance)
    : Error("mean_violation", "field is not mean-zero: mean " + format(mean) +
                                  " exceeds tolerance " + format(tolerance)),
      mean_(mean) {}

UnsupportedOrderError::UnsupportedOrderError(int a, int b)
    : Error("unsupported_order",
            "derivative order (" + std::to_string(a) + "," + std::to_string(b) +
                ") unsupported: need a,b >= 0 and a+b <= 2") {}

DivergenceError::DivergenceError(int iteration, double eps_hessian)
    : Error("divergence", "Monge-Ampere iteration left the contractive regime at iterate " +
                              std::to_string(iteration) + ": eps*|D2 psi|_inf = " +
                              format(eps_hessian) + " > 1/2"),
      eps_hessian_(eps_hessian) {}

NonConvergenceError::NonConvergenceError(int iterations, double last_update)
    : Error("non_convergence", "no convergence after " + std::to_string(iterations) +
                                   " iterations (last relative update " +
                                   format(last_update) + ")") {}

StepSizeError::StepSizeError(double dt, double dt_max)
    : Error("step_size",
            "time step " + format(dt) + " violates CFL limit " + format(dt_max)) {}

ConvergenceError::ConvergenceError(int iterations, double marginal_error)
    : Error("convergence", "Sinkhorn stopped at iteration cap " + std::to_string(iterations) +
                               " with marginal error " + format(marginal_error)),
      marginal_error_(marginal_error) {}

}  // namespace sglab
