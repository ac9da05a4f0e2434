#pragma once

#include <vector>

namespace sglab::detail {

struct TransportFlow {
  int source;
  int sink;
  double mass;
};

struct TransportSolution {
  double cost = 0.0;
  std::vector<TransportFlow> flows;
  long pivots = 0;
};

// Balanced transportation problem min sum c_ij x_ij, row sums = supply,
// column sums = demand, x >= 0, solved by the primal network simplex with a
// strongly feasible spanning tree. cost is row-major supply.size() x
// demand.size().
TransportSolution solve_transport(const std::vector<double>& supply,
                                  const std::vector<double>& demand,
                                  const std::vector<double>& cost);

}  // namespace sglab::detail
