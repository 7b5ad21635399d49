#pragma once

#include <cstddef>

#include "sinkdist/ground_metric.hpp"
#include "sinkdist/transport.hpp"

namespace sinkdist {

struct EmdOptions {
  // Pivots with block pricing before falling back to Bland's rule. 0 picks a
  // budget proportional to the number of nodes.
  std::size_t pivot_budget = 0;
  // Hard cap on pivots (both phases). 0 picks a cap proportional to the arc count.
  std::size_t max_pivots = 0;
  // Reduced costs above -cost_tolerance * max|M| count as nonnegative.
  double cost_tolerance = 1e-13;
};

struct EmdSolution {
  double cost;
  TransportPlan plan;
  Eigen::Index basic_support_size;  // nonzero basic cells, at most 2d - 1
  // Dual certificate: m_ij - u_i - v_j >= -tol everywhere, equality on the support.
  Vector row_potential;
  Vector col_potential;
  std::size_t pivots = 0;
  bool used_bland = false;
};

/// Exact optimal transport cost d_M(r, c) by the network simplex method on
/// the complete bipartite graph between the supports of r and c.
EmdSolution solve_emd(const Histogram& r, const Histogram& c, const CostMatrix& m, const EmdOptions& opts = {});

}  // namespace sinkdist
