#include "sinkdist/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sinkdist/errors.hpp"

namespace sinkdist {

namespace {

// Transportation problem between m sources and n sinks. Node ids: sources are
// 0..m-1, sinks are m..m+n-1. The basis is a spanning tree of m+n-1 arcs.
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand, std::vector<double> cost,
                   const EmdOptions& opts)
      : m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        cost_(std::move(cost)),
        adj_(static_cast<std::size_t>(m_ + n_)),
        cell_arc_(static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_), -1),
        pot_(static_cast<std::size_t>(m_ + n_)),
        parent_arc_(static_cast<std::size_t>(m_ + n_)),
        parent_node_(static_cast<std::size_t>(m_ + n_)),
        depth_(static_cast<std::size_t>(m_ + n_)) {
    double max_cost = 0.0;
    for (double x : cost_) max_cost = std::max(max_cost, std::abs(x));
    tol_ = opts.cost_tolerance * std::max(max_cost, std::numeric_limits<double>::min());
    const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
    const std::size_t cells = cell_arc_.size();
    budget_ = opts.pivot_budget ? opts.pivot_budget : 200 * nodes + 1000;
    max_pivots_ = opts.max_pivots ? opts.max_pivots : budget_ + 10 * cells + 1000;
    block_ = std::max<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(cells))), 1);
  }

  void solve() {
    northwest_corner();
    for (;;) {
      compute_potentials();
      const int entering = bland_ ? price_bland() : price_block();
      if (entering < 0) return;
      if (pivots_ == budget_) bland_ = true;
      if (pivots_ >= max_pivots_) {
        std::ostringstream msg;
        msg << "network simplex exceeded " << max_pivots_ << " pivots (" << m_ << "x" << n_
            << " problem, Bland fallback after " << budget_ << ")";
        throw SolverError(msg.str());
      }
      pivot(entering);
      ++pivots_;
    }
  }

  [[nodiscard]] int rows() const { return m_; }
  [[nodiscard]] int cols() const { return n_; }
  [[nodiscard]] std::size_t pivots() const { return pivots_; }
  [[nodiscard]] bool used_bland() const { return bland_; }
  [[nodiscard]] std::size_t arc_count() const { return arc_row_.size(); }
  [[nodiscard]] int arc_row(std::size_t a) const { return arc_row_[a]; }
  [[nodiscard]] int arc_col(std::size_t a) const { return arc_col_[a]; }
  [[nodiscard]] double arc_flow(std::size_t a) const { return arc_flow_[a]; }
  [[nodiscard]] double row_potential(int i) const { return pot_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] double col_potential(int j) const { return pot_[static_cast<std::size_t>(m_ + j)]; }

 private:
  [[nodiscard]] double c(int i, int j) const {
    return cost_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
  }

  void add_arc(int id, int i, int j, double flow) {
    const auto a = static_cast<std::size_t>(id);
    arc_row_[a] = i;
    arc_col_[a] = j;
    arc_flow_[a] = flow;
    adj_[static_cast<std::size_t>(i)].push_back(id);
    adj_[static_cast<std::size_t>(m_ + j)].push_back(id);
    cell_arc_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)] = id;
  }

  void remove_arc(int id) {
    const auto a = static_cast<std::size_t>(id);
    for (int node : {arc_row_[a], m_ + arc_col_[a]}) {
      auto& list = adj_[static_cast<std::size_t>(node)];
      auto it = std::find(list.begin(), list.end(), id);
      *it = list.back();
      list.pop_back();
    }
    cell_arc_[static_cast<std::size_t>(arc_row_[a]) * static_cast<std::size_t>(n_) +
              static_cast<std::size_t>(arc_col_[a])] = -1;
  }

  // Staircase basis; always exactly m+n-1 arcs, some possibly at zero flow.
  void northwest_corner() {
    const std::size_t arcs = static_cast<std::size_t>(m_ + n_ - 1);
    arc_row_.resize(arcs);
    arc_col_.resize(arcs);
    arc_flow_.resize(arcs);
    std::vector<double> s = supply_, t = demand_;
    int i = 0, j = 0, id = 0;
    for (;;) {
      const double x = std::min(s[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]);
      add_arc(id++, i, j, x);
      s[static_cast<std::size_t>(i)] -= x;
      t[static_cast<std::size_t>(j)] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == n_ - 1) {
        ++i;
      } else if (s[static_cast<std::size_t>(i)] <= t[static_cast<std::size_t>(j)]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // u_i + v_j = c_ij on every tree arc, u_0 = 0. Also records parents and depths.
  void compute_potentials() {
    stack_.clear();
    pot_[0] = 0.0;
    parent_arc_[0] = -1;
    parent_node_[0] = -1;
    depth_[0] = 0;
    stack_.push_back(0);
    while (!stack_.empty()) {
      const int node = stack_.back();
      stack_.pop_back();
      const auto un = static_cast<std::size_t>(node);
      for (int id : adj_[un]) {
        if (id == parent_arc_[un]) continue;
        const auto a = static_cast<std::size_t>(id);
        const int other = node < m_ ? m_ + arc_col_[a] : arc_row_[a];
        const auto uo = static_cast<std::size_t>(other);
        pot_[uo] = c(arc_row_[a], arc_col_[a]) - pot_[un];
        parent_arc_[uo] = id;
        parent_node_[uo] = node;
        depth_[uo] = depth_[un] + 1;
        stack_.push_back(other);
      }
    }
  }

  [[nodiscard]] double reduced_cost(std::size_t cell) const {
    const int i = static_cast<int>(cell / static_cast<std::size_t>(n_));
    const int j = static_cast<int>(cell % static_cast<std::size_t>(n_));
    return cost_[cell] - pot_[static_cast<std::size_t>(i)] - pot_[static_cast<std::size_t>(m_ + j)];
  }

  // Most negative reduced cost within the first block that contains one.
  int price_block() {
    const std::size_t cells = cell_arc_.size();
    double best = -tol_;
    int best_cell = -1;
    std::size_t scanned_in_block = 0;
    for (std::size_t k = 0; k < cells; ++k) {
      const std::size_t cell = next_cell_;
      next_cell_ = next_cell_ + 1 == cells ? 0 : next_cell_ + 1;
      if (cell_arc_[cell] < 0) {
        const double rc = reduced_cost(cell);
        if (rc < best) {
          best = rc;
          best_cell = static_cast<int>(cell);
        }
      }
      if (++scanned_in_block == block_) {
        if (best_cell >= 0) return best_cell;
        scanned_in_block = 0;
      }
    }
    return best_cell;
  }

  int price_bland() {
    const std::size_t cells = cell_arc_.size();
    for (std::size_t cell = 0; cell < cells; ++cell) {
      if (cell_arc_[cell] < 0 && reduced_cost(cell) < -tol_) return static_cast<int>(cell);
    }
    return -1;
  }

  void pivot(int entering_cell) {
    const int ie = entering_cell / n_;
    const int je = entering_cell % n_;
    // Tree path from sink je up to the LCA, then down to source ie.
    up_a_.clear();
    up_b_.clear();
    int x = ie, y = m_ + je;
    while (depth_[static_cast<std::size_t>(x)] > depth_[static_cast<std::size_t>(y)]) {
      up_a_.push_back(parent_arc_[static_cast<std::size_t>(x)]);
      x = parent_node_[static_cast<std::size_t>(x)];
    }
    while (depth_[static_cast<std::size_t>(y)] > depth_[static_cast<std::size_t>(x)]) {
      up_b_.push_back(parent_arc_[static_cast<std::size_t>(y)]);
      y = parent_node_[static_cast<std::size_t>(y)];
    }
    while (x != y) {
      up_a_.push_back(parent_arc_[static_cast<std::size_t>(x)]);
      x = parent_node_[static_cast<std::size_t>(x)];
      up_b_.push_back(parent_arc_[static_cast<std::size_t>(y)]);
      y = parent_node_[static_cast<std::size_t>(y)];
    }
    cycle_.assign(up_b_.begin(), up_b_.end());
    cycle_.insert(cycle_.end(), up_a_.rbegin(), up_a_.rend());

    // Even positions lose flow, odd positions gain it.
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t k = 0; k < cycle_.size(); k += 2) {
      const int id = cycle_[k];
      const double f = arc_flow_[static_cast<std::size_t>(id)];
      if (f < theta) {
        theta = f;
        leaving = id;
      } else if (f == theta) {
        if (bland_) {
          if (cell_of(id) < cell_of(leaving)) leaving = id;
        } else {
          leaving = id;
        }
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t k = 0; k < cycle_.size(); ++k) {
      auto& f = arc_flow_[static_cast<std::size_t>(cycle_[k])];
      f = (k % 2 == 0) ? std::max(f - theta, 0.0) : f + theta;
    }
    remove_arc(leaving);
    add_arc(leaving, ie, je, theta);
  }

  [[nodiscard]] std::size_t cell_of(int id) const {
    const auto a = static_cast<std::size_t>(id);
    return static_cast<std::size_t>(arc_row_[a]) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(arc_col_[a]);
  }

  int m_, n_;
  std::vector<double> supply_, demand_, cost_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> cell_arc_;
  std::vector<int> arc_row_, arc_col_;
  std::vector<double> arc_flow_;
  std::vector<double> pot_;
  std::vector<int> parent_arc_, parent_node_, depth_;
  std::vector<int> stack_, up_a_, up_b_, cycle_;
  double tol_ = 0.0;
  std::size_t budget_ = 0, max_pivots_ = 0, block_ = 1;
  std::size_t next_cell_ = 0;
  std::size_t pivots_ = 0;
  bool bland_ = false;
};

}  // namespace

EmdSolution solve_emd(const Histogram& r, const Histogram& c, const CostMatrix& m, const EmdOptions& opts) {
  const Eigen::Index d = m.size();
  if (r.size() != d || c.size() != d) {
    throw DomainError("solve_emd: histogram dimensions (" + std::to_string(r.size()) + ", " +
                      std::to_string(c.size()) + ") do not match cost matrix " + std::to_string(d));
  }
  const Matrix& cost = m.entries();

  // Zero-mass bins are dropped and reinserted as empty rows/columns.
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (r[i] > 0.0) rows.push_back(i);
    if (c[i] > 0.0) cols.push_back(i);
  }
  std::vector<double> supply, demand;
  double supply_total = 0.0, demand_total = 0.0;
  for (auto i : rows) supply_total += r[i];
  for (auto j : cols) demand_total += c[j];
  for (auto i : rows) supply.push_back(r[i]);
  // Absorb the (<= 1e-9) mass imbalance into the demands.
  for (auto j : cols) demand.push_back(c[j] * (supply_total / demand_total));
  std::vector<double> local_cost;
  local_cost.reserve(rows.size() * cols.size());
  for (auto i : rows) {
    for (auto j : cols) local_cost.push_back(cost(i, j));
  }

  TransportSimplex simplex(std::move(supply), std::move(demand), std::move(local_cost), opts);
  simplex.solve();

  Matrix plan = Matrix::Zero(d, d);
  Eigen::Index support = 0;
  double total = 0.0;
  for (std::size_t a = 0; a < simplex.arc_count(); ++a) {
    const double f = simplex.arc_flow(a);
    if (f <= 0.0) continue;
    const auto i = rows[static_cast<std::size_t>(simplex.arc_row(a))];
    const auto j = cols[static_cast<std::size_t>(simplex.arc_col(a))];
    plan(i, j) = f;
    total += f * cost(i, j);
    ++support;
  }

  // Potentials for dropped bins are chosen to keep every reduced cost nonnegative.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Vector u = Vector::Constant(d, kInf), v = Vector::Constant(d, kInf);
  for (std::size_t k = 0; k < rows.size(); ++k) u[rows[k]] = simplex.row_potential(static_cast<int>(k));
  for (std::size_t k = 0; k < cols.size(); ++k) v[cols[k]] = simplex.col_potential(static_cast<int>(k));
  for (Eigen::Index i = 0; i < d; ++i) {
    if (r[i] > 0.0) continue;
    double best = kInf;
    for (auto j : cols) best = std::min(best, cost(i, j) - v[j]);
    u[i] = best;
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    if (c[j] > 0.0) continue;
    double best = kInf;
    for (Eigen::Index i = 0; i < d; ++i) best = std::min(best, cost(i, j) - u[i]);
    v[j] = best;
  }

  EmdSolution sol{total, TransportPlan(std::move(plan)), support, std::move(u), std::move(v), simplex.pivots(),
                  simplex.used_bland()};
  return sol;
}

}  // namespace sinkdist
