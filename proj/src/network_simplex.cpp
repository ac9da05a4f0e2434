#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sglab/errors.hpp"

namespace sglab::detail {

namespace {

class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<double>& supply, const std::vector<double>& demand,
                 const std::vector<double>& cost)
      : s_(static_cast<int>(supply.size())),
        t_(static_cast<int>(demand.size())),
        nodes_(s_ + t_ + 1),
        root_(s_ + t_),
        real_arcs_(static_cast<long>(s_) * t_) {
    const long arcs = real_arcs_ + s_ + t_;
    src_.resize(arcs);
    dst_.resize(arcs);
    cost_.resize(arcs);
    flow_.assign(arcs, 0.0);
    in_tree_.assign(arcs, 0);
    double cmax = 0.0;
    for (long k = 0; k < real_arcs_; ++k) {
      src_[k] = static_cast<int>(k / t_);
      dst_[k] = s_ + static_cast<int>(k % t_);
      cost_[k] = cost[k];
      cmax = std::max(cmax, std::abs(cost[k]));
    }
    const double big = 1.0 + cmax * nodes_;
    adj_.assign(nodes_, {});
    for (int i = 0; i < s_; ++i) {
      const long k = real_arcs_ + i;
      src_[k] = i;
      dst_[k] = root_;
      cost_[k] = big;
      flow_[k] = supply[i];
      add_tree_arc(k);
    }
    for (int j = 0; j < t_; ++j) {
      const long k = real_arcs_ + s_ + j;
      src_[k] = root_;
      dst_[k] = s_ + j;
      cost_[k] = big;
      flow_[k] = demand[j];
      add_tree_arc(k);
    }
    tol_ = 1e-12 * std::max(1.0, cmax);
    parent_.assign(nodes_, -1);
    pred_.assign(nodes_, -1);
    depth_.assign(nodes_, 0);
    pot_.assign(nodes_, 0.0);
    queue_.reserve(nodes_);
    rebuild();
  }

  TransportSolution solve() {
    TransportSolution out;
    const long block = std::max(16L, static_cast<long>(std::sqrt(static_cast<double>(real_arcs_))));
    const long max_pivots = 100 * (real_arcs_ + nodes_);
    long next = 0;
    while (true) {
      long entering = -1;
      double best = -tol_;
      long scanned = 0;
      // block search: scan blocks from the last position until one holds a
      // violating arc, then take its most negative reduced cost
      while (scanned < real_arcs_) {
        const long len = std::min(block, real_arcs_ - scanned);
        for (long c = 0; c < len; ++c) {
          const long k = next;
          next = next + 1 == real_arcs_ ? 0 : next + 1;
          if (in_tree_[k]) continue;
          const double rc = cost_[k] + pot_[src_[k]] - pot_[dst_[k]];
          if (rc < best) {
            best = rc;
            entering = k;
          }
        }
        scanned += len;
        if (entering >= 0) break;
      }
      if (entering < 0) break;
      pivot(entering);
      if (++out.pivots > max_pivots) {
        throw ResourceError("network simplex exceeded " + std::to_string(max_pivots) + " pivots");
      }
    }
    double residual = 0.0;
    for (long k = real_arcs_; k < static_cast<long>(flow_.size()); ++k) residual += flow_[k];
    if (residual > 1e-9) {
      throw PreconditionError("transport problem is unbalanced (residual " +
                              std::to_string(residual) + ")");
    }
    for (long k = 0; k < real_arcs_; ++k) {
      if (flow_[k] > 0.0) {
        out.cost += cost_[k] * flow_[k];
        out.flows.push_back({src_[k], dst_[k] - s_, flow_[k]});
      }
    }
    return out;
  }

 private:
  void add_tree_arc(long k) {
    in_tree_[k] = 1;
    adj_[src_[k]].push_back(k);
    adj_[dst_[k]].push_back(k);
  }

  void remove_tree_arc(long k) {
    in_tree_[k] = 0;
    for (int node : {src_[k], dst_[k]}) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), k));
    }
  }

  // parent pointers, depths and potentials by BFS from the root
  void rebuild() {
    queue_.clear();
    queue_.push_back(root_);
    parent_[root_] = -1;
    pred_[root_] = -1;
    depth_[root_] = 0;
    pot_[root_] = 0.0;
    for (std::size_t q = 0; q < queue_.size(); ++q) {
      const int x = queue_[q];
      for (long k : adj_[x]) {
        if (k == pred_[x]) continue;
        const int y = src_[k] == x ? dst_[k] : src_[k];
        parent_[y] = x;
        pred_[y] = k;
        depth_[y] = depth_[x] + 1;
        // tree arcs have zero reduced cost c + pot[src] - pot[dst]
        pot_[y] = src_[k] == x ? pot_[x] + cost_[k] : pot_[x] - cost_[k];
        queue_.push_back(y);
      }
    }
  }

  void pivot(long entering) {
    const int u = src_[entering];
    const int v = dst_[entering];
    // flow is pushed along u -> v and back to u through the tree
    std::vector<int>& up_u = path_u_;
    std::vector<int>& up_v = path_v_;
    up_u.clear();
    up_v.clear();
    int a = u, b = v;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        up_u.push_back(a);
        a = parent_[a];
      } else {
        up_v.push_back(b);
        b = parent_[b];
      }
    }
    // traverse the cycle from the apex in flow direction: down to u, across
    // the entering arc, up from v; keep the last minimal blocking arc
    double delta = INFINITY;
    long leaving = -1;
    for (auto it = up_u.rbegin(); it != up_u.rend(); ++it) {
      const long k = pred_[*it];
      if (dst_[k] != *it && flow_[k] <= delta) {
        delta = flow_[k];
        leaving = k;
      }
    }
    for (int x : up_v) {
      const long k = pred_[x];
      if (src_[k] != x && flow_[k] <= delta) {
        delta = flow_[k];
        leaving = k;
      }
    }
    if (leaving < 0) throw ResourceError("network simplex found an unbounded cycle");
    for (int x : up_u) {
      const long k = pred_[x];
      flow_[k] += dst_[k] == x ? delta : -delta;
    }
    for (int x : up_v) {
      const long k = pred_[x];
      flow_[k] += src_[k] == x ? delta : -delta;
    }
    flow_[entering] = delta;
    flow_[leaving] = 0.0;
    remove_tree_arc(leaving);
    add_tree_arc(entering);
    rebuild();
  }

  int s_, t_, nodes_, root_;
  long real_arcs_;
  double tol_ = 0.0;
  std::vector<int> src_, dst_;
  std::vector<double> cost_, flow_;
  std::vector<char> in_tree_;
  std::vector<std::vector<long>> adj_;
  std::vector<int> parent_, depth_, queue_;
  std::vector<long> pred_;
  std::vector<double> pot_;
  std::vector<int> path_u_, path_v_;
};

}  // namespace

TransportSolution solve_transport(const std::vector<double>& supply,
                                  const std::vector<double>& demand,
                                  const std::vector<double>& cost) {
  if (cost.size() != supply.size() * demand.size()) {
    throw ShapeError("cost matrix does not match supply x demand");
  }
  if (supply.empty() || demand.empty()) return {};
  NetworkSimplex ns(supply, demand, cost);
  return ns.solve();
}

}  // namespace sglab::detail
