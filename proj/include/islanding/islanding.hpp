#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "islanding/metrics.hpp"
#include "islanding/union_find.hpp"

namespace island {

// Edge set S kept acyclic together with the virtual edges (0, s_k) that tie
// every reference bus to an extra node.
class PartitionSet {
 public:
  explicit PartitionSet(const MetricContext& ctx);
  static PartitionSet from_edges(const MetricContext& ctx, const std::vector<int>& S);

  bool can_add(int edge);
  void add(int edge);  // throws if the edge closes a cycle

  const std::vector<int>& edges() const { return S_; }
  int size() const { return static_cast<int>(S_.size()); }
  bool is_basis() const { return size() == ctx_->m - static_cast<int>(ctx_->refs.size()); }

  // island index per bus: position of the reference in its component, -1 if none
  std::vector<int> island_of() const;

 private:
  const MetricContext* ctx_;
  std::vector<int> S_;
  UnionFind uf_;
};

bool is_independent(const MetricContext& ctx, const std::vector<int>& S);

struct Swap {
  int removed = -1;
  int added = -1;
  double J = 0.0;
};

struct SearchTrace {
  std::vector<int> greedy_edges;   // accepted, in order
  std::vector<double> greedy_J;    // J(empty set), then J after each accepted edge
  std::vector<int> rejected;       // argmax picks that closed a cycle
  std::vector<Swap> swaps;
  double J_empty = 0.0;
  double J_full = 0.0;
};

struct IslandingSolution {
  std::string method;
  std::vector<int> S;
  std::vector<int> open_edges;  // E \ S
  std::vector<int> cutset;      // edges joining different islands
  std::vector<std::vector<int>> islands;  // bus positions
  std::vector<int> island_of_bus;
  std::vector<int> island_of_gen;
  Eigen::MatrixXd Lg;
  double J = 0.0;
  double f = 0.0;
  double sqrt_f_mw = 0.0;
  double H_bar = 0.0;
  double H_half = 0.0;
  Eigen::VectorXd h;
  SearchTrace trace;
};

PartitionSet greedy_select(const MetricContext& ctx, SearchTrace* trace = nullptr);
PartitionSet local_search(const MetricContext& ctx, const PartitionSet& P, double epsilon,
                          SearchTrace* trace = nullptr);
IslandingSolution extract_solution(const MetricContext& ctx, const PartitionSet& P, SearchTrace trace = {});

// Greedy plus local search.
IslandingSolution weak_submodular_islanding(const MetricContext& ctx, double epsilon);

// Metrics for an arbitrary bus labelling; S is every edge inside an island.
IslandingSolution solution_from_labels(const MetricContext& ctx, const std::vector<int>& label);

Eigen::MatrixXd partition_matrix(const MetricContext& ctx, const std::vector<int>& island_of_bus);

struct BruteForceResult {
  std::vector<int> S;
  double J = 0.0;
  long long bases = 0;
};

BruteForceResult brute_force_optimum(const MetricContext& ctx, long long max_subsets = 2000000);

bool check_approximation_bound(const MetricContext& ctx, const IslandingSolution& sol, double j_star);

// (log J(E) - log J(empty)) / log(1 - eps); +inf when J(E) is zero
double local_search_bound(double J_full, double J_empty, double epsilon);

}  // namespace island
