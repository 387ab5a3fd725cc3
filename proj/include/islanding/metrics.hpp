#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "islanding/netcase.hpp"

namespace island {

// Everything the objective needs, detached from the network model.
// Imbalance quantities are in MW, so f is in MW^2.
struct MetricContext {
  int m = 0;
  int n = 0;
  std::vector<int> bus_ids;
  std::vector<std::pair<int, int>> edges;  // bus positions, smaller id first
  Eigen::VectorXd b0;
  Eigen::VectorXd d_max;
  Eigen::VectorXd g_max;
  std::vector<int> gen_bus;  // bus position of each generator
  std::vector<int> refs;     // generator indices
  std::vector<int> ref_bus;  // bus position of each reference
  Eigen::MatrixXd L;
  std::vector<int> target_gen;  // non-reference generators, ascending
  Eigen::MatrixXd targets;      // column t is c^i for i = target_gen[t]
  double xi = 0.0;

  int num_edges() const { return static_cast<int>(edges.size()); }
  Eigen::MatrixXd incidence(const std::vector<int>& S) const;
  Eigen::MatrixXd incidence() const;
  Eigen::MatrixXd C() const;  // A'A / (2n)
  int target_of(int gen) const;  // -1 for references
};

MetricContext make_context(const PowerNetwork& net, const OperatingPoint& op, const Eigen::MatrixXd& L,
                           const std::vector<int>& refs, double xi);

MetricContext make_context(std::vector<int> bus_ids, const std::vector<std::pair<int, int>>& edges,
                           Eigen::VectorXd b0, Eigen::VectorXd d_max, Eigen::VectorXd g_max,
                           std::vector<int> gen_bus, Eigen::MatrixXd L, std::vector<int> refs, double xi);

// Orthonormal basis of span(A(S)) grown one edge at a time, with the
// residuals of b0 and every c^i kept orthogonal to it.
class ProjectionEvaluator {
 public:
  explicit ProjectionEvaluator(const MetricContext& ctx);

  // true when the edge enlarged the span
  bool append(int edge);
  // J(S) - J(S + edge), without modifying the state
  double gain(int edge) const;

  double J() const;
  double f() const { return R_.col(0).squaredNorm(); }
  double h_target(int t) const { return R_.col(t + 1).squaredNorm(); }
  double h_gen(int gen) const;
  int rank() const { return k_; }
  Eigen::MatrixXd basis() const { return Q_.leftCols(k_); }
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;

 private:
  double remainder_sq(int a, int b, Eigen::VectorXd* w) const;

  const MetricContext* ctx_;
  Eigen::MatrixXd Q_;
  int k_ = 0;
  Eigen::MatrixXd R_;
  Eigen::VectorXd weight_;
};

inline constexpr double kRankTol = 1e-10;

// Squared distance from v to the column span of A_S.
double subspace_distance_sq(const Eigen::MatrixXd& A_S, const Eigen::VectorXd& v);

double f_value(const MetricContext& ctx, const std::vector<int>& S);
double h_value(const MetricContext& ctx, const std::vector<int>& S, int gen);
double J_value(const MetricContext& ctx, const std::vector<int>& S);
Eigen::VectorXd h_values(const MetricContext& ctx, const std::vector<int>& S);

struct DykstraOptions {
  double tol = 1e-8;
  int max_iter = 10000;
};

// Constrained imbalance: distance from b0 to span(A(S)) intersected with
// the box [-g_max, d_max].
double F_value(const MetricContext& ctx, const std::vector<int>& S, DykstraOptions opt = {});

// Equality-constrained non-coherency of one generator; S must place every
// reference in its own component.
double H_constrained(const MetricContext& ctx, const std::vector<int>& S, int gen);

double noncoherency(const Eigen::MatrixXd& L, const Eigen::MatrixXd& Lg);

double lambda_min_C(const MetricContext& ctx);
// min over all s-column subsets of lambda_min(C(S)); throws past max_subsets
double sparse_lambda_min(const MetricContext& ctx, int s, long long max_subsets = 200000);
double submodularity_ratio_bound(const MetricContext& ctx, int k, int u_size);

}  // namespace island
