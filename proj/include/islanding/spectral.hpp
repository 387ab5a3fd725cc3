#pragma once

#include <vector>

#include <Eigen/Dense>

#include "islanding/coherency.hpp"
#include "islanding/islanding.hpp"
#include "islanding/netcase.hpp"

namespace island {

struct CouplingGraph {
  Eigen::MatrixXd W;  // n x n, zero diagonal
};

// w_ij = |V_i V_j B_ij cos(delta_i - delta_j)| (1/M_i + 1/M_j)
CouplingGraph coupling_graph(const CoherencyModel& model);

double coupling_cut(const CouplingGraph& cg, const std::vector<int>& a, const std::vector<int>& b);

// Ordering vector for the sweep: the eigenvector z of the normalized
// Laplacian itself, or D^{-1/2} z (the relaxed normalized-cut indicator).
enum class FiedlerScaling { kDegreeScaled, kSymmetric };

struct Bipartition {
  std::vector<int> side1;  // holds the smallest generator index
  std::vector<int> side2;
  double cut = 0.0;
};

// Fiedler sweep on the normalized Laplacian of the subgraph induced by nodes.
Bipartition generator_bipartition(const CouplingGraph& cg, const std::vector<int>& nodes,
                                  FiedlerScaling scaling = FiedlerScaling::kDegreeScaled);
Bipartition generator_bipartition(const CouplingGraph& cg, FiedlerScaling scaling = FiedlerScaling::kDegreeScaled);

struct MinCut {
  std::vector<int> side1;  // bus positions, contains T1
  std::vector<int> side2;
  std::vector<int> cut_edges;
  double value = 0.0;  // sum of |p| over cut_edges
  double flow = 0.0;   // max-flow value
};

// Min |p|-weighted cut separating T1 from T2 inside the bus subset (all buses
// when empty). Bus arguments are positions.
MinCut constrained_mincut(const PowerNetwork& net, const OperatingPoint& op, const std::vector<int>& T1,
                          const std::vector<int>& T2, const std::vector<int>& buses = {});

struct SpectralSplit {
  std::vector<int> gens1, gens2;
  double coupling = 0.0;
  MinCut cut;
};

struct SpectralResult {
  std::vector<int> label;  // subsystem per bus position
  std::vector<std::vector<int>> gen_groups;
  std::vector<SpectralSplit> splits;
};

SpectralResult two_step_partition(const PowerNetwork& net, const OperatingPoint& op, const CoherencyModel& model,
                                   int r, FiedlerScaling scaling = FiedlerScaling::kDegreeScaled);

// Partition plus the shared metrics; needs a context built with the same refs.
IslandingSolution two_step_islanding(const PowerNetwork& net, const OperatingPoint& op, const CoherencyModel& model,
                                     const MetricContext& ctx, int r, SpectralResult* detail = nullptr);

}  // namespace island
