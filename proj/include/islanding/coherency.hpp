#pragma once

#include <vector>

#include <Eigen/Dense>

#include "islanding/netcase.hpp"

namespace island {

struct SlowModes {
  Eigen::VectorXd sigma;  // r eigenvalues, smallest magnitude first
  Eigen::MatrixXd U;      // n x r, M-orthonormal columns
};

struct CoherencyModel {
  Eigen::MatrixXd B_red;  // reduced susceptance at internal generator nodes
  Eigen::VectorXd M;      // diagonal of the inertia matrix, 2H/omega0
  Eigen::VectorXd V;      // internal voltage magnitudes
  Eigen::VectorXd delta;  // internal rotor angles, rad
  Eigen::MatrixXd K;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd U;
  Eigen::MatrixXd L;      // empty until references are set
  std::vector<int> refs;
};

// Schur complement of B onto the rows/columns in keep.
Eigen::MatrixXd schur_reduce(const Eigen::MatrixXd& B, const std::vector<int>& keep);

// Imaginary part of the bus admittance matrix reduced to the generator
// internal nodes (series reactances and xd' only).
Eigen::MatrixXd kron_reduce(const PowerNetwork& net);

Eigen::VectorXd inertia_diagonal(const PowerNetwork& net);
Eigen::VectorXd generator_voltages(const PowerNetwork& net);

// Bus angle plus the load angle asin(P xd' / V) of each machine.
Eigen::VectorXd internal_angles(const PowerNetwork& net, const OperatingPoint& op);

Eigen::MatrixXd build_K(const Eigen::MatrixXd& B_red, const Eigen::VectorXd& V, const Eigen::VectorXd& delta);
Eigen::MatrixXd build_K(const PowerNetwork& net, const OperatingPoint& op, const Eigen::MatrixXd& B_red);

SlowModes slow_modes(const Eigen::VectorXd& M, const Eigen::MatrixXd& K, int r);

Eigen::MatrixXd coherency_matrix(const Eigen::MatrixXd& U, const std::vector<int>& refs);

CoherencyModel build_coherency_model(const PowerNetwork& net, const OperatingPoint& op, int r);
void set_references(CoherencyModel& model, const std::vector<int>& refs);

}  // namespace island
