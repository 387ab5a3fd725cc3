#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace island {

struct ReferenceSelection {
  std::vector<int> refs;
  std::vector<double> gain_trace;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log det(U_T U_T'); kNegInf when the rows are dependent, 0 for empty T.
double log_gramian(const Eigen::MatrixXd& U, const std::vector<int>& T);

ReferenceSelection select_references_greedy(const Eigen::MatrixXd& U, int r);
ReferenceSelection select_references_pivoting(const Eigen::MatrixXd& U, int r);

}  // namespace island
