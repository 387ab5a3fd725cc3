#include "islanding/refsel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "islanding/errors.hpp"

namespace island {

double log_gramian(const Eigen::MatrixXd& U, const std::vector<int>& T) {
  if (T.empty()) return 0.0;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(T.size()), U.cols());
  for (std::size_t k = 0; k < T.size(); ++k) {
    if (T[k] < 0 || T[k] >= U.rows()) throw ConfigError("log_gramian: row index out of range");
    rows.row(k) = U.row(T[k]);
  }
  if (rows.rows() > rows.cols()) return kNegInf;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 1e-10 * std::max(sv[0], 1e-300)) return kNegInf;
  double s = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) s += 2.0 * std::log(sv[i]);
  return s;
}

namespace {

void check_shape(const Eigen::MatrixXd& U, int r) {
  if (r < 1 || r > U.rows())
    throw ConfigError("reference selection: r = " + std::to_string(r) + " must lie in [1, " +
                      std::to_string(U.rows()) + "]");
}

}  // namespace

ReferenceSelection select_references_greedy(const Eigen::MatrixXd& U, int r) {
  check_shape(U, r);
  ReferenceSelection sel;
  double current = 0.0;
  const int n = static_cast<int>(U.rows());
  while (static_cast<int>(sel.refs.size()) < r) {
    int best = -1;
    double best_gain = kNegInf, best_value = kNegInf;
    std::vector<int> T = sel.refs;
    T.push_back(-1);
    for (int v = 0; v < n; ++v) {
      if (std::find(sel.refs.begin(), sel.refs.end(), v) != sel.refs.end()) continue;
      T.back() = v;
      double value = log_gramian(U, T);
      if (value == kNegInf) continue;
      double gain = value - current;
      if (best < 0 || gain > best_gain + 1e-12 * std::max(1.0, std::abs(best_gain))) {
        best = v;
        best_gain = gain;
        best_value = value;
      }
    }
    if (best < 0) throw NumericalError("rank-deficient eigenbasis");
    sel.refs.push_back(best);
    sel.gain_trace.push_back(best_gain);
    current = best_value;
  }
  return sel;
}

ReferenceSelection select_references_pivoting(const Eigen::MatrixXd& U, int r) {
  check_shape(U, r);
  Eigen::MatrixXd W = U;
  const int n = static_cast<int>(U.rows()), c = static_cast<int>(U.cols());
  std::vector<char> row_used(n, 0), col_used(c, 0);
  ReferenceSelection sel;
  const double scale = std::max(W.cwiseAbs().maxCoeff(), 1e-300);
  for (int step = 0; step < r; ++step) {
    int pr = -1, pc = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < c; ++j) {
        if (col_used[j]) continue;
        if (std::abs(W(i, j)) > best) {
          best = std::abs(W(i, j));
          pr = i;
          pc = j;
        }
      }
    }
    if (pr < 0 || best <= 1e-12 * scale) throw NumericalError("zero pivot before selecting r references");
    for (int i = 0; i < n; ++i) {
      if (i == pr || row_used[i]) continue;
      W.row(i) -= W(i, pc) / W(pr, pc) * W.row(pr);
    }
    row_used[pr] = 1;
    col_used[pc] = 1;
    sel.refs.push_back(pr);
    sel.gain_trace.push_back(best);
  }
  return sel;
}

}  // namespace island
