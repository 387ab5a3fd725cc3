#include "islanding/coherency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "islanding/errors.hpp"

namespace island {

Eigen::MatrixXd schur_reduce(const Eigen::MatrixXd& B, const std::vector<int>& keep) {
  const int N = static_cast<int>(B.rows());
  if (B.cols() != N) throw ConfigError("schur_reduce: matrix must be square");
  std::vector<char> kept(N, 0);
  for (int k : keep) {
    if (k < 0 || k >= N || kept[k]) throw ConfigError("schur_reduce: bad keep index");
    kept[k] = 1;
  }
  std::vector<int> elim;
  for (int i = 0; i < N; ++i)
    if (!kept[i]) elim.push_back(i);
  const int a = static_cast<int>(keep.size()), e = static_cast<int>(elim.size());

  Eigen::MatrixXd Bkk(a, a), Bke(a, e), Bee(e, e);
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < a; ++j) Bkk(i, j) = B(keep[i], keep[j]);
    for (int j = 0; j < e; ++j) Bke(i, j) = B(keep[i], elim[j]);
  }
  for (int i = 0; i < e; ++i)
    for (int j = 0; j < e; ++j) Bee(i, j) = B(elim[i], elim[j]);
  if (e == 0) return Bkk;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(Bee);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw NumericalError("Kron reduction: eliminated block is singular (isolated subnetwork)");
  Eigen::MatrixXd R = Bkk - Bke * lu.solve(Bke.transpose());
  return 0.5 * (R + R.transpose());
}

Eigen::MatrixXd kron_reduce(const PowerNetwork& net) {
  const int m = net.num_buses(), n = net.num_generators();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m + n, m + n);
  auto couple = [&B](int a, int b, double y) {
    B(a, b) += y;
    B(b, a) += y;
    B(a, a) -= y;
    B(b, b) -= y;
  };
  for (int k = 0; k < net.num_branches(); ++k) {
    auto [a, b] = net.edge_ends(k);
    couple(a, b, 1.0 / net.branches()[k].x_pu);
  }
  for (int g = 0; g < n; ++g) couple(m + g, net.gen_bus_index(g), 1.0 / net.generators()[g].xd_prime_pu);
  std::vector<int> keep(n);
  std::iota(keep.begin(), keep.end(), m);
  return schur_reduce(B, keep);
}

Eigen::VectorXd inertia_diagonal(const PowerNetwork& net) {
  Eigen::VectorXd M(net.num_generators());
  for (int g = 0; g < net.num_generators(); ++g) M[g] = 2.0 * net.generators()[g].inertia_s / net.omega0();
  return M;
}

Eigen::VectorXd generator_voltages(const PowerNetwork& net) {
  Eigen::VectorXd V(net.num_generators());
  for (int g = 0; g < net.num_generators(); ++g) V[g] = net.generators()[g].vm_pu;
  return V;
}

Eigen::VectorXd internal_angles(const PowerNetwork& net, const OperatingPoint& op) {
  Eigen::VectorXd d(net.num_generators());
  for (int g = 0; g < net.num_generators(); ++g) {
    const auto& gen = net.generators()[g];
    double s = op.gen_pg_mw[g] / net.base_mva() * gen.xd_prime_pu / gen.vm_pu;
    d[g] = op.angles[net.gen_bus_index(g)] + std::asin(std::clamp(s, -1.0, 1.0));
  }
  return d;
}

Eigen::MatrixXd build_K(const Eigen::MatrixXd& B_red, const Eigen::VectorXd& V, const Eigen::VectorXd& delta) {
  const Eigen::Index n = B_red.rows();
  if (B_red.cols() != n || V.size() != n || delta.size() != n) throw ConfigError("build_K: dimension mismatch");
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) K(i, j) = -V[i] * V[j] * B_red(i, j) * std::cos(delta[i] - delta[j]);
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) s += K(i, j);
    K(i, i) = -s;
  }
  return K;
}

Eigen::MatrixXd build_K(const PowerNetwork& net, const OperatingPoint& op, const Eigen::MatrixXd& B_red) {
  return build_K(B_red, generator_voltages(net), internal_angles(net, op));
}

SlowModes slow_modes(const Eigen::VectorXd& M, const Eigen::MatrixXd& K, int r) {
  const int n = static_cast<int>(K.rows());
  if (K.cols() != n || M.size() != n) throw ConfigError("slow_modes: dimension mismatch");
  if (r < 1 || r > n)
    throw ConfigError("slow_modes: r = " + std::to_string(r) + " must lie in [1, " + std::to_string(n) + "]");
  if (M.minCoeff() <= 0) throw ConfigError("slow_modes: inertia must be positive");

  Eigen::VectorXd s = M.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd A = s.asDiagonal() * K * s.asDiagonal();
  A = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("slow_modes: eigensolver failed");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&ev](int a, int b) {
    double fa = std::abs(ev[a]), fb = std::abs(ev[b]);
    if (fa != fb) return fa < fb;
    return ev[a] < ev[b];
  });

  SlowModes out;
  out.sigma.resize(r);
  out.U.resize(n, r);
  for (int c = 0; c < r; ++c) {
    out.sigma[c] = ev[order[c]];
    Eigen::VectorXd u = s.asDiagonal() * es.eigenvectors().col(order[c]);
    // fix the sign so the largest entry is positive
    Eigen::Index big = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(u[i]) > std::abs(u[big]) * (1 + 1e-9)) big = i;
    if (u[big] < 0) u = -u;
    out.U.col(c) = u;
  }
  return out;
}

Eigen::MatrixXd coherency_matrix(const Eigen::MatrixXd& U, const std::vector<int>& refs) {
  const int r = static_cast<int>(U.cols());
  if (static_cast<int>(refs.size()) != r)
    throw ConfigError("coherency_matrix: need exactly " + std::to_string(r) + " reference generators");
  Eigen::MatrixXd U1(r, r);
  for (int k = 0; k < r; ++k) {
    if (refs[k] < 0 || refs[k] >= U.rows()) throw ConfigError("coherency_matrix: reference index out of range");
    U1.row(k) = U.row(refs[k]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U1);
  const auto& sv = svd.singularValues();
  if (r > 0 && (sv[r - 1] == 0.0 || sv[0] / sv[r - 1] > 1e12)) throw NumericalError("reference rows dependent");
  Eigen::MatrixXd L = U1.transpose().fullPivLu().solve(U.transpose()).transpose();
  return L;
}

CoherencyModel build_coherency_model(const PowerNetwork& net, const OperatingPoint& op, int r) {
  CoherencyModel model;
  model.B_red = kron_reduce(net);
  model.M = inertia_diagonal(net);
  model.V = generator_voltages(net);
  model.delta = internal_angles(net, op);
  model.K = build_K(model.B_red, model.V, model.delta);
  SlowModes sm = slow_modes(model.M, model.K, r);
  model.sigma = sm.sigma;
  model.U = sm.U;
  return model;
}

void set_references(CoherencyModel& model, const std::vector<int>& refs) {
  model.L = coherency_matrix(model.U, refs);
  model.refs = refs;
}

}  // namespace island
