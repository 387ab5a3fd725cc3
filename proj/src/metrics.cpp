#include "islanding/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "islanding/errors.hpp"
#include "islanding/union_find.hpp"

namespace island {

Eigen::MatrixXd MetricContext::incidence(const std::vector<int>& S) const {
  std::vector<int> cols = S;
  std::sort(cols.begin(), cols.end());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] < 0 || cols[c] >= num_edges()) throw ConfigError("edge " + std::to_string(cols[c]) + " is not in E");
    A(edges[cols[c]].first, c) = 1.0;
    A(edges[cols[c]].second, c) = -1.0;
  }
  return A;
}

Eigen::MatrixXd MetricContext::incidence() const {
  std::vector<int> all(edges.size());
  std::iota(all.begin(), all.end(), 0);
  return incidence(all);
}

Eigen::MatrixXd MetricContext::C() const {
  Eigen::MatrixXd A = incidence();
  return A.transpose() * A / (2.0 * n);
}

int MetricContext::target_of(int gen) const {
  auto it = std::lower_bound(target_gen.begin(), target_gen.end(), gen);
  if (it == target_gen.end() || *it != gen) return -1;
  return static_cast<int>(it - target_gen.begin());
}

MetricContext make_context(std::vector<int> bus_ids, const std::vector<std::pair<int, int>>& edges,
                           Eigen::VectorXd b0, Eigen::VectorXd d_max, Eigen::VectorXd g_max,
                           std::vector<int> gen_bus, Eigen::MatrixXd L, std::vector<int> refs, double xi) {
  MetricContext ctx;
  ctx.m = static_cast<int>(bus_ids.size());
  ctx.n = static_cast<int>(gen_bus.size());
  if (b0.size() != ctx.m || d_max.size() != ctx.m || g_max.size() != ctx.m)
    throw ConfigError("metric context: bus vector length mismatch");
  if (L.rows() != ctx.n || L.cols() != static_cast<Eigen::Index>(refs.size()))
    throw ConfigError("metric context: L must be n x r");
  if (!(xi >= 0)) throw ConfigError("xi must be nonnegative");
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= ctx.m || b >= ctx.m || a == b) throw ConfigError("metric context: bad edge");
    ctx.edges.emplace_back(bus_ids[a] < bus_ids[b] ? std::pair(a, b) : std::pair(b, a));
  }
  for (int g : gen_bus)
    if (g < 0 || g >= ctx.m) throw ConfigError("metric context: bad generator bus");
  std::vector<char> is_ref(ctx.n, 0);
  for (int r : refs) {
    if (r < 0 || r >= ctx.n || is_ref[r]) throw ConfigError("metric context: references must be distinct generators");
    is_ref[r] = 1;
    ctx.ref_bus.push_back(gen_bus[r]);
  }
  ctx.bus_ids = std::move(bus_ids);
  ctx.b0 = std::move(b0);
  ctx.d_max = std::move(d_max);
  ctx.g_max = std::move(g_max);
  ctx.gen_bus = std::move(gen_bus);
  ctx.refs = std::move(refs);
  ctx.L = std::move(L);
  ctx.xi = xi;

  for (int g = 0; g < ctx.n; ++g)
    if (!is_ref[g]) ctx.target_gen.push_back(g);
  ctx.targets = Eigen::MatrixXd::Zero(ctx.m, static_cast<Eigen::Index>(ctx.target_gen.size()));
  for (std::size_t t = 0; t < ctx.target_gen.size(); ++t) {
    int g = ctx.target_gen[t];
    ctx.targets(ctx.gen_bus[g], t) += 1.0;
    for (std::size_t k = 0; k < ctx.ref_bus.size(); ++k) ctx.targets(ctx.ref_bus[k], t) -= ctx.L(g, k);
  }
  return ctx;
}

MetricContext make_context(const PowerNetwork& net, const OperatingPoint& op, const Eigen::MatrixXd& L,
                           const std::vector<int>& refs, double xi) {
  std::vector<int> ids;
  for (const auto& b : net.buses()) ids.push_back(b.id);
  std::vector<int> gen_bus;
  for (int g = 0; g < net.num_generators(); ++g) gen_bus.push_back(net.gen_bus_index(g));
  return make_context(std::move(ids), net.edge_ends(), op.b0, net.d_max(), net.g_max(), std::move(gen_bus), L, refs,
                      xi);
}

// ---------------------------------------------------------------------------

ProjectionEvaluator::ProjectionEvaluator(const MetricContext& ctx) : ctx_(&ctx) {
  const int t = static_cast<int>(ctx.target_gen.size());
  Q_ = Eigen::MatrixXd::Zero(ctx.m, ctx.m);
  R_.resize(ctx.m, t + 1);
  R_.col(0) = ctx.b0;
  if (t > 0) R_.rightCols(t) = ctx.targets;
  weight_ = Eigen::VectorXd::Ones(t + 1);
  weight_[0] = ctx.xi;
}

double ProjectionEvaluator::remainder_sq(int a, int b, Eigen::VectorXd* w) const {
  if (!w && k_ > 0) {
    double proj = (Q_.row(a).head(k_) - Q_.row(b).head(k_)).squaredNorm();
    double rem = 2.0 - proj;
    if (rem > 1e-6) return rem;
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ctx_->m);
  v[a] = 1.0;
  v[b] = -1.0;
  if (k_ > 0) {
    auto Q = Q_.leftCols(k_);
    for (int pass = 0; pass < 2; ++pass) v -= Q * (Q.transpose() * v);
  }
  double rem = v.squaredNorm();
  if (rem <= kRankTol * kRankTol * 2.0) rem = 0.0;
  if (w) *w = std::move(v);
  return rem;
}

bool ProjectionEvaluator::append(int edge) {
  if (edge < 0 || edge >= ctx_->num_edges()) throw ConfigError("edge " + std::to_string(edge) + " is not in E");
  auto [a, b] = ctx_->edges[edge];
  Eigen::VectorXd w;
  double rem = remainder_sq(a, b, &w);
  if (rem == 0.0) return false;
  Eigen::VectorXd q = w / std::sqrt(rem);
  Q_.col(k_++) = q;
  R_ -= q * (q.transpose() * R_);
  return true;
}

double ProjectionEvaluator::gain(int edge) const {
  auto [a, b] = ctx_->edges[edge];
  double rem = remainder_sq(a, b, nullptr);
  if (rem == 0.0) return 0.0;
  Eigen::VectorXd d = (R_.row(a) - R_.row(b)).transpose();
  return weight_.dot(d.cwiseAbs2()) / rem;
}

double ProjectionEvaluator::J() const { return weight_.dot(R_.colwise().squaredNorm().transpose()); }

double ProjectionEvaluator::h_gen(int gen) const {
  int t = ctx_->target_of(gen);
  return t < 0 ? 0.0 : h_target(t);
}

Eigen::VectorXd ProjectionEvaluator::project(const Eigen::VectorXd& v) const {
  if (k_ == 0) return Eigen::VectorXd::Zero(v.size());
  auto Q = Q_.leftCols(k_);
  return Q * (Q.transpose() * v);
}

double subspace_distance_sq(const Eigen::MatrixXd& A_S, const Eigen::VectorXd& v) {
  if (A_S.rows() != v.size()) throw ConfigError("subspace_distance_sq: dimension mismatch");
  const Eigen::Index m = A_S.rows();
  Eigen::MatrixXd Q(m, std::min(m, A_S.cols()));
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < A_S.cols() && k < m; ++c) {
    Eigen::VectorXd w = A_S.col(c);
    double norm = w.norm();
    if (norm == 0.0) continue;
    for (int pass = 0; pass < 2 && k > 0; ++pass) w -= Q.leftCols(k) * (Q.leftCols(k).transpose() * w);
    double wn = w.norm();
    if (wn <= kRankTol * norm) continue;
    Q.col(k++) = w / wn;
  }
  Eigen::VectorXd r = v;
  for (int pass = 0; pass < 2 && k > 0; ++pass) r -= Q.leftCols(k) * (Q.leftCols(k).transpose() * r);
  return r.squaredNorm();
}

namespace {

ProjectionEvaluator evaluate(const MetricContext& ctx, const std::vector<int>& S) {
  ProjectionEvaluator ev(ctx);
  for (int e : S) ev.append(e);
  return ev;
}

}  // namespace

double f_value(const MetricContext& ctx, const std::vector<int>& S) { return evaluate(ctx, S).f(); }

double h_value(const MetricContext& ctx, const std::vector<int>& S, int gen) {
  if (gen < 0 || gen >= ctx.n) throw ConfigError("generator index out of range");
  return evaluate(ctx, S).h_gen(gen);
}

double J_value(const MetricContext& ctx, const std::vector<int>& S) { return evaluate(ctx, S).J(); }

Eigen::VectorXd h_values(const MetricContext& ctx, const std::vector<int>& S) {
  ProjectionEvaluator ev = evaluate(ctx, S);
  Eigen::VectorXd h(ctx.n);
  for (int g = 0; g < ctx.n; ++g) h[g] = ev.h_gen(g);
  return h;
}

double F_value(const MetricContext& ctx, const std::vector<int>& S, DykstraOptions opt) {
  ProjectionEvaluator ev = evaluate(ctx, S);
  const Eigen::VectorXd& b0 = ctx.b0;
  const Eigen::VectorXd lo = -ctx.g_max, hi = ctx.d_max;
  const double scale = std::max(1.0, b0.norm());
  Eigen::VectorXd x = b0, p = Eigen::VectorXd::Zero(ctx.m), q = Eigen::VectorXd::Zero(ctx.m);
  Eigen::VectorXd y = x;
  double step = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    y = ev.project(x + p);
    p = x + p - y;
    Eigen::VectorXd xn = (y + q).cwiseMax(lo).cwiseMin(hi);
    q = y + q - xn;
    step = (xn - x).norm();
    x = std::move(xn);
    if (step <= opt.tol * scale && (y - x).norm() <= opt.tol * scale) return (y - b0).squaredNorm();
  }
  throw NumericalError("F(S): Dykstra projections did not converge in " + std::to_string(opt.max_iter) +
                       " iterations (last step " + std::to_string(step) + ", residual " +
                       std::to_string((y - b0).squaredNorm()) + ")");
}

double H_constrained(const MetricContext& ctx, const std::vector<int>& S, int gen) {
  if (gen < 0 || gen >= ctx.n) throw ConfigError("generator index out of range");
  UnionFind uf(ctx.m);
  for (int e : S) {
    if (e < 0 || e >= ctx.num_edges()) throw ConfigError("edge " + std::to_string(e) + " is not in E");
    uf.unite(ctx.edges[e].first, ctx.edges[e].second);
  }
  for (std::size_t a = 0; a < ctx.ref_bus.size(); ++a)
    for (std::size_t b = a + 1; b < ctx.ref_bus.size(); ++b)
      if (uf.connected(ctx.ref_bus[a], ctx.ref_bus[b]))
        throw ValidationError("H_i(S) needs a valid partition: references " + std::to_string(ctx.refs[a] + 1) +
                              " and " + std::to_string(ctx.refs[b] + 1) + " share an island");
  int t = ctx.target_of(gen);
  if (t < 0) return 0.0;
  const Eigen::VectorXd c = ctx.targets.col(t);

  std::vector<char> free_row(ctx.m, 0);
  free_row[ctx.gen_bus[gen]] = 1;
  for (int b : ctx.ref_bus) free_row[b] = 1;
  std::vector<int> zero_rows;
  for (int j = 0; j < ctx.m; ++j)
    if (!free_row[j]) zero_rows.push_back(j);

  Eigen::MatrixXd A = ctx.incidence(S);
  if (A.cols() == 0) return c.squaredNorm();
  Eigen::MatrixXd N;
  if (zero_rows.empty()) {
    N = Eigen::MatrixXd::Identity(A.cols(), A.cols());
  } else {
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(zero_rows.size()), A.cols());
    for (std::size_t r = 0; r < zero_rows.size(); ++r) Z.row(r) = A.row(zero_rows[r]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > 1e-10 * std::max(1.0, sv[0])) ++rank;
    N = svd.matrixV().rightCols(A.cols() - rank);
  }
  if (N.cols() == 0) return c.squaredNorm();
  return subspace_distance_sq(A * N, c);
}

double noncoherency(const Eigen::MatrixXd& L, const Eigen::MatrixXd& Lg) {
  if (L.rows() != Lg.rows() || L.cols() != Lg.cols()) throw ConfigError("noncoherency: shape mismatch");
  return (L - Lg).squaredNorm();
}

double lambda_min_C(const MetricContext& ctx) {
  if (ctx.num_edges() == 0) throw ConfigError("lambda_min(C): graph has no edges");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ctx.C(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double sparse_lambda_min(const MetricContext& ctx, int s, long long max_subsets) {
  const int l = ctx.num_edges();
  if (s < 1 || s > l) throw ConfigError("sparse eigenvalue: s must lie in [1, " + std::to_string(l) + "]");
  long double count = 1;
  for (int i = 0; i < s; ++i) count = count * (l - i) / (i + 1);
  if (count > static_cast<long double>(max_subsets))
    throw ConfigError("sparse eigenvalue: C(" + std::to_string(l) + ", " + std::to_string(s) +
                      ") subsets is too many to enumerate; use lambda_min(C) instead");
  Eigen::MatrixXd C = ctx.C();
  std::vector<int> idx(s);
  std::iota(idx.begin(), idx.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd sub(s, s);
  while (true) {
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b) sub(a, b) = C(idx[a], idx[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
    best = std::min(best, es.eigenvalues()[0]);
    int i = s - 1;
    while (i >= 0 && idx[i] == l - s + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

double submodularity_ratio_bound(const MetricContext& ctx, int k, int u_size) {
  if (k < 1) throw ConfigError("submodularity ratio bound: k must be at least 1");
  if (u_size < 0) throw ConfigError("submodularity ratio bound: |U| must be nonnegative");
  int s = std::min(k + u_size, ctx.num_edges());
  return sparse_lambda_min(ctx, s);
}

}  // namespace island
