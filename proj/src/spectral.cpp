#include "islanding/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "islanding/errors.hpp"
#include "islanding/union_find.hpp"

namespace island {

CouplingGraph coupling_graph(const CoherencyModel& model) {
  const Eigen::Index n = model.B_red.rows();
  CouplingGraph cg;
  cg.W = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j)
        cg.W(i, j) = std::abs(model.V[i] * model.V[j] * model.B_red(i, j) * std::cos(model.delta[i] - model.delta[j])) *
                     (1.0 / model.M[i] + 1.0 / model.M[j]);
  return cg;
}

double coupling_cut(const CouplingGraph& cg, const std::vector<int>& a, const std::vector<int>& b) {
  double s = 0.0;
  for (int i : a)
    for (int j : b) s += cg.W(i, j);
  return s;
}

namespace {

Bipartition normalize(std::vector<int> a, std::vector<int> b, double cut) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (b.front() < a.front()) std::swap(a, b);
  return {std::move(a), std::move(b), cut};
}

}  // namespace

Bipartition generator_bipartition(const CouplingGraph& cg, const std::vector<int>& nodes, FiedlerScaling scaling) {
  const int k = static_cast<int>(nodes.size());
  if (k < 2) throw ConfigError("generator bipartition needs at least two generators");

  // disconnected coupling graph: split off the component of the first node
  UnionFind uf(k);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (cg.W(nodes[a], nodes[b]) > 0) uf.unite(a, b);
  std::vector<int> first, rest;
  for (int a = 0; a < k; ++a) (uf.connected(a, 0) ? first : rest).push_back(nodes[a]);
  if (!rest.empty()) return normalize(first, rest, coupling_cut(cg, first, rest));

  Eigen::MatrixXd W(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) W(a, b) = a == b ? 0.0 : cg.W(nodes[a], nodes[b]);
  Eigen::VectorXd d = W.rowwise().sum();
  Eigen::VectorXd dis = d.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd Ln = Eigen::MatrixXd::Identity(k, k) - dis.asDiagonal() * W * dis.asDiagonal();
  Ln = 0.5 * (Ln + Ln.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ln);
  if (es.info() != Eigen::Success) throw NumericalError("generator bipartition: eigensolver failed");
  Eigen::VectorXd fiedler = es.eigenvectors().col(1);
  if (scaling == FiedlerScaling::kDegreeScaled) fiedler = dis.asDiagonal() * fiedler;

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&fiedler](int a, int b) { return fiedler[a] < fiedler[b]; });

  Bipartition best;
  bool have = false;
  for (int split = 1; split < k; ++split) {
    std::vector<int> a, b;
    for (int t = 0; t < k; ++t) (t < split ? a : b).push_back(nodes[order[t]]);
    double cut = coupling_cut(cg, a, b);
    if (!have || cut < best.cut - 1e-12 * std::max(1.0, best.cut)) {
      best = normalize(a, b, cut);
      have = true;
    }
  }
  return best;
}

Bipartition generator_bipartition(const CouplingGraph& cg, FiedlerScaling scaling) {
  std::vector<int> all(cg.W.rows());
  std::iota(all.begin(), all.end(), 0);
  return generator_bipartition(cg, all, scaling);
}

// ---------------------------------------------------------------------------

namespace {

class Dinic {
 public:
  explicit Dinic(int n) : adj_(n), level_(n), it_(n) {}

  void add_edge(int u, int v, double cap_uv, double cap_vu) {
    adj_[u].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({v, cap_uv});
    adj_[v].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({u, cap_vu});
  }

  double max_flow(int s, int t) {
    double total = 0.0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (true) {
        double f = dfs(s, t, std::numeric_limits<double>::infinity());
        if (f <= 0) break;
        total += f;
      }
    }
    return total;
  }

  // nodes reachable from s in the residual graph
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int id : adj_[u]) {
        const Arc& a = arcs_[id];
        if (a.cap > eps_ && !seen[a.to]) {
          seen[a.to] = 1;
          q.push(a.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    int to;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int id : adj_[u]) {
        const Arc& a = arcs_[id];
        if (a.cap > eps_ && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          q.push(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int u, int t, double pushed) {
    if (u == t) return pushed;
    for (int& i = it_[u]; i < static_cast<int>(adj_[u].size()); ++i) {
      int id = adj_[u][i];
      Arc& a = arcs_[id];
      if (a.cap <= eps_ || level_[a.to] != level_[u] + 1) continue;
      double f = dfs(a.to, t, std::min(pushed, a.cap));
      if (f > 0) {
        a.cap -= f;
        arcs_[id ^ 1].cap += f;
        return f;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<Arc> arcs_;
  std::vector<int> level_;
  std::vector<int> it_;
  double eps_ = 1e-12;
};

}  // namespace

MinCut constrained_mincut(const PowerNetwork& net, const OperatingPoint& op, const std::vector<int>& T1,
                          const std::vector<int>& T2, const std::vector<int>& buses) {
  const int m = net.num_buses();
  if (T1.empty() || T2.empty()) throw ConfigError("constrained min-cut: both terminal sets must be nonempty");
  std::vector<char> inside(m, buses.empty() ? 1 : 0);
  for (int b : buses) inside[b] = 1;
  std::vector<char> term(m, 0);
  for (int b : T1) {
    if (!inside[b]) throw ConfigError("constrained min-cut: terminal outside the subsystem");
    term[b] |= 1;
  }
  for (int b : T2) {
    if (!inside[b]) throw ConfigError("constrained min-cut: terminal outside the subsystem");
    term[b] |= 2;
  }
  for (int b = 0; b < m; ++b)
    if (term[b] == 3)
      throw ConfigError("constrained min-cut: bus " + std::to_string(net.buses()[b].id) + " is in both terminal sets");

  const int source = m, sink = m + 1;
  Dinic flow(m + 2);
  double total_cap = 0.0;
  for (int k = 0; k < net.num_branches(); ++k) {
    auto [a, b] = net.edge_ends(k);
    if (!inside[a] || !inside[b]) continue;
    double c = std::abs(op.flows[k]);
    flow.add_edge(a, b, c, c);
    total_cap += c;
  }
  const double big = 2.0 * total_cap + 1.0;
  for (int b : T1) flow.add_edge(source, b, big, 0.0);
  for (int b : T2) flow.add_edge(b, sink, big, 0.0);

  MinCut out;
  out.flow = flow.max_flow(source, sink);
  std::vector<char> side = flow.source_side(source);
  for (int b = 0; b < m; ++b) {
    if (!inside[b]) continue;
    (side[b] ? out.side1 : out.side2).push_back(b);
  }
  for (int k = 0; k < net.num_branches(); ++k) {
    auto [a, b] = net.edge_ends(k);
    if (!inside[a] || !inside[b]) continue;
    if (side[a] != side[b]) {
      out.cut_edges.push_back(k);
      out.value += std::abs(op.flows[k]);
    }
  }
  if (std::abs(out.flow - out.value) > 1e-9 * std::max(1.0, out.value))
    throw NumericalError("constrained min-cut: flow " + std::to_string(out.flow) + " differs from cut " +
                         std::to_string(out.value));
  return out;
}

// ---------------------------------------------------------------------------

SpectralResult two_step_partition(const PowerNetwork& net, const OperatingPoint& op, const CoherencyModel& model,
                                  int r, FiedlerScaling scaling) {
  const int n = net.num_generators();
  if (r < 2) throw ConfigError("spectral baseline needs r >= 2");
  if (r > n) throw ConfigError("cannot reach r islands");
  CouplingGraph cg = coupling_graph(model);

  struct Subsystem {
    std::vector<int> gens;
    std::vector<int> buses;
  };
  std::vector<Subsystem> subs(1);
  subs[0].gens.resize(n);
  std::iota(subs[0].gens.begin(), subs[0].gens.end(), 0);
  subs[0].buses.resize(net.num_buses());
  std::iota(subs[0].buses.begin(), subs[0].buses.end(), 0);

  SpectralResult res;
  while (static_cast<int>(subs.size()) < r) {
    int pick = -1;
    Bipartition best;
    for (std::size_t s = 0; s < subs.size(); ++s) {
      if (subs[s].gens.size() < 2) continue;
      Bipartition bp = generator_bipartition(cg, subs[s].gens, scaling);
      if (pick < 0 || bp.cut < best.cut - 1e-12 * std::max(1.0, best.cut)) {
        pick = static_cast<int>(s);
        best = bp;
      }
    }
    if (pick < 0) throw ConfigError("cannot reach r islands: no subsystem has two generators");

    auto buses_of = [&net](const std::vector<int>& gens) {
      std::vector<int> b;
      for (int g : gens) b.push_back(net.gen_bus_index(g));
      std::sort(b.begin(), b.end());
      b.erase(std::unique(b.begin(), b.end()), b.end());
      return b;
    };
    SpectralSplit split;
    split.gens1 = best.side1;
    split.gens2 = best.side2;
    split.coupling = best.cut;
    split.cut = constrained_mincut(net, op, buses_of(best.side1), buses_of(best.side2), subs[pick].buses);

    Subsystem a{best.side1, split.cut.side1}, b{best.side2, split.cut.side2};
    subs.erase(subs.begin() + pick);
    subs.insert(subs.begin() + pick, b);
    subs.insert(subs.begin() + pick, a);
    res.splits.push_back(std::move(split));
  }

  res.label.assign(net.num_buses(), -1);
  for (std::size_t s = 0; s < subs.size(); ++s) {
    for (int b : subs[s].buses) res.label[b] = static_cast<int>(s);
    res.gen_groups.push_back(subs[s].gens);
  }
  return res;
}

IslandingSolution two_step_islanding(const PowerNetwork& net, const OperatingPoint& op, const CoherencyModel& model,
                                     const MetricContext& ctx, int r, SpectralResult* detail) {
  SpectralResult res = two_step_partition(net, op, model, r);
  IslandingSolution sol = solution_from_labels(ctx, res.label);
  sol.method = "spectral";
  if (detail) *detail = std::move(res);
  return sol;
}

}  // namespace island
