#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "islanding/metrics.hpp"
#include "islanding/netcase.hpp"

namespace testing {

using Edge = std::pair<int, int>;

inline std::string data_path(const std::string& name) { return std::string(ISLANDING_DATA_DIR) + "/" + name; }

// Random connected graph on m nodes: a random spanning tree plus extra edges
// (parallel edges allowed when allow_parallel is set).
inline std::vector<Edge> random_connected_graph(std::mt19937& rng, int m, int extra, bool allow_parallel = false) {
  std::vector<Edge> edges;
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int i = 1; i < m; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    int a = perm[i], b = perm[pick(rng)];
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::uniform_int_distribution<int> node(0, m - 1);
  for (int tries = 0; extra > 0 && tries < 50 * (extra + 1); ++tries) {
    int a = node(rng), b = node(rng);
    if (a == b) continue;
    Edge e{std::min(a, b), std::max(a, b)};
    if (!allow_parallel && std::find(edges.begin(), edges.end(), e) != edges.end()) continue;
    edges.push_back(e);
    --extra;
  }
  return edges;
}

// Random coherency-like L: rows sum to one, reference rows are identity.
inline Eigen::MatrixXd random_L(std::mt19937& rng, int n, const std::vector<int>& refs) {
  const int r = static_cast<int>(refs.size());
  std::uniform_real_distribution<double> u(-0.3, 1.0);
  Eigen::MatrixXd L(n, r);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < r; ++k) L(i, k) = u(rng);
    double s = L.row(i).sum();
    if (std::abs(s) < 0.2) s = 1.0;
    L.row(i) /= s;
  }
  for (int k = 0; k < r; ++k) {
    L.row(refs[k]).setZero();
    L(refs[k], k) = 1.0;
  }
  return L;
}

struct RandomInstance {
  std::vector<Edge> edges;
  island::MetricContext ctx;
};

// Buses 1..m, n generators on distinct buses, the first r of them are references.
inline RandomInstance random_instance(std::mt19937& rng, int m, int extra, int n, int r, double xi,
                                      bool allow_parallel = false) {
  RandomInstance inst;
  inst.edges = random_connected_graph(rng, m, extra, allow_parallel);
  std::vector<int> ids(m);
  std::iota(ids.begin(), ids.end(), 1);
  std::vector<int> buses(m);
  std::iota(buses.begin(), buses.end(), 0);
  std::shuffle(buses.begin(), buses.end(), rng);
  std::vector<int> gen_bus(buses.begin(), buses.begin() + n);
  std::uniform_real_distribution<double> load(0.0, 100.0);
  Eigen::VectorXd d(m), g = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) d[i] = load(rng);
  double total = d.sum();
  std::vector<double> share(n);
  for (auto& s : share) s = load(rng) + 1.0;
  double ssum = std::accumulate(share.begin(), share.end(), 0.0);
  for (int k = 0; k < n; ++k) g[gen_bus[k]] += total * share[k] / ssum;
  Eigen::VectorXd gmax = g * 1.2;
  std::vector<int> refs(r);
  std::iota(refs.begin(), refs.end(), 0);
  Eigen::MatrixXd L = random_L(rng, n, refs);
  inst.ctx = island::make_context(ids, inst.edges, d - g, d, gmax, gen_bus, L, refs, xi);
  return inst;
}

// Closed-form squared distance to span(A(S)): sum over components of
// (sum of v over the component)^2 / size.
inline double component_distance(int m, const std::vector<Edge>& edges, const std::vector<int>& S,
                                 const Eigen::VectorXd& v) {
  std::vector<int> comp(m);
  std::iota(comp.begin(), comp.end(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int e : S) {
      int a = edges[e].first, b = edges[e].second;
      int lo = std::min(comp[a], comp[b]);
      if (comp[a] != lo || comp[b] != lo) {
        int ca = comp[a], cb = comp[b];
        for (int& c : comp)
          if (c == ca || c == cb) c = lo;
        changed = true;
      }
    }
  }
  std::vector<double> sum(m, 0.0);
  std::vector<int> cnt(m, 0);
  for (int i = 0; i < m; ++i) {
    sum[comp[i]] += v[i];
    ++cnt[comp[i]];
  }
  double out = 0.0;
  for (int i = 0; i < m; ++i)
    if (cnt[i] > 0) out += sum[i] * sum[i] / cnt[i];
  return out;
}

inline double closed_form_J(const island::MetricContext& ctx, const std::vector<Edge>& edges,
                            const std::vector<int>& S) {
  double J = ctx.xi * component_distance(ctx.m, edges, S, ctx.b0);
  for (Eigen::Index t = 0; t < ctx.targets.cols(); ++t)
    J += component_distance(ctx.m, edges, S, ctx.targets.col(t));
  return J;
}

// Cycle check through the extra node m joined to every reference bus.
inline bool acyclic_with_refs(const island::MetricContext& ctx, const std::vector<Edge>& edges,
                              const std::vector<int>& S) {
  std::vector<int> comp(ctx.m + 1);
  std::iota(comp.begin(), comp.end(), 0);
  auto merge = [&comp](int a, int b) {
    int ca = comp[a], cb = comp[b];
    if (ca == cb) return false;
    for (int& c : comp)
      if (c == cb) c = ca;
    return true;
  };
  for (int b : ctx.ref_bus)
    if (!merge(ctx.m, b)) return false;
  for (int e : S)
    if (!merge(edges[e].first, edges[e].second)) return false;
  return true;
}

// All k-subsets of {0..n-1}.
inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1u) s.push_back(i);
    out.push_back(s);
  }
  return out;
}

}  // namespace testing
