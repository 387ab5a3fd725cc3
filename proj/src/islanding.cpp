#include "islanding/islanding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "islanding/errors.hpp"

namespace island {

PartitionSet::PartitionSet(const MetricContext& ctx) : ctx_(&ctx), uf_(ctx.m + 1) {
  for (std::size_t k = 0; k < ctx.ref_bus.size(); ++k)
    if (!uf_.unite(ctx.m, ctx.ref_bus[k]))
      throw ConfigError("references " + std::to_string(ctx.refs[k] + 1) + " and another reference share bus " +
                        std::to_string(ctx.bus_ids[ctx.ref_bus[k]]));
}

PartitionSet PartitionSet::from_edges(const MetricContext& ctx, const std::vector<int>& S) {
  PartitionSet P(ctx);
  for (int e : S) P.add(e);
  return P;
}

bool PartitionSet::can_add(int edge) {
  if (edge < 0 || edge >= ctx_->num_edges()) throw ConfigError("edge " + std::to_string(edge) + " is not in E");
  return !uf_.connected(ctx_->edges[edge].first, ctx_->edges[edge].second);
}

void PartitionSet::add(int edge) {
  if (!can_add(edge)) throw Error("edge " + std::to_string(edge) + " closes a cycle with the reference edges");
  uf_.unite(ctx_->edges[edge].first, ctx_->edges[edge].second);
  S_.insert(std::upper_bound(S_.begin(), S_.end(), edge), edge);
}

std::vector<int> PartitionSet::island_of() const {
  UnionFind uf(ctx_->m);
  for (int e : S_) uf.unite(ctx_->edges[e].first, ctx_->edges[e].second);
  std::vector<int> root_label(ctx_->m, -1);
  for (std::size_t k = 0; k < ctx_->ref_bus.size(); ++k) root_label[uf.find(ctx_->ref_bus[k])] = static_cast<int>(k);
  std::vector<int> out(ctx_->m);
  for (int i = 0; i < ctx_->m; ++i) out[i] = root_label[uf.find(i)];
  return out;
}

bool is_independent(const MetricContext& ctx, const std::vector<int>& S) {
  try {
    PartitionSet::from_edges(ctx, S);
    return true;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error&) {
    return false;
  }
}

namespace {

void require_connected(const MetricContext& ctx) {
  UnionFind uf(ctx.m);
  int comps = ctx.m;
  for (auto [a, b] : ctx.edges)
    if (uf.unite(a, b)) --comps;
  if (comps != 1) throw ValidationError("network graph is disconnected");
}

}  // namespace

PartitionSet greedy_select(const MetricContext& ctx, SearchTrace* trace) {
  require_connected(ctx);
  PartitionSet P(ctx);
  ProjectionEvaluator ev(ctx);
  const int l = ctx.num_edges();
  const int target = ctx.m - static_cast<int>(ctx.refs.size());
  std::vector<char> alive(l, 1);
  int remaining = l;
  double J = ev.J();
  if (trace) {
    trace->greedy_J.push_back(J);
    trace->J_empty = J;
  }
  while (remaining > 0 && P.size() < target) {
    const double tol = 1e-12 * std::max(1.0, J);
    int best = -1;
    double best_gain = 0.0;
    for (int e = 0; e < l; ++e) {
      if (!alive[e]) continue;
      double g = ev.gain(e);
      if (best < 0 || g > best_gain + tol) {
        best = e;
        best_gain = g;
      }
    }
    alive[best] = 0;
    --remaining;
    if (P.can_add(best)) {
      P.add(best);
      ev.append(best);
      J = ev.J();
      if (trace) {
        trace->greedy_edges.push_back(best);
        trace->greedy_J.push_back(J);
      }
    } else if (trace) {
      trace->rejected.push_back(best);
    }
  }
  if (!P.is_basis()) throw Error("greedy selection ended before reaching a basis");
  if (trace) {
    ProjectionEvaluator full(ctx);
    for (int e = 0; e < l; ++e) full.append(e);
    trace->J_full = full.J();
  }
  return P;
}

PartitionSet local_search(const MetricContext& ctx, const PartitionSet& P, double epsilon, SearchTrace* trace) {
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  const int l = ctx.num_edges();
  std::vector<int> S = P.edges();
  double J = J_value(ctx, S);
  // improvements below this are rounding noise; without it a J near zero cycles forever
  const double noise = 1e-12 * J_value(ctx, {});
  bool improved = true;
  while (improved) {
    improved = false;
    std::vector<char> in_S(l, 0);
    for (int e : S) in_S[e] = 1;
    for (std::size_t vi = 0; vi < S.size() && !improved; ++vi) {
      std::vector<int> base;
      for (std::size_t j = 0; j < S.size(); ++j)
        if (j != vi) base.push_back(S[j]);
      PartitionSet part = PartitionSet::from_edges(ctx, base);
      ProjectionEvaluator ev(ctx);
      for (int e : base) ev.append(e);
      const double Jb = ev.J();
      for (int e = 0; e < l; ++e) {
        if (in_S[e] || !part.can_add(e)) continue;
        const double cand = Jb - ev.gain(e);
        if (cand < (1.0 - epsilon) * J && J - cand > noise) {
          base.insert(std::upper_bound(base.begin(), base.end(), e), e);
          Swap sw{S[vi], e, 0.0};
          S = std::move(base);
          J = J_value(ctx, S);
          sw.J = J;
          if (trace) trace->swaps.push_back(sw);
          improved = true;
          break;
        }
      }
    }
  }
  return PartitionSet::from_edges(ctx, S);
}

Eigen::MatrixXd partition_matrix(const MetricContext& ctx, const std::vector<int>& island_of_bus) {
  const int r = static_cast<int>(ctx.refs.size());
  // references present in each island
  std::map<int, std::vector<int>> refs_in;
  for (int k = 0; k < r; ++k) refs_in[island_of_bus[ctx.ref_bus[k]]].push_back(k);
  Eigen::MatrixXd Lg = Eigen::MatrixXd::Zero(ctx.n, r);
  for (int g = 0; g < ctx.n; ++g) {
    std::vector<int> cand;
    auto it = refs_in.find(island_of_bus[ctx.gen_bus[g]]);
    if (it != refs_in.end()) {
      cand = it->second;
    } else {
      cand.resize(r);
      std::iota(cand.begin(), cand.end(), 0);
    }
    int best = cand[0];
    for (int k : cand)
      if (ctx.L(g, k) > ctx.L(g, best)) best = k;
    Lg(g, best) = 1.0;
  }
  return Lg;
}

IslandingSolution solution_from_labels(const MetricContext& ctx, const std::vector<int>& label) {
  if (static_cast<int>(label.size()) != ctx.m) throw ConfigError("bus labelling has the wrong length");
  // order islands by the first reference they hold, then by smallest bus id
  std::map<int, std::pair<int, int>> key;
  for (int i = 0; i < ctx.m; ++i) {
    auto [it, fresh] = key.try_emplace(label[i], std::numeric_limits<int>::max(), ctx.bus_ids[i]);
    it->second.second = std::min(it->second.second, ctx.bus_ids[i]);
  }
  for (std::size_t k = 0; k < ctx.ref_bus.size(); ++k) {
    auto& kv = key[label[ctx.ref_bus[k]]];
    kv.first = std::min(kv.first, static_cast<int>(k));
  }
  std::vector<std::pair<std::pair<int, int>, int>> order;
  for (auto& [lab, kv] : key) order.emplace_back(kv, lab);
  std::sort(order.begin(), order.end());
  std::map<int, int> relabel;
  for (std::size_t i = 0; i < order.size(); ++i) relabel[order[i].second] = static_cast<int>(i);

  IslandingSolution sol;
  sol.island_of_bus.resize(ctx.m);
  sol.islands.assign(order.size(), {});
  for (int i = 0; i < ctx.m; ++i) sol.island_of_bus[i] = relabel[label[i]];
  std::vector<int> by_id(ctx.m);
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(), [&ctx](int a, int b) { return ctx.bus_ids[a] < ctx.bus_ids[b]; });
  for (int i : by_id) sol.islands[sol.island_of_bus[i]].push_back(i);

  for (int e = 0; e < ctx.num_edges(); ++e) {
    auto [a, b] = ctx.edges[e];
    if (sol.island_of_bus[a] == sol.island_of_bus[b]) {
      sol.S.push_back(e);
    } else {
      sol.cutset.push_back(e);
      sol.open_edges.push_back(e);
    }
  }
  for (int g = 0; g < ctx.n; ++g) sol.island_of_gen.push_back(sol.island_of_bus[ctx.gen_bus[g]]);
  sol.Lg = partition_matrix(ctx, sol.island_of_bus);

  ProjectionEvaluator ev(ctx);
  for (int e : sol.S) ev.append(e);
  sol.J = ev.J();
  sol.f = ev.f();
  sol.sqrt_f_mw = std::sqrt(std::max(0.0, sol.f));
  sol.h.resize(ctx.n);
  for (int g = 0; g < ctx.n; ++g) sol.h[g] = ev.h_gen(g);
  sol.H_bar = noncoherency(ctx.L, sol.Lg);
  sol.H_half = 0.5 * sol.H_bar;
  return sol;
}

IslandingSolution extract_solution(const MetricContext& ctx, const PartitionSet& P, SearchTrace trace) {
  if (!P.is_basis()) throw Error("extract_solution: edge set is not a basis");
  std::vector<int> isl = P.island_of();
  for (int i = 0; i < ctx.m; ++i)
    if (isl[i] < 0) throw Error("extract_solution: bus " + std::to_string(ctx.bus_ids[i]) + " has no reference");
  IslandingSolution sol = solution_from_labels(ctx, isl);
  // recompute on the basis itself; the labelling already matches its components
  sol.S = P.edges();
  sol.open_edges.clear();
  std::vector<char> in_S(ctx.num_edges(), 0);
  for (int e : sol.S) in_S[e] = 1;
  for (int e = 0; e < ctx.num_edges(); ++e)
    if (!in_S[e]) sol.open_edges.push_back(e);
  ProjectionEvaluator ev(ctx);
  for (int e : sol.S) ev.append(e);
  sol.J = ev.J();
  sol.f = ev.f();
  sol.sqrt_f_mw = std::sqrt(std::max(0.0, sol.f));
  for (int g = 0; g < ctx.n; ++g) sol.h[g] = ev.h_gen(g);
  for (int k = 0; k < static_cast<int>(ctx.refs.size()); ++k)
    if (sol.island_of_bus[ctx.ref_bus[k]] != k) throw Error("extract_solution: island order mismatch");
  sol.method = "weak-submodular";
  sol.trace = std::move(trace);
  return sol;
}

IslandingSolution weak_submodular_islanding(const MetricContext& ctx, double epsilon) {
  SearchTrace trace;
  PartitionSet greedy = greedy_select(ctx, &trace);
  PartitionSet final_set = local_search(ctx, greedy, epsilon, &trace);
  return extract_solution(ctx, final_set, std::move(trace));
}

BruteForceResult brute_force_optimum(const MetricContext& ctx, long long max_subsets) {
  const int l = ctx.num_edges();
  const int s = ctx.m - static_cast<int>(ctx.refs.size());
  if (s < 0 || s > l) throw ConfigError("brute force: no basis of size m - r exists");
  long double count = 1;
  for (int i = 0; i < s; ++i) count = count * (l - i) / (i + 1);
  if (count > static_cast<long double>(max_subsets))
    throw ConfigError("brute force: instance too large to enumerate bases");
  BruteForceResult best;
  best.J = std::numeric_limits<double>::infinity();
  std::vector<int> idx(s);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (is_independent(ctx, idx)) {
      ++best.bases;
      double J = J_value(ctx, idx);
      if (J < best.J) {
        best.J = J;
        best.S = idx;
      }
    }
    int i = s - 1;
    while (i >= 0 && idx[i] == l - s + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

bool check_approximation_bound(const MetricContext& ctx, const IslandingSolution& sol, double j_star) {
  const int size = static_cast<int>(sol.S.size());
  const int mr = ctx.m - static_cast<int>(ctx.refs.size());
  if (size == 0) return sol.J <= j_star + 1e-9 * std::max(1.0, std::abs(j_star));
  const auto& gj = sol.trace.greedy_J;
  if (gj.size() < 2) throw ConfigError("bound check needs the greedy trace");
  double j_prev = gj[gj.size() - 2];
  double gamma0 = sparse_lambda_min(ctx, std::min(2 * size, ctx.num_edges()));
  double rhs = (mr - gamma0) * j_prev + gamma0 * j_star;
  return sol.J <= rhs + 1e-9 * std::max(1.0, std::abs(rhs));
}

double local_search_bound(double J_full, double J_empty, double epsilon) {
  if (!(J_full > 0) || !(J_empty > 0)) return std::numeric_limits<double>::infinity();
  return (std::log(J_full) - std::log(J_empty)) / std::log(1.0 - epsilon);
}

}  // namespace island
