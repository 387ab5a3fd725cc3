#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "islanding/errors.hpp"
#include "islanding/spectral.hpp"

using namespace island;

namespace {

double exhaustive_min_cut(const CouplingGraph& cg) {
  const int n = static_cast<int>(cg.W.rows());
  double best = 1e300;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<int> a, b;
    for (int i = 0; i < n; ++i) (mask >> i & 1u ? a : b).push_back(i);
    best = std::min(best, coupling_cut(cg, a, b));
  }
  return best;
}

CouplingGraph random_coupling(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(0.1, 10.0);
  CouplingGraph cg;
  cg.W = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) cg.W(i, j) = cg.W(j, i) = u(rng);
  return cg;
}

// Network on buses 1..m; generators on buses listed in gen_ids; loads random.
PowerNetwork flow_network(std::mt19937& rng, int m, int extra, const std::vector<int>& gen_ids) {
  auto edges = testing::random_connected_graph(rng, m, extra);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Bus> buses;
  double total = 0;
  for (int i = 0; i < m; ++i) {
    double d = 100 * u(rng);
    total += d;
    buses.push_back({i + 1, d, d, 0, 0});
  }
  std::vector<Branch> branches;
  for (std::size_t k = 0; k < edges.size(); ++k)
    branches.push_back({static_cast<int>(k), edges[k].first + 1, edges[k].second + 1, 0.05 + 0.1 * u(rng)});
  std::vector<Generator> gens;
  for (int id : gen_ids) gens.push_back({id, total / gen_ids.size(), total, 4.0, 0.25, 1.0});
  return PowerNetwork(100, 60, gen_ids[0], buses, branches, gens);
}

double exhaustive_terminal_cut(const PowerNetwork& net, const OperatingPoint& op, const std::vector<int>& T1,
                               const std::vector<int>& T2) {
  const int m = net.num_buses();
  double best = 1e300;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    bool ok = true;
    for (int b : T1) ok &= (mask >> b & 1u) != 0;
    for (int b : T2) ok &= (mask >> b & 1u) == 0;
    if (!ok) continue;
    double v = 0;
    for (int k = 0; k < net.num_branches(); ++k) {
      auto [a, b] = net.edge_ends(k);
      if ((mask >> a & 1u) != (mask >> b & 1u)) v += std::abs(op.flows[k]);
    }
    best = std::min(best, v);
  }
  return best;
}

std::set<std::string> cut_names(const PowerNetwork& net, const std::vector<int>& edges) {
  std::set<std::string> out;
  for (int k : edges) {
    auto [a, b] = net.edge_ends(k);
    out.insert(std::to_string(net.buses()[a].id) + "-" + std::to_string(net.buses()[b].id));
  }
  return out;
}

}  // namespace

TEST_CASE("barbell splits at the weak bridge") {
  CouplingGraph cg;
  cg.W = Eigen::MatrixXd::Zero(6, 6);
  auto link = [&cg](int a, int b, double w) { cg.W(a, b) = cg.W(b, a) = w; };
  link(0, 1, 10);
  link(1, 2, 10);
  link(0, 2, 10);
  link(3, 4, 10);
  link(4, 5, 10);
  link(3, 5, 10);
  link(2, 3, 0.1);
  for (auto scaling : {FiedlerScaling::kDegreeScaled, FiedlerScaling::kSymmetric}) {
    Bipartition bp = generator_bipartition(cg, scaling);
    CHECK(bp.side1 == std::vector<int>{0, 1, 2});
    CHECK(bp.side2 == std::vector<int>{3, 4, 5});
    CHECK(bp.cut == doctest::Approx(0.1));
  }
}

TEST_CASE("disconnected coupling graph splits off the first component") {
  CouplingGraph cg;
  cg.W = Eigen::MatrixXd::Zero(4, 4);
  cg.W(0, 2) = cg.W(2, 0) = 1.0;
  cg.W(1, 3) = cg.W(3, 1) = 1.0;
  Bipartition bp = generator_bipartition(cg);
  CHECK(bp.side1 == std::vector<int>{0, 2});
  CHECK(bp.side2 == std::vector<int>{1, 3});
  CHECK(bp.cut == 0.0);
  CHECK_THROWS_AS(generator_bipartition(cg, std::vector<int>{1}), ConfigError);
}

TEST_CASE("sweep cut is never below the exhaustive minimum; planted splits are found") {
  std::mt19937 rng(71);
  int equal = 0, total = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 3 + trial % 6;
    CouplingGraph cg = random_coupling(rng, n);
    Bipartition bp = generator_bipartition(cg);
    double best = exhaustive_min_cut(cg);
    CHECK(bp.cut >= best - 1e-9);
    CHECK(bp.cut == doctest::Approx(coupling_cut(cg, bp.side1, bp.side2)));
    CHECK(bp.side1.size() + bp.side2.size() == static_cast<std::size_t>(n));
    ++total;
    equal += bp.cut <= best + 1e-9;
  }
  MESSAGE("sweep equals the exhaustive minimum on " << equal << " of " << total << " random graphs");

  // two dense groups with weak cross coupling
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 4 + trial % 5;
    std::vector<int> group(n);
    for (int i = 0; i < n; ++i) group[i] = i < n / 2 ? 0 : 1;
    std::shuffle(group.begin(), group.end(), rng);
    CouplingGraph cg;
    cg.W = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        cg.W(i, j) = cg.W(j, i) = group[i] == group[j] ? 5.0 + 5.0 * u(rng) : 0.01 * u(rng);
    Bipartition bp = generator_bipartition(cg);
    CHECK(bp.cut == doctest::Approx(exhaustive_min_cut(cg)).epsilon(1e-12));
    for (int i : bp.side1) CHECK(group[i] == group[bp.side1[0]]);
  }
}

TEST_CASE("min-cut across a bridge") {
  // triangle 1-2-3, bridge 3-4, triangle 4-5-6; each side balanced so the bridge is idle
  PowerNetwork net(100, 60, 1,
                   {{1, 0, 0, 0, 0}, {2, 20, 20, 0, 0}, {3, 20, 20, 0, 0}, {4, 30, 30, 0, 0}, {5, 20, 20, 0, 0},
                    {6, 10, 10, 0, 0}},
                   {{0, 1, 2, 0.1}, {1, 2, 3, 0.1}, {2, 1, 3, 0.1}, {3, 3, 4, 0.1}, {4, 4, 5, 0.1}, {5, 5, 6, 0.1},
                    {6, 4, 6, 0.1}},
                   {{1, 40, 100, 4, 0.3, 1}, {6, 60, 100, 4, 0.3, 1}});
  OperatingPoint op = dc_power_flow(net);
  MinCut mc = constrained_mincut(net, op, {0}, {5});
  REQUIRE(mc.cut_edges.size() == 1);
  CHECK(cut_names(net, mc.cut_edges) == std::set<std::string>{"3-4"});
  CHECK(mc.value == doctest::Approx(std::abs(op.flows[3])));
  CHECK(mc.flow == doctest::Approx(mc.value));
  CHECK_THROWS_AS(constrained_mincut(net, op, {0}, {0}), ConfigError);
  CHECK_THROWS_AS(constrained_mincut(net, op, {}, {5}), ConfigError);
}

TEST_CASE("min-cut equals exhaustive enumeration on small networks") {
  std::mt19937 rng(72);
  for (int trial = 0; trial < 150; ++trial) {
    int m = 3 + trial % 8;
    std::vector<int> ids(m);
    std::iota(ids.begin(), ids.end(), 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    int t = 2 + trial % std::min(3, m - 1);
    std::vector<int> gen_ids(ids.begin(), ids.begin() + t);
    PowerNetwork net = flow_network(rng, m, trial % 5, gen_ids);
    OperatingPoint op = dc_power_flow(net);
    std::vector<int> T1, T2;
    for (int k = 0; k < t; ++k) (k % 2 == 0 ? T1 : T2).push_back(net.bus_index(gen_ids[k]));
    MinCut mc = constrained_mincut(net, op, T1, T2);
    CHECK(mc.value == doctest::Approx(exhaustive_terminal_cut(net, op, T1, T2)).epsilon(1e-9));
    CHECK(std::abs(mc.flow - mc.value) <= 1e-9 * std::max(1.0, mc.value));
    for (int b : T1) CHECK(std::find(mc.side1.begin(), mc.side1.end(), b) != mc.side1.end());
    for (int b : T2) CHECK(std::find(mc.side2.begin(), mc.side2.end(), b) != mc.side2.end());
    CHECK(mc.side1.size() + mc.side2.size() == static_cast<std::size_t>(m));
  }
}

TEST_CASE("two-step partition: r = 2 is a single split, bad r rejected") {
  PowerNetwork net = load_case(testing::data_path("case39.json"));
  OperatingPoint op = dc_power_flow(net);
  CoherencyModel model = build_coherency_model(net, op, 3);
  SpectralResult res = two_step_partition(net, op, model, 2);
  CHECK(res.splits.size() == 1);
  CHECK(res.gen_groups.size() == 2);
  std::set<int> labels(res.label.begin(), res.label.end());
  CHECK(labels == std::set<int>{0, 1});
  for (std::size_t s = 0; s < res.gen_groups.size(); ++s)
    for (int g : res.gen_groups[s]) CHECK(res.label[net.gen_bus_index(g)] == static_cast<int>(s));
  CHECK_THROWS_AS(two_step_partition(net, op, model, 1), ConfigError);
  CHECK_THROWS_AS(two_step_partition(net, op, model, 11), ConfigError);

  SpectralResult r3 = two_step_partition(net, op, model, 3);
  CHECK(r3.splits.size() == 2);
  CHECK(r3.gen_groups.size() == 3);
  for (const auto& sp : r3.splits) CHECK(sp.cut.flow == doctest::Approx(sp.cut.value).epsilon(1e-9));
}

TEST_CASE("39-bus second stage reproduces the published cut for the published groups") {
  PowerNetwork net = load_case(testing::data_path("case39.json"));
  OperatingPoint op = dc_power_flow(net);
  auto buses = [&net](std::vector<int> gens) {
    std::vector<int> b;
    for (int g : gens) b.push_back(net.gen_bus_index(g - 1));
    std::sort(b.begin(), b.end());
    return b;
  };
  // {G1} | {G2..G7} | {G8, G9, G10}
  MinCut first = constrained_mincut(net, op, buses({1}), buses({2, 3, 4, 5, 6, 7, 8, 9, 10}));
  MinCut second = constrained_mincut(net, op, buses({2, 3, 4, 5, 6, 7}), buses({8, 9, 10}), first.side2);
  CHECK(cut_names(net, second.cut_edges) == std::set<std::string>{"3-4", "3-18", "17-27"});
  MESSAGE("first-stage cut around G1: " << first.cut_edges.size() << " lines, " << first.value << " MW");
}
