#include "islanding/netcase.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "case_detail.hpp"
#include "islanding/errors.hpp"
#include "islanding/union_find.hpp"

namespace island {

using json = nlohmann::json;

namespace {

std::string name_bus(int id) { return "bus " + std::to_string(id); }

}  // namespace

PowerNetwork::PowerNetwork(double base_mva, double base_freq_hz, int slack_bus,
                           std::vector<Bus> buses, std::vector<Branch> branches,
                           std::vector<Generator> gens)
    : base_mva_(base_mva),
      base_freq_hz_(base_freq_hz),
      slack_bus_(slack_bus),
      buses_(std::move(buses)),
      gens_(std::move(gens)) {
  if (!(base_mva_ > 0)) throw ValidationError("base_mva must be positive");
  if (!(base_freq_hz_ > 0)) throw ValidationError("base_freq_hz must be positive");
  if (buses_.empty()) throw ValidationError("case has no buses");
  if (gens_.empty()) throw ValidationError("case has no generators");

  id_lookup_.reserve(buses_.size());
  for (std::size_t i = 0; i < buses_.size(); ++i) id_lookup_.emplace_back(buses_[i].id, static_cast<int>(i));
  std::sort(id_lookup_.begin(), id_lookup_.end());
  for (std::size_t i = 1; i < id_lookup_.size(); ++i)
    if (id_lookup_[i].first == id_lookup_[i - 1].first)
      throw ValidationError("duplicate bus id " + std::to_string(id_lookup_[i].first));

  for (auto& b : buses_) {
    if (!(b.d0 >= 0) || !(b.d_max >= 0))
      throw ValidationError(name_bus(b.id) + ": demand must be nonnegative");
    b.g0 = 0.0;
    b.g_max = 0.0;
  }

  for (std::size_t g = 0; g < gens_.size(); ++g) {
    const auto& gen = gens_[g];
    std::string who = "generator " + std::to_string(g + 1) + " at bus " + std::to_string(gen.bus);
    if (!has_bus(gen.bus)) throw ValidationError(who + ": unknown bus");
    if (!(gen.pg_mw >= 0) || !(gen.pg_max_mw >= 0)) throw ValidationError(who + ": generation must be nonnegative");
    if (!(gen.inertia_s > 0)) throw ValidationError(who + ": inertia must be positive");
    if (!(gen.xd_prime_pu > 0)) throw ValidationError(who + ": xd_prime must be positive");
    if (!(gen.vm_pu > 0)) throw ValidationError(who + ": voltage must be positive");
    int p = bus_index(gen.bus);
    gen_bus_.push_back(p);
    buses_[p].g0 += gen.pg_mw;
    buses_[p].g_max += gen.pg_max_mw;
  }

  if (!has_bus(slack_bus_)) throw ValidationError("slack bus " + std::to_string(slack_bus_) + " is not a known bus");
  if (std::find(gen_bus_.begin(), gen_bus_.end(), bus_index(slack_bus_)) == gen_bus_.end())
    throw ValidationError("slack bus " + std::to_string(slack_bus_) + " has no generator");

  for (std::size_t k = 0; k < branches.size(); ++k) {
    auto br = branches[k];
    br.index = static_cast<int>(k);
    std::string who = "branch " + std::to_string(k + 1) + " (" + std::to_string(br.from) + "-" + std::to_string(br.to) + ")";
    if (!has_bus(br.from) || !has_bus(br.to)) throw ValidationError(who + ": dangling endpoint");
    if (br.from == br.to) throw ValidationError(who + ": self loop");
    if (!(br.x_pu > 0)) throw ValidationError(who + ": reactance must be positive");
    branches_.push_back(br);
  }
  std::sort(branches_.begin(), branches_.end(), [](const Branch& a, const Branch& b) {
    auto ka = std::tuple(std::min(a.from, a.to), std::max(a.from, a.to), a.index);
    auto kb = std::tuple(std::min(b.from, b.to), std::max(b.from, b.to), b.index);
    return ka < kb;
  });
  for (const auto& br : branches_)
    ends_.emplace_back(bus_index(std::min(br.from, br.to)), bus_index(std::max(br.from, br.to)));

  UnionFind uf(num_buses());
  int comps = num_buses();
  for (auto [a, b] : ends_)
    if (uf.unite(a, b)) --comps;
  if (comps != 1) {
    for (int i = 0; i < num_buses(); ++i)
      if (!uf.connected(i, 0))
        throw ValidationError("network is disconnected: " + name_bus(buses_[i].id) + " cannot reach " +
                              name_bus(buses_[0].id));
  }
}

double PowerNetwork::omega0() const { return 2.0 * std::numbers::pi * base_freq_hz_; }

bool PowerNetwork::has_bus(int id) const {
  auto it = std::lower_bound(id_lookup_.begin(), id_lookup_.end(), std::pair(id, -1));
  return it != id_lookup_.end() && it->first == id;
}

int PowerNetwork::bus_index(int id) const {
  auto it = std::lower_bound(id_lookup_.begin(), id_lookup_.end(), std::pair(id, -1));
  if (it == id_lookup_.end() || it->first != id) throw ValidationError("unknown bus id " + std::to_string(id));
  return it->second;
}

std::vector<int> PowerNetwork::find_edges(int a, int b) const {
  std::vector<int> out;
  int lo = std::min(a, b), hi = std::max(a, b);
  for (int k = 0; k < num_branches(); ++k) {
    const auto& br = branches_[k];
    if (std::min(br.from, br.to) == lo && std::max(br.from, br.to) == hi) out.push_back(k);
  }
  return out;
}

Eigen::VectorXd PowerNetwork::d0() const {
  Eigen::VectorXd v(num_buses());
  for (int i = 0; i < num_buses(); ++i) v[i] = buses_[i].d0;
  return v;
}

Eigen::VectorXd PowerNetwork::g0() const {
  Eigen::VectorXd v(num_buses());
  for (int i = 0; i < num_buses(); ++i) v[i] = buses_[i].g0;
  return v;
}

Eigen::VectorXd PowerNetwork::d_max() const {
  Eigen::VectorXd v(num_buses());
  for (int i = 0; i < num_buses(); ++i) v[i] = buses_[i].d_max;
  return v;
}

Eigen::VectorXd PowerNetwork::g_max() const {
  Eigen::VectorXd v(num_buses());
  for (int i = 0; i < num_buses(); ++i) v[i] = buses_[i].g_max;
  return v;
}

// ---------------------------------------------------------------------------
// JSON case format

namespace {

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

json parse_json(std::string_view text, const char* what) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw ParseError(std::string(what) + ": empty input");
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "." + key + ": missing field");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  return number(obj, key, where);
}

int integer(const json& obj, const char* key, const std::string& where) {
  double v = number(obj, key, where);
  if (v != std::floor(v) || std::abs(v) > 2e9) throw ParseError(where + "." + key + ": expected an integer");
  return static_cast<int>(v);
}

const json& array(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) throw ParseError(where + "." + key + ": expected an array");
  return v;
}

}  // namespace

// Applies a dynamics document to gens. The k-th entry for bus b matches the
// k-th generator at bus b. When reorder is set the result follows the
// dynamics file order.
std::vector<Generator> apply_dynamics(std::vector<Generator> gens, std::string_view dyn_text, bool reorder,
                                      double* base_freq_hz) {
  json dyn = parse_json(dyn_text, "dynamics");
  if (base_freq_hz) *base_freq_hz = number_or(dyn, "base_freq_hz", "dynamics", *base_freq_hz);
  const json& entries = array(dyn, "gens", "dynamics");
  std::vector<bool> used(gens.size(), false);
  std::vector<Generator> ordered;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    std::string where = "dynamics.gens[" + std::to_string(k) + "]";
    const json& e = entries[k];
    int bus = integer(e, "bus", where);
    std::size_t g = 0;
    while (g < gens.size() && (used[g] || gens[g].bus != bus)) ++g;
    if (g == gens.size()) throw ValidationError(where + ": no in-service generator left at bus " + std::to_string(bus));
    used[g] = true;
    gens[g].inertia_s = number(e, "inertia_s", where);
    gens[g].xd_prime_pu = number(e, "xd_prime_pu", where);
    gens[g].vm_pu = number_or(e, "vm_pu", where, gens[g].vm_pu);
    ordered.push_back(gens[g]);
  }
  for (std::size_t g = 0; g < gens.size(); ++g)
    if (!used[g] && reorder)
      throw ValidationError("generator at bus " + std::to_string(gens[g].bus) + " has no dynamics entry");
  return reorder ? ordered : gens;
}

PowerNetwork parse_case(std::string_view case_text, std::string_view dyn_text) {
  auto first = case_text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw ParseError("case: empty input");
  if (case_text[first] != '{') return parse_matpower(case_text, dyn_text);

  json doc = parse_json(case_text, "case");
  const std::string top = "case";
  double base_mva = number_or(doc, "base_mva", top, 100.0);
  double base_freq = number_or(doc, "base_freq_hz", top, 60.0);
  int slack = integer(doc, "slack_bus", top);

  std::vector<Bus> buses;
  const json& jb = array(doc, "buses", top);
  for (std::size_t k = 0; k < jb.size(); ++k) {
    std::string where = "buses[" + std::to_string(k) + "]";
    Bus b;
    b.id = integer(jb[k], "id", where);
    b.d0 = number(jb[k], "pd_mw", where);
    b.d_max = number_or(jb[k], "pd_max_mw", where, b.d0);
    buses.push_back(b);
  }

  std::vector<Branch> branches;
  const json& jl = array(doc, "branches", top);
  for (std::size_t k = 0; k < jl.size(); ++k) {
    std::string where = "branches[" + std::to_string(k) + "]";
    Branch br;
    br.from = integer(jl[k], "from", where);
    br.to = integer(jl[k], "to", where);
    br.x_pu = number(jl[k], "x_pu", where);
    branches.push_back(br);
  }

  std::vector<Generator> gens;
  const json& jg = array(doc, "gens", top);
  for (std::size_t k = 0; k < jg.size(); ++k) {
    std::string where = "gens[" + std::to_string(k) + "]";
    Generator g;
    g.bus = integer(jg[k], "bus", where);
    g.pg_mw = number(jg[k], "pg_mw", where);
    g.pg_max_mw = number_or(jg[k], "pg_max_mw", where, g.pg_mw);
    bool has_dyn_override = !dyn_text.empty();
    g.inertia_s = has_dyn_override ? number_or(jg[k], "inertia_s", where, 0.0) : number(jg[k], "inertia_s", where);
    g.xd_prime_pu = has_dyn_override ? number_or(jg[k], "xd_prime_pu", where, 0.0) : number(jg[k], "xd_prime_pu", where);
    g.vm_pu = number_or(jg[k], "vm_pu", where, 1.0);
    gens.push_back(g);
  }
  if (!dyn_text.empty()) gens = apply_dynamics(std::move(gens), dyn_text, false, &base_freq);

  return PowerNetwork(base_mva, base_freq, slack, std::move(buses), std::move(branches), std::move(gens));
}

std::string serialize_case(const PowerNetwork& net) {
  json doc;
  doc["base_mva"] = net.base_mva();
  doc["base_freq_hz"] = net.base_freq_hz();
  doc["slack_bus"] = net.slack_bus();
  json buses = json::array();
  for (const auto& b : net.buses()) buses.push_back({{"id", b.id}, {"pd_mw", b.d0}, {"pd_max_mw", b.d_max}});
  doc["buses"] = buses;
  std::vector<Branch> file_order = net.branches();
  std::sort(file_order.begin(), file_order.end(), [](const Branch& a, const Branch& b) { return a.index < b.index; });
  json branches = json::array();
  for (const auto& br : file_order) branches.push_back({{"from", br.from}, {"to", br.to}, {"x_pu", br.x_pu}});
  doc["branches"] = branches;
  json gens = json::array();
  for (const auto& g : net.generators())
    gens.push_back({{"bus", g.bus},
                    {"pg_mw", g.pg_mw},
                    {"pg_max_mw", g.pg_max_mw},
                    {"inertia_s", g.inertia_s},
                    {"xd_prime_pu", g.xd_prime_pu},
                    {"vm_pu", g.vm_pu}});
  doc["gens"] = gens;
  return doc.dump(1) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PowerNetwork load_case(const std::string& path, const std::string& dyn_path) {
  std::string text = read_file(path);
  std::string dyn = dyn_path.empty() ? std::string() : read_file(dyn_path);
  return parse_case(text, dyn);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd incidence_matrix(const PowerNetwork& net, const std::vector<int>& S) {
  std::vector<int> cols = S;
  std::sort(cols.begin(), cols.end());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] < 0 || cols[c] >= net.num_branches())
      throw ConfigError("edge " + std::to_string(cols[c]) + " is not in E");
    if (c > 0 && cols[c] == cols[c - 1]) throw ConfigError("edge " + std::to_string(cols[c]) + " listed twice");
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(net.num_buses(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto [lo, hi] = net.edge_ends(cols[c]);
    A(lo, c) = 1.0;
    A(hi, c) = -1.0;
  }
  return A;
}

Eigen::MatrixXd incidence_matrix(const PowerNetwork& net) {
  std::vector<int> all(net.num_branches());
  std::iota(all.begin(), all.end(), 0);
  return incidence_matrix(net, all);
}

OperatingPoint dc_power_flow(const PowerNetwork& net) {
  const int m = net.num_buses();
  const double base = net.base_mva();
  OperatingPoint op;

  op.gen_pg_mw.resize(net.num_generators());
  for (int g = 0; g < net.num_generators(); ++g) op.gen_pg_mw[g] = net.generators()[g].pg_mw;
  Eigen::VectorXd d = net.d0();
  double mismatch = d.sum() - op.gen_pg_mw.sum();
  int slack = net.bus_index(net.slack_bus());
  for (int g = 0; g < net.num_generators(); ++g) {
    if (net.gen_bus_index(g) == slack) {
      op.gen_pg_mw[g] += mismatch;
      break;
    }
  }
  Eigen::VectorXd gsum = Eigen::VectorXd::Zero(m);
  for (int g = 0; g < net.num_generators(); ++g) gsum[net.gen_bus_index(g)] += op.gen_pg_mw[g];
  op.b0 = d - gsum;

  Eigen::MatrixXd Bp = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < net.num_branches(); ++k) {
    auto [a, b] = net.edge_ends(k);
    double y = 1.0 / net.branches()[k].x_pu;
    Bp(a, a) += y;
    Bp(b, b) += y;
    Bp(a, b) -= y;
    Bp(b, a) -= y;
  }
  std::vector<int> keep;
  for (int i = 0; i < m; ++i)
    if (i != slack) keep.push_back(i);
  const int q = static_cast<int>(keep.size());
  op.angles = Eigen::VectorXd::Zero(m);
  if (q > 0) {
    Eigen::MatrixXd Br(q, q);
    Eigen::VectorXd P(q);
    for (int a = 0; a < q; ++a) {
      P[a] = -op.b0[keep[a]] / base;
      for (int b = 0; b < q; ++b) Br(a, b) = Bp(keep[a], keep[b]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Br);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-14 * Br.diagonal().maxCoeff())
      throw NumericalError("DC power flow: singular reduced susceptance matrix");
    Eigen::VectorXd th = ldlt.solve(P);
    for (int a = 0; a < q; ++a) op.angles[keep[a]] = th[a];
  }
  op.flows.resize(net.num_branches());
  for (int k = 0; k < net.num_branches(); ++k) {
    auto [a, b] = net.edge_ends(k);
    op.flows[k] = (op.angles[a] - op.angles[b]) / net.branches()[k].x_pu * base;
  }
  return op;
}

}  // namespace island
