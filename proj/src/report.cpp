#include "islanding/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "islanding/errors.hpp"

namespace island {

using json = nlohmann::json;

void validate(const RunConfig& cfg) {
  if (cfg.r < 1) throw ConfigError("r must be at least 1");
  if (cfg.xi.empty()) throw ConfigError("at least one xi value is required");
  for (double x : cfg.xi)
    if (!(x >= 0) || !std::isfinite(x)) throw ConfigError("xi must be a finite nonnegative number");
  if (!(cfg.epsilon > 0 && cfg.epsilon < 1)) throw ConfigError("epsilon must lie in (0, 1)");
  if (cfg.method != "weak-submodular" && cfg.method != "spectral" && cfg.method != "both")
    throw ConfigError("method must be weak-submodular, spectral or both");
  if (!cfg.refs.empty() && static_cast<int>(cfg.refs.size()) != cfg.r)
    throw ConfigError("--refs must list exactly r generators");
}

std::string gen_label(int g) { return "G" + std::to_string(g + 1); }

std::vector<int> resolve_refs(const PowerNetwork& net, const std::vector<std::string>& tokens) {
  std::vector<int> refs;
  for (const auto& raw : tokens) {
    std::string tok = raw;
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty()) throw ConfigError("empty reference token");
    int g = -1;
    try {
      if (tok[0] == 'G' || tok[0] == 'g') {
        std::size_t used = 0;
        g = std::stoi(tok.substr(1), &used) - 1;
        if (used != tok.size() - 1 || g < 0 || g >= net.num_generators())
          throw ConfigError("unknown generator " + tok);
      } else {
        std::size_t used = 0;
        int bus = std::stoi(tok, &used);
        if (used != tok.size()) throw ConfigError("bad reference token " + tok);
        int pos = net.bus_index(bus);
        for (int k = 0; k < net.num_generators() && g < 0; ++k)
          if (net.gen_bus_index(k) == pos) g = k;
        if (g < 0) throw ConfigError("bus " + tok + " hosts no generator");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad reference token " + tok);
    }
    if (std::find(refs.begin(), refs.end(), g) != refs.end()) throw ConfigError("reference listed twice: " + tok);
    refs.push_back(g);
  }
  return refs;
}

Prepared prepare(const PowerNetwork& net, int r, const std::vector<std::string>& ref_tokens) {
  Prepared p;
  p.op = dc_power_flow(net);
  p.model = build_coherency_model(net, p.op, r);
  p.greedy = select_references_greedy(p.model.U, r);
  p.pivoting = select_references_pivoting(p.model.U, r);
  std::vector<int> refs = p.greedy.refs;
  if (!ref_tokens.empty()) {
    refs = resolve_refs(net, ref_tokens);
    if (static_cast<int>(refs.size()) != r) throw ConfigError("--refs must list exactly r generators");
    p.overridden = true;
  }
  set_references(p.model, refs);
  return p;
}

json edge_json(const PowerNetwork& net, int edge) {
  const auto& br = net.branches()[edge];
  return json::array({std::min(br.from, br.to), std::max(br.from, br.to)});
}

namespace {

json edges_json(const PowerNetwork& net, const std::vector<int>& edges) {
  json out = json::array();
  for (int e : edges) out.push_back(edge_json(net, e));
  return out;
}

json gens_json(const std::vector<int>& gens) {
  json out = json::array();
  for (int g : gens) out.push_back(gen_label(g));
  return out;
}

json vec_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json mat_json(const Eigen::MatrixXd& M) {
  json out = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    out.push_back(row);
  }
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json solution_json(const PowerNetwork& net, const MetricContext& ctx, const IslandingSolution& sol,
                   const SpectralResult* detail, double epsilon) {
  json out;
  out["method"] = sol.method;
  out["xi"] = ctx.xi;
  out["cutset"] = edges_json(net, sol.cutset);
  out["open_edges"] = edges_json(net, sol.open_edges);
  json islands = json::array();
  for (const auto& isl : sol.islands) {
    json buses = json::array();
    for (int b : isl) buses.push_back(ctx.bus_ids[b]);
    islands.push_back(buses);
  }
  out["islands"] = islands;
  json groups = json::array();
  for (std::size_t k = 0; k < sol.islands.size(); ++k) {
    std::vector<int> gs;
    for (int g = 0; g < ctx.n; ++g)
      if (sol.island_of_gen[g] == static_cast<int>(k)) gs.push_back(g);
    groups.push_back(gens_json(gs));
  }
  out["generator_groups"] = groups;
  out["J"] = sol.J;
  out["f_mw2"] = sol.f;
  out["sqrt_f_mw"] = sol.sqrt_f_mw;
  out["H_bar"] = sol.H_bar;
  out["H_half"] = sol.H_half;
  out["h"] = vec_json(sol.h);

  json trace;
  if (sol.method == "spectral") {
    json splits = json::array();
    if (detail) {
      for (const auto& s : detail->splits) {
        splits.push_back({{"groups", json::array({gens_json(s.gens1), gens_json(s.gens2)})},
                          {"coupling_cut", s.coupling},
                          {"flow_cut_mw", s.cut.value},
                          {"cut", edges_json(net, s.cut.cut_edges)}});
      }
    }
    trace["splits"] = splits;
    trace["reconstruction"] = "recursion splits the subsystem with the weakest internal coupling first";
  } else {
    trace["greedy_J"] = sol.trace.greedy_J;
    trace["greedy_edges"] = edges_json(net, sol.trace.greedy_edges);
    trace["rejected"] = edges_json(net, sol.trace.rejected);
    json swaps = json::array();
    for (const auto& s : sol.trace.swaps)
      swaps.push_back({{"removed", edge_json(net, s.removed)}, {"added", edge_json(net, s.added)}, {"J", s.J}});
    trace["swaps"] = swaps;
    trace["J_empty"] = sol.trace.J_empty;
    trace["J_full"] = sol.trace.J_full;
    if (epsilon > 0)
      trace["local_search_bound"] = number_or_null(local_search_bound(sol.trace.J_full, sol.trace.J_empty, epsilon));
  }
  out["trace"] = trace;
  return out;
}

json model_json(const CoherencyModel& model) {
  return {{"B_red", mat_json(model.B_red)}, {"M", vec_json(model.M)}, {"V", vec_json(model.V)},
          {"delta", vec_json(model.delta)}, {"K", mat_json(model.K)},  {"sigma", vec_json(model.sigma)},
          {"U", mat_json(model.U)},         {"L", mat_json(model.L)}};
}

json refsel_json(const PowerNetwork& net, const Prepared& prep) {
  auto block = [&net](const ReferenceSelection& sel) {
    json buses = json::array();
    for (int g : sel.refs) buses.push_back(net.generators()[g].bus);
    return json{{"refs", gens_json(sel.refs)}, {"ref_buses", buses}, {"gain_trace", sel.gain_trace}};
  };
  json out;
  json buses = json::array();
  for (int g : prep.model.refs) buses.push_back(net.generators()[g].bus);
  out["refs"] = gens_json(prep.model.refs);
  out["ref_buses"] = buses;
  out["source"] = prep.overridden ? "override" : "greedy";
  out["greedy"] = block(prep.greedy);
  out["pivoting"] = block(prep.pivoting);
  out["sigma"] = vec_json(prep.model.sigma);
  return out;
}

json run_report(const PowerNetwork& net, const RunConfig& cfg) {
  validate(cfg);
  if (cfg.method != "weak-submodular" && cfg.r < 2) throw ConfigError("the spectral baseline needs r >= 2");
  Prepared prep = prepare(net, cfg.r, cfg.refs);

  json report;
  report["case"] = {{"buses", net.num_buses()},
                    {"branches", net.num_branches()},
                    {"generators", net.num_generators()},
                    {"base_mva", net.base_mva()},
                    {"slack_bus", net.slack_bus()}};
  report["config"] = {{"r", cfg.r}, {"epsilon", cfg.epsilon}, {"method", cfg.method}, {"xi", cfg.xi}};
  report["references"] = refsel_json(net, prep);

  SpectralResult spectral;
  bool want_spectral = cfg.method != "weak-submodular";
  bool want_proposed = cfg.method != "spectral";
  if (want_spectral) spectral = two_step_partition(net, prep.op, prep.model, cfg.r);

  json runs = json::array();
  for (double xi : cfg.xi) {
    MetricContext ctx = make_context(net, prep.op, prep.model.L, prep.model.refs, xi);
    json methods = json::array();
    if (want_proposed) {
      IslandingSolution sol = weak_submodular_islanding(ctx, cfg.epsilon);
      methods.push_back(solution_json(net, ctx, sol, nullptr, cfg.epsilon));
    }
    if (want_spectral) {
      IslandingSolution sol = solution_from_labels(ctx, spectral.label);
      sol.method = "spectral";
      methods.push_back(solution_json(net, ctx, sol, &spectral));
    }
    runs.push_back({{"xi", xi}, {"methods", methods}});
  }
  report["runs"] = runs;
  if (cfg.dump_model) report["model"] = model_json(prep.model);
  return report;
}

json run_report(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.case_path.empty()) throw ConfigError("--case is required");
  PowerNetwork net = load_case(cfg.case_path, cfg.dyn_path);
  return run_report(net, cfg);
}

namespace {

struct Row {
  std::string method;
  double J, sqrt_f, H_bar;
};

double metric(const json& m, const char* key) {
  if (!m.contains(key) || !m[key].is_number()) throw ConfigError(std::string("report method lacks metric ") + key);
  return m[key].get<double>();
}

std::vector<std::pair<double, std::vector<Row>>> comparison_rows(const json& report) {
  if (!report.is_object() || !report.contains("runs") || !report["runs"].is_array())
    throw ConfigError("report has no runs");
  std::vector<std::pair<double, std::vector<Row>>> out;
  for (const auto& run : report["runs"]) {
    if (!run.contains("methods") || run["methods"].size() < 2)
      throw ConfigError("compare needs a report with at least two methods");
    std::vector<Row> rows;
    for (const auto& m : run["methods"])
      rows.push_back({m.value("method", std::string("?")), metric(m, "J"), metric(m, "sqrt_f_mw"), metric(m, "H_bar")});
    out.emplace_back(run.value("xi", 0.0), rows);
  }
  if (out.empty()) throw ConfigError("report has no runs");
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  // display width: the column headers hold two-byte characters
  std::size_t width = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++width;
  return s + std::string(w > width ? w - width : 0, ' ');
}

}  // namespace

std::string compare_table(const json& report) {
  std::string out;
  for (const auto& [xi, rows] : comparison_rows(report)) {
    out += "xi = " + json(xi).dump() + "\n";
    out += pad("Method", 16) + " | " + pad("J", 12) + " | " + pad("√f (MW)", 10) + " | H̄\n";
    out += std::string(16, '-') + "-+-" + std::string(12, '-') + "-+-" + std::string(10, '-') + "-+-" +
           std::string(8, '-') + "\n";
    for (const auto& r : rows)
      out += pad(r.method, 16) + " | " + pad(fmt("%.4f", r.J), 12) + " | " + pad(fmt("%.1f", r.sqrt_f), 10) + " | " +
             fmt("%.4f", r.H_bar) + "\n";
  }
  return out;
}

std::string compare_csv(const json& report) {
  std::string out = "xi,method,J,sqrt_f_mw,H_bar\n";
  for (const auto& [xi, rows] : comparison_rows(report))
    for (const auto& r : rows)
      out += json(xi).dump() + "," + r.method + "," + json(r.J).dump() + "," + json(r.sqrt_f).dump() + "," +
             json(r.H_bar).dump() + "\n";
  return out;
}

std::string runs_csv(const json& report) {
  std::string out = "xi,method,J,sqrt_f_mw,H_bar,H_half,cut_lines\n";
  for (const auto& run : report.at("runs"))
    for (const auto& m : run.at("methods"))
      out += json(run.at("xi")).dump() + "," + m.at("method").get<std::string>() + "," + m.at("J").dump() + "," +
             m.at("sqrt_f_mw").dump() + "," + m.at("H_bar").dump() + "," + m.at("H_half").dump() + "," +
             std::to_string(m.at("cutset").size()) + "\n";
  return out;
}

json error_json(const std::exception& e) {
  const char* kind = "error";
  if (auto* ie = dynamic_cast<const Error*>(&e)) kind = ie->kind();
  return {{"error", {{"kind", kind}, {"message", e.what()}}}};
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace island
