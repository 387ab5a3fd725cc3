#pragma once

#include <exception>
#include <string>
#include <vector>

#include <json.hpp>

#include "islanding/coherency.hpp"
#include "islanding/islanding.hpp"
#include "islanding/netcase.hpp"
#include "islanding/refsel.hpp"
#include "islanding/spectral.hpp"

namespace island {

struct RunConfig {
  std::string case_path;
  std::string dyn_path;
  int r = 3;
  std::vector<double> xi = {1e-7};
  double epsilon = 1e-3;
  std::string method = "weak-submodular";  // weak-submodular | spectral | both
  std::vector<std::string> refs;           // "G5" names a generator, a bare number names a bus
  bool dump_model = false;
};

void validate(const RunConfig& cfg);

struct Prepared {
  OperatingPoint op;
  CoherencyModel model;
  ReferenceSelection greedy;
  ReferenceSelection pivoting;
  bool overridden = false;
};

Prepared prepare(const PowerNetwork& net, int r, const std::vector<std::string>& ref_tokens = {});
std::vector<int> resolve_refs(const PowerNetwork& net, const std::vector<std::string>& tokens);

std::string gen_label(int g);
nlohmann::json edge_json(const PowerNetwork& net, int edge);
nlohmann::json solution_json(const PowerNetwork& net, const MetricContext& ctx, const IslandingSolution& sol,
                             const SpectralResult* detail = nullptr, double epsilon = 0.0);
nlohmann::json model_json(const CoherencyModel& model);
nlohmann::json refsel_json(const PowerNetwork& net, const Prepared& prep);

nlohmann::json run_report(const PowerNetwork& net, const RunConfig& cfg);
nlohmann::json run_report(const RunConfig& cfg);

// Method | J | sqrt f (MW) | H_bar, one block per xi; needs two methods per run.
std::string compare_table(const nlohmann::json& report);
std::string compare_csv(const nlohmann::json& report);
// One row per (xi, method); no method-count requirement.
std::string runs_csv(const nlohmann::json& report);

nlohmann::json error_json(const std::exception& e);
std::string dump(const nlohmann::json& doc);

}  // namespace island
