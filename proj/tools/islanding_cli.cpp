// Command-line front end: islanding [run flags] | refsel | compare.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "islanding/errors.hpp"
#include "islanding/report.hpp"

namespace {

using island::ConfigError;
using json = nlohmann::json;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(item);
  return out;
}

std::vector<double> parse_xi(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::logic_error&) {
      throw ConfigError("bad xi value '" + tok + "'");
    }
    if (tok.find_first_not_of(" \t", used) != std::string::npos) throw ConfigError("bad xi value '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + out_path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled islanding by weakly submodular line selection"};
  app.set_help_all_flag("--help-all");

  island::RunConfig cfg;
  std::string xi_text = "1e-7";
  std::string refs_text;
  std::string out_path;
  std::string format = "json";

  app.add_option("--case", cfg.case_path, "case file (native JSON or MATPOWER)");
  app.add_option("--dyn", cfg.dyn_path, "dynamics JSON (required for MATPOWER cases)");
  app.add_option("--r", cfg.r, "number of islands")->capture_default_str();
  app.add_option("--xi", xi_text, "trade-off weight, or a comma-separated list")->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "local-search improvement threshold")->capture_default_str();
  app.add_option("--method", cfg.method, "weak-submodular | spectral | both")->capture_default_str();
  app.add_option("--refs", refs_text, "override references, e.g. \"G1,G5,G9\" or bus ids \"39,34,38\"");
  app.add_option("--out", out_path, "write the report here instead of stdout");
  app.add_flag("--dump-model", cfg.dump_model, "include K, M, U, L in the report");
  app.add_option("--format", format, "json | csv | table")->capture_default_str();

  auto* refsel = app.add_subcommand("refsel", "select reference generators and print the gain trace");
  std::string rs_case, rs_dyn, rs_out;
  int rs_r = 3;
  refsel->add_option("--case", rs_case, "case file")->required();
  refsel->add_option("--dyn", rs_dyn, "dynamics JSON");
  refsel->add_option("--r", rs_r, "number of references")->capture_default_str();
  refsel->add_option("--out", rs_out, "output path");

  auto* compare = app.add_subcommand("compare", "render a run report as a comparison table");
  std::string cmp_report, cmp_out, cmp_format = "table";
  compare->add_option("report", cmp_report, "report JSON written by a run")->required();
  compare->add_option("--format", cmp_format, "table | csv")->capture_default_str();
  compare->add_option("--out", cmp_out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << island::dump({{"error", {{"kind", "usage_error"}, {"message", e.what()}}}});
    return 2;
  }

  try {
    if (*refsel) {
      island::PowerNetwork net = island::load_case(rs_case, rs_dyn);
      island::Prepared prep = island::prepare(net, rs_r);
      emit(island::dump(island::refsel_json(net, prep)), rs_out);
      return 0;
    }
    if (*compare) {
      json report;
      try {
        report = json::parse(island::read_file(cmp_report));
      } catch (const json::parse_error& e) {
        throw island::ParseError(std::string("report: ") + e.what());
      }
      if (cmp_format == "table")
        emit(island::compare_table(report), cmp_out);
      else if (cmp_format == "csv")
        emit(island::compare_csv(report), cmp_out);
      else
        throw ConfigError("compare format must be table or csv");
      return 0;
    }

    cfg.xi = parse_xi(xi_text);
    if (!refs_text.empty()) cfg.refs = split(refs_text, ',');
    if (format != "json" && format != "csv" && format != "table") throw ConfigError("format must be json, csv or table");
    json report = island::run_report(cfg);
    if (format == "json")
      emit(island::dump(report), out_path);
    else if (format == "csv")
      emit(island::runs_csv(report), out_path);
    else
      emit(island::compare_table(report), out_path);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << island::dump(island::error_json(e));
    return 1;
  }
}
