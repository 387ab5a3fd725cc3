#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace island {

// Bus-level quantities in MW. g0 and g_max are aggregated from the
// generators at the bus when the network is constructed.
struct Bus {
  int id = 0;
  double d0 = 0.0;
  double d_max = 0.0;
  double g0 = 0.0;
  double g_max = 0.0;
};

struct Branch {
  int index = 0;  // position in the source file
  int from = 0;
  int to = 0;
  double x_pu = 0.0;
};

struct Generator {
  int bus = 0;
  double pg_mw = 0.0;
  double pg_max_mw = 0.0;
  double inertia_s = 0.0;
  double xd_prime_pu = 0.0;
  double vm_pu = 1.0;
};

class PowerNetwork {
 public:
  // Validates everything; throws ValidationError naming the offender.
  PowerNetwork(double base_mva, double base_freq_hz, int slack_bus,
               std::vector<Bus> buses, std::vector<Branch> branches,
               std::vector<Generator> gens);

  double base_mva() const { return base_mva_; }
  double base_freq_hz() const { return base_freq_hz_; }
  double omega0() const;
  int slack_bus() const { return slack_bus_; }

  int num_buses() const { return static_cast<int>(buses_.size()); }
  int num_branches() const { return static_cast<int>(branches_.size()); }
  int num_generators() const { return static_cast<int>(gens_.size()); }

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Generator>& generators() const { return gens_; }

  // Branches in canonical order: (min id, max id, file order).
  const std::vector<Branch>& branches() const { return branches_; }

  // Bus positions of a canonical edge, smaller bus id first.
  std::pair<int, int> edge_ends(int k) const { return ends_[k]; }
  const std::vector<std::pair<int, int>>& edge_ends() const { return ends_; }

  int bus_index(int id) const;
  bool has_bus(int id) const;
  int gen_bus_index(int g) const { return gen_bus_[g]; }

  // Canonical indices of every branch joining buses a and b (ids).
  std::vector<int> find_edges(int a, int b) const;

  Eigen::VectorXd d0() const;
  Eigen::VectorXd g0() const;
  Eigen::VectorXd d_max() const;
  Eigen::VectorXd g_max() const;

 private:
  double base_mva_;
  double base_freq_hz_;
  int slack_bus_;
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<Generator> gens_;
  std::vector<std::pair<int, int>> ends_;
  std::vector<int> gen_bus_;
  std::vector<std::pair<int, int>> id_lookup_;  // sorted (id, position)
};

struct OperatingPoint {
  Eigen::VectorXd angles;     // rad, per bus position, slack = 0
  Eigen::VectorXd flows;      // MW per canonical edge, positive from smaller to larger id
  Eigen::VectorXd b0;         // d0 - g0 in MW after slack balancing
  Eigen::VectorXd gen_pg_mw;  // per generator after slack balancing
};

// Native JSON when the text starts with '{', otherwise the MATPOWER subset.
// dyn_text supplies inertia_s / xd_prime_pu / vm_pu per generator; required
// for MATPOWER input, optional override for JSON input.
PowerNetwork parse_case(std::string_view case_text, std::string_view dyn_text = {});
PowerNetwork parse_matpower(std::string_view text, std::string_view dyn_text);
PowerNetwork load_case(const std::string& path, const std::string& dyn_path = {});
std::string serialize_case(const PowerNetwork& net);

// Columns follow canonical edge order regardless of the order in S.
Eigen::MatrixXd incidence_matrix(const PowerNetwork& net, const std::vector<int>& S);
Eigen::MatrixXd incidence_matrix(const PowerNetwork& net);

OperatingPoint dc_power_flow(const PowerNetwork& net);

std::string read_file(const std::string& path);

}  // namespace island
