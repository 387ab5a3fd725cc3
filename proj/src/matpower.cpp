#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "case_detail.hpp"
#include "islanding/errors.hpp"
#include "islanding/netcase.hpp"

namespace island {

namespace {

using Table = std::vector<std::vector<double>>;

// Replaces comments with blanks so byte offsets and line numbers survive.
std::string strip_comments(std::string_view text) {
  std::string out(text);
  bool in_comment = false;
  bool in_string = false;
  for (char& c : out) {
    if (c == '\n') {
      in_comment = false;
      in_string = false;
      continue;
    }
    if (in_comment) {
      c = ' ';
    } else if (c == '\'') {
      in_string = !in_string;
    } else if (c == '%' && !in_string) {
      in_comment = true;
      c = ' ';
    }
  }
  return out;
}

int line_at(const std::string& s, std::size_t pos) {
  int line = 1;
  for (std::size_t i = 0; i < pos && i < s.size(); ++i)
    if (s[i] == '\n') ++line;
  return line;
}

// Position just after "mpc.<name> =", or npos.
std::size_t find_assignment(const std::string& s, const std::string& name) {
  std::string key = "mpc." + name;
  std::size_t pos = 0;
  while ((pos = s.find(key, pos)) != std::string::npos) {
    std::size_t p = pos + key.size();
    bool boundary = p >= s.size() || !(std::isalnum(static_cast<unsigned char>(s[p])) || s[p] == '_');
    while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
    if (boundary && p < s.size() && s[p] == '=') return p + 1;
    pos += key.size();
  }
  return std::string::npos;
}

double parse_number(const std::string& tok, const std::string& s, std::size_t pos) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw ParseError("matpower: line " + std::to_string(line_at(s, pos)) + ": bad number '" + tok + "'");
  return v;
}

std::optional<double> read_scalar(const std::string& s, const std::string& name) {
  std::size_t p = find_assignment(s, name);
  if (p == std::string::npos) return std::nullopt;
  std::size_t end = s.find(';', p);
  if (end == std::string::npos) throw ParseError("matpower: line " + std::to_string(line_at(s, p)) + ": missing ';'");
  std::string tok = s.substr(p, end - p);
  tok.erase(0, tok.find_first_not_of(" \t\r\n"));
  tok.erase(tok.find_last_not_of(" \t\r\n") + 1);
  return parse_number(tok, s, p);
}

Table read_table(const std::string& s, const std::string& name) {
  std::size_t p = find_assignment(s, name);
  if (p == std::string::npos) throw ParseError("matpower: missing table mpc." + name);
  while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
  if (p >= s.size() || s[p] != '[')
    throw ParseError("matpower: line " + std::to_string(line_at(s, p)) + ": expected '[' after mpc." + name);
  ++p;
  Table rows;
  std::vector<double> row;
  std::string tok;
  std::size_t tok_pos = p;
  auto flush_tok = [&] {
    if (!tok.empty()) row.push_back(parse_number(tok, s, tok_pos));
    tok.clear();
  };
  auto flush_row = [&] {
    flush_tok();
    if (!row.empty()) rows.push_back(std::move(row));
    row.clear();
  };
  for (; p < s.size(); ++p) {
    char c = s[p];
    if (c == ']') {
      flush_row();
      return rows;
    }
    if (c == ';' || c == '\n') {
      flush_row();
    } else if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      flush_tok();
    } else {
      if (tok.empty()) tok_pos = p;
      tok.push_back(c);
    }
  }
  throw ParseError("matpower: unterminated table mpc." + name);
}

void require_columns(const Table& t, std::size_t cols, const std::string& name) {
  for (std::size_t r = 0; r < t.size(); ++r)
    if (t[r].size() < cols)
      throw ParseError("matpower: mpc." + name + " row " + std::to_string(r + 1) + ": expected at least " +
                       std::to_string(cols) + " columns");
}

int as_id(double v, const std::string& where) {
  if (v != static_cast<int>(v)) throw ParseError("matpower: " + where + ": non-integer bus number");
  return static_cast<int>(v);
}

}  // namespace

PowerNetwork parse_matpower(std::string_view text, std::string_view dyn_text) {
  std::string s = strip_comments(text);
  if (s.find_first_not_of(" \t\r\n") == std::string::npos) throw ParseError("matpower: empty input");
  if (dyn_text.empty()) throw ParseError("matpower: case requires a dynamics file (inertia_s, xd_prime_pu)");

  double base_mva = read_scalar(s, "baseMVA").value_or(100.0);
  Table bus = read_table(s, "bus");
  Table gen = read_table(s, "gen");
  Table branch = read_table(s, "branch");
  require_columns(bus, 3, "bus");
  require_columns(gen, 2, "gen");
  require_columns(branch, 4, "branch");

  std::vector<Bus> buses;
  std::optional<int> slack;
  for (std::size_t r = 0; r < bus.size(); ++r) {
    Bus b;
    b.id = as_id(bus[r][0], "mpc.bus row " + std::to_string(r + 1));
    b.d0 = bus[r][2];
    b.d_max = b.d0;
    if (bus[r][1] == 3 && !slack) slack = b.id;
    buses.push_back(b);
  }
  if (!slack) throw ValidationError("matpower: no reference bus (type 3) in mpc.bus");

  std::vector<Generator> gens;
  for (std::size_t r = 0; r < gen.size(); ++r) {
    const auto& g = gen[r];
    if (g.size() > 7 && g[7] <= 0) continue;
    Generator out;
    out.bus = as_id(g[0], "mpc.gen row " + std::to_string(r + 1));
    out.pg_mw = g[1];
    out.pg_max_mw = g.size() > 8 ? g[8] : g[1];
    gens.push_back(out);
  }

  std::vector<Branch> branches;
  for (std::size_t r = 0; r < branch.size(); ++r) {
    const auto& row = branch[r];
    if (row.size() > 10 && row[10] <= 0) continue;
    Branch br;
    std::string where = "mpc.branch row " + std::to_string(r + 1);
    br.from = as_id(row[0], where);
    br.to = as_id(row[1], where);
    br.x_pu = row[3];
    branches.push_back(br);
  }

  double base_freq = 60.0;
  gens = apply_dynamics(std::move(gens), dyn_text, true, &base_freq);
  return PowerNetwork(base_mva, base_freq, *slack, std::move(buses), std::move(branches), std::move(gens));
}

}  // namespace island
