#ifndef HCDESIGN_IO_HPP
#define HCDESIGN_IO_HPP

// File formats:
//   design       one circuit per line, space separated, canonical form
//                ("1 2 4 3 5"); blank lines and '#' comments are skipped
//   prior        JSON {"m": int, "mu": [..], "r_diag": [..]}
//   observations CSV with header v1,..,vm,y
//   estimate     JSON {"beta_hat": [..], "lambda": number?}
//   results      CSV rep,method,heuristic,n,scenario,true_cost

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "hcdesign/circuit.hpp"
#include "hcdesign/criteria.hpp"
#include "hcdesign/error.hpp"
#include "hcdesign/estimation.hpp"
#include "hcdesign/simulation.hpp"

namespace hcdesign::io {

using nlohmann::json;

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

// ---- circuits and designs ----

inline std::string format_circuit(const Circuit& c) {
  std::string s;
  for (std::size_t i = 0; i < c.vertices().size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(c[i]);
  }
  return s;
}

inline Circuit parse_circuit(const std::string& line) {
  std::istringstream ss(line);
  std::vector<int> v;
  std::string tok;
  while (ss >> tok) {
    std::size_t used = 0;
    int x = 0;
    try {
      x = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw InvalidInput("'" + tok + "' is not a vertex number");
    v.push_back(x);
  }
  return canonicalize(v);
}

inline void write_design(std::ostream& out, const Design& d) {
  for (const auto& c : d.circuits()) out << format_circuit(c) << '\n';
}

inline Design read_design(std::istream& in) {
  std::vector<Circuit> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(parse_circuit(line));
    } catch (const InvalidInput& e) {
      throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (rows.empty()) throw InvalidInput("design file has no circuits");
  return Design(std::move(rows));
}

inline Design load_design(const std::string& path) {
  auto in = open_in(path);
  return read_design(in);
}

inline void save_design(const std::string& path, const Design& d) {
  auto out = open_out(path);
  write_design(out, d);
}

// ---- priors ----

inline Eigen::VectorXd to_vector(const json& arr, const char* what) {
  if (!arr.is_array()) throw InvalidInput(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw InvalidInput(std::string(what) + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

inline json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline PriorSpec prior_from_json(const json& j) {
  try {
    PriorSpec p{to_vector(j.at("mu"), "mu"), to_vector(j.at("r_diag"), "r_diag")};
    const int m = j.at("m").get<int>();
    p.check_vertices(m);
    return p;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed prior: ") + e.what());
  }
}

inline json prior_to_json(const PriorSpec& p) {
  return {{"m", p.m()}, {"mu", to_json(p.mu)}, {"r_diag", to_json(p.r_diag)}};
}

inline json read_json_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline PriorSpec load_prior(const std::string& path) { return prior_from_json(read_json_file(path)); }

// ---- observations ----

inline void write_observations(std::ostream& out, const ObservationSet& obs) {
  for (int i = 1; i <= obs.m; ++i) out << 'v' << i << ',';
  out << "y\n";
  for (std::size_t r = 0; r < obs.n(); ++r) {
    for (int v : obs.circuits[r].vertices()) out << v << ',';
    out << format_double(obs.y[static_cast<Eigen::Index>(r)]) << '\n';
  }
}

inline ObservationSet read_observations(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("observation file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const int m = static_cast<int>(header.size()) - 1;
  if (m < 3 || header.back() != "y") {
    throw InvalidInput("observation header must be v1,..,vm,y");
  }
  for (int i = 0; i < m; ++i) {
    if (header[static_cast<std::size_t>(i)] != "v" + std::to_string(i + 1)) {
      throw InvalidInput("observation header must be v1,..,vm,y");
    }
  }
  ObservationSet obs = ObservationSet::empty(m);
  std::vector<double> ys;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != m + 1) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(m + 1) + " fields");
    }
    try {
      std::vector<int> seq;
      for (int i = 0; i < m; ++i) seq.push_back(std::stoi(cells[static_cast<std::size_t>(i)]));
      obs.circuits.push_back(canonicalize(seq));
      ys.push_back(cells.back() == "NA" ? std::nan("") : std::stod(cells.back()));
    } catch (const InvalidInput& e) {
      throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception&) {
      throw InvalidInput("line " + std::to_string(line_no) + ": unparsable number");
    }
  }
  obs.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  obs.validate();
  return obs;
}

inline ObservationSet load_observations(const std::string& path) {
  auto in = open_in(path);
  return read_observations(in);
}

// ---- estimates ----

inline json estimate_to_json(const Eigen::VectorXd& beta, std::optional<double> lambda = {}) {
  json j{{"beta_hat", to_json(beta)}};
  if (lambda) j["lambda"] = *lambda;
  return j;
}

// Accepts {"beta_hat": [...]} (estimate output) or {"beta": [...]}.
inline Eigen::VectorXd beta_from_json(const json& j) {
  if (j.is_array()) return to_vector(j, "beta");
  if (j.contains("beta_hat")) return to_vector(j.at("beta_hat"), "beta_hat");
  if (j.contains("beta")) return to_vector(j.at("beta"), "beta");
  throw InvalidInput("cost file needs a 'beta_hat' or 'beta' array");
}

// ---- simulation results ----

inline void write_results_csv(std::ostream& out, const std::vector<ReplicationResult>& rows) {
  out << "rep,method,heuristic,n,scenario,true_cost\n";
  for (const auto& r : rows) {
    out << r.rep << ',' << to_string(r.method) << ',' << to_string(r.heuristic) << ',' << r.n
        << ',' << to_string(r.scenario) << ',' << format_double(r.true_cost) << '\n';
  }
}

inline json summary_to_json(const ExperimentResult& res) {
  json cells = json::array();
  for (const auto& c : res.summary) {
    cells.push_back({{"n", c.n},
                     {"method", to_string(c.method)},
                     {"heuristic", to_string(c.heuristic)},
                     {"count", c.count},
                     {"median", c.median},
                     {"q1", c.q1},
                     {"q3", c.q3},
                     {"min", c.min},
                     {"max", c.max}});
  }
  const auto& cfg = res.config;
  return {{"m", cfg.m},
          {"scenario", to_string(cfg.scenario)},
          {"replications", cfg.replications},
          {"tau", cfg.tau},
          {"white_noise_sd", cfg.noise.white_sd},
          {"seed", cfg.base_seed},
          {"score", to_string(cfg.score)},
          {"cells", cells}};
}

}  // namespace hcdesign::io

#endif  // HCDESIGN_IO_HPP
