#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "etfsel/errors.hpp"

namespace etfsel {

// Flat key=value run configuration. File values load first, CLI flags
// override, and every command writes the resolved copy next to its outputs.
struct RunConfig {
  // data
  std::string targets_path;
  std::string candidates_path;
  std::string date_col = "date";
  std::string start;
  std::string end;
  std::string risk_free_col;

  // conditional-model sampler
  int sweeps = 10000;
  int burn = 2000;
  int thin = 5;
  std::string model_prior = "multiplicity";  // or "uniform"
  std::string g_policy = "eb";               // or "fixed:<value>"
  bool shuffle_coords = false;

  // factor sampler
  int factor_k = -1;  // -1 = eigenvalue heuristic
  int factor_sweeps = -1;  // -1 = mirror the conditional sampler
  int factor_burn = -1;
  int factor_thin = -1;

  // selection
  std::string d_policy = "residual";  // "identity" or "fixed:v1,v2,..."
  int lambda_grid = 100;
  double lambda_min_ratio = 1e-4;
  double band_low = 0.40;
  double band_high = 0.60;
  std::string unpenalize;  // comma list of CANDIDATE:TARGET edges

  // portfolio
  double de_f = 0.8;
  double de_cr = 0.9;
  int de_pop_mult = 10;
  int de_max_gens = 600;
  int de_stall_gens = 80;
  std::string fixed_weights_path;
  bool annualize = false;

  // rolling
  int window_months = 120;
  int step_months = 60;

  // simulation / bench
  int sim_T = 500;
  int sim_seeds = 10;
  double bench_a = 12.0;
  double bench_b = 1.0;
  double bench_c = 3.0;
  int bench_grid = 101;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string draws_dir;   // input for select/portfolio; defaults to out_dir
  std::string graph_path;  // input edge list for portfolio; defaults to draws_dir/selected_graph.tsv

  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> entries() const;

  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string trimmed = line;
      const auto a = trimmed.find_first_not_of(" \t");
      if (a == std::string::npos || trimmed[a] == '#') continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw parse_error(path + ": line " + std::to_string(lineno) + " is not key=value");
      auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      cfg.set(strip(trimmed.substr(0, eq)), strip(trimmed.substr(eq + 1)));
    }
    return cfg;
  }

  void write_resolved(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write resolved config: " + path);
    for (const auto& [k, v] : entries()) out << k << '=' << v << '\n';
  }
};

inline void RunConfig::set(const std::string& key, const std::string& value) {
  auto to_int = [&](const std::string& v) {
    try {
      return std::stoi(v);
    } catch (const std::exception&) {
      throw config_error("config key '" + key + "': bad integer '" + v + "'");
    }
  };
  auto to_double = [&](const std::string& v) {
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      throw config_error("config key '" + key + "': bad number '" + v + "'");
    }
  };
  auto to_bool = [&](const std::string& v) {
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw config_error("config key '" + key + "': bad boolean '" + v + "'");
  };

  if (key == "targets") targets_path = value;
  else if (key == "candidates") candidates_path = value;
  else if (key == "date_col") date_col = value;
  else if (key == "start") start = value;
  else if (key == "end") end = value;
  else if (key == "risk_free_col") risk_free_col = value;
  else if (key == "sweeps") sweeps = to_int(value);
  else if (key == "burn") burn = to_int(value);
  else if (key == "thin") thin = to_int(value);
  else if (key == "model_prior") model_prior = value;
  else if (key == "g_policy") g_policy = value;
  else if (key == "shuffle_coords") shuffle_coords = to_bool(value);
  else if (key == "factor_k") factor_k = to_int(value);
  else if (key == "factor_sweeps") factor_sweeps = to_int(value);
  else if (key == "factor_burn") factor_burn = to_int(value);
  else if (key == "factor_thin") factor_thin = to_int(value);
  else if (key == "d_policy") d_policy = value;
  else if (key == "lambda_grid") lambda_grid = to_int(value);
  else if (key == "lambda_min_ratio") lambda_min_ratio = to_double(value);
  else if (key == "band_low") band_low = to_double(value);
  else if (key == "band_high") band_high = to_double(value);
  else if (key == "unpenalize") unpenalize = value;
  else if (key == "de_f") de_f = to_double(value);
  else if (key == "de_cr") de_cr = to_double(value);
  else if (key == "de_pop_mult") de_pop_mult = to_int(value);
  else if (key == "de_max_gens") de_max_gens = to_int(value);
  else if (key == "de_stall_gens") de_stall_gens = to_int(value);
  else if (key == "fixed_weights") fixed_weights_path = value;
  else if (key == "annualize") annualize = to_bool(value);
  else if (key == "window_months") window_months = to_int(value);
  else if (key == "step_months") step_months = to_int(value);
  else if (key == "sim_T") sim_T = to_int(value);
  else if (key == "sim_seeds") sim_seeds = to_int(value);
  else if (key == "bench_a") bench_a = to_double(value);
  else if (key == "bench_b") bench_b = to_double(value);
  else if (key == "bench_c") bench_c = to_double(value);
  else if (key == "bench_grid") bench_grid = to_int(value);
  else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "out_dir") out_dir = value;
  else if (key == "draws_dir") draws_dir = value;
  else if (key == "graph") graph_path = value;
  else throw config_error("unknown config key '" + key + "'");
}

inline std::map<std::string, std::string> RunConfig::entries() const {
  auto d = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::map<std::string, std::string> m;
  m["targets"] = targets_path;
  m["candidates"] = candidates_path;
  m["date_col"] = date_col;
  m["start"] = start;
  m["end"] = end;
  m["risk_free_col"] = risk_free_col;
  m["sweeps"] = std::to_string(sweeps);
  m["burn"] = std::to_string(burn);
  m["thin"] = std::to_string(thin);
  m["model_prior"] = model_prior;
  m["g_policy"] = g_policy;
  m["shuffle_coords"] = shuffle_coords ? "1" : "0";
  m["factor_k"] = std::to_string(factor_k);
  m["factor_sweeps"] = std::to_string(factor_sweeps);
  m["factor_burn"] = std::to_string(factor_burn);
  m["factor_thin"] = std::to_string(factor_thin);
  m["d_policy"] = d_policy;
  m["lambda_grid"] = std::to_string(lambda_grid);
  m["lambda_min_ratio"] = d(lambda_min_ratio);
  m["band_low"] = d(band_low);
  m["band_high"] = d(band_high);
  m["unpenalize"] = unpenalize;
  m["de_f"] = d(de_f);
  m["de_cr"] = d(de_cr);
  m["de_pop_mult"] = std::to_string(de_pop_mult);
  m["de_max_gens"] = std::to_string(de_max_gens);
  m["de_stall_gens"] = std::to_string(de_stall_gens);
  m["fixed_weights"] = fixed_weights_path;
  m["annualize"] = annualize ? "1" : "0";
  m["window_months"] = std::to_string(window_months);
  m["step_months"] = std::to_string(step_months);
  m["sim_T"] = std::to_string(sim_T);
  m["sim_seeds"] = std::to_string(sim_seeds);
  m["bench_a"] = d(bench_a);
  m["bench_b"] = d(bench_b);
  m["bench_c"] = d(bench_c);
  m["bench_grid"] = std::to_string(bench_grid);
  m["seed"] = std::to_string(seed);
  m["out_dir"] = out_dir;
  m["draws_dir"] = draws_dir;
  m["graph"] = graph_path;
  return m;
}

}  // namespace etfsel
