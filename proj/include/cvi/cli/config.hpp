#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cvi/integrators.hpp"
#include "json.hpp"

namespace cvi::cli {

/// Malformed or inconsistent configuration; maps to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ProblemConfig {
  std::string name = "rayleigh";
  int n = 10;
  int m = 2;
  int l = 5;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> init_seed;
  double conditioning = 10.0;
  std::vector<double> mu;
  std::string file;    ///< A (rayleigh, brockett, procrustes)
  std::string file_b;  ///< B (procrustes)
};

struct MethodBlock {
  std::string label;
  RunConfig run;
  bool has_seed = false;
};

struct CliConfig {
  ProblemConfig problem;
  std::vector<MethodBlock> methods;
  std::string output_dir = "out";
  bool plot = true;
};

struct OrderCheckConfig {
  std::string system = "quadratic_htvi";
  std::vector<double> h_list{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  double T = 1.0;
  double rate_lo = 0.85;
  double rate_hi = 1.15;
  double g = 9.81;
  std::string output_dir = "out";
};

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

/// Numbers, or the strings "inf"/"infinity" for an unbounded cap.
inline double get_extended(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity")
      return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(std::string("bad value for '") + key + "'");
}

}  // namespace detail

inline MethodBlock parse_method_block(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("method block must be an object");
  if (!j.contains("method")) throw ConfigError("method block needs a 'method' key");
  MethodBlock block;
  RunConfig& rc = block.run;
  try {
    rc.method = parse_method(j.at("method").get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad 'method': ") + e.what());
  }
  block.label = detail::get_or<std::string>(j, "label", to_string(rc.method));
  auto& prm = rc.params;
  prm.p = detail::get_or(j, "p", prm.p);
  prm.p_ring = detail::get_or(j, "p_ring", prm.p_ring);
  prm.c_const = detail::get_or(j, "c_const", prm.c_const);
  prm.lambda_conv = detail::get_or(j, "lambda_conv", prm.lambda_conv);
  prm.h = detail::get_or(j, "h", prm.h);
  prm.coeff_cap = detail::get_extended(j, "coeff_cap", prm.coeff_cap);
  rc.max_iters = detail::get_or<long>(j, "max_iters", rc.max_iters);
  rc.stop_grad_tol = detail::get_or(j, "stop_grad_tol", rc.stop_grad_tol);
  rc.stop_f_tol = detail::get_or(j, "stop_f_tol", rc.stop_f_tol);
  rc.momentum_projection = detail::get_or(j, "momentum_projection", rc.momentum_projection);
  rc.newton.tol = detail::get_or(j, "newton_tol", rc.newton.tol);
  rc.newton.max_iter = detail::get_or(j, "newton_max_iter", rc.newton.max_iter);
  block.has_seed = j.contains("seed");
  rc.seed = detail::get_or<std::uint64_t>(j, "seed", rc.seed);
  try {
    rc.validate();
  } catch (const Error& e) {
    throw ConfigError(block.label + ": " + e.what());
  }
  return block;
}

inline CliConfig parse_cli_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  CliConfig cfg;
  if (!j.contains("problem") || !j.at("problem").is_object())
    throw ConfigError("config needs a 'problem' object");
  const auto& pj = j.at("problem");
  auto& pc = cfg.problem;
  pc.name = detail::get_or<std::string>(pj, "name", pc.name);
  pc.n = detail::get_or(pj, "n", pc.n);
  pc.m = detail::get_or(pj, "m", pc.m);
  pc.l = detail::get_or(pj, "l", pc.l);
  pc.seed = detail::get_or<std::uint64_t>(pj, "seed", pc.seed);
  if (pj.contains("init_seed")) pc.init_seed = detail::get_or<std::uint64_t>(pj, "init_seed", 0);
  pc.conditioning = detail::get_or(pj, "conditioning", pc.conditioning);
  pc.mu = detail::get_or(pj, "mu", pc.mu);
  pc.file = detail::get_or<std::string>(pj, "file", pc.file);
  pc.file_b = detail::get_or<std::string>(pj, "file_b", pc.file_b);

  if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty())
    throw ConfigError("config needs a non-empty 'methods' array");
  for (const auto& mj : j.at("methods")) cfg.methods.push_back(parse_method_block(mj));
  cfg.output_dir = detail::get_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.plot = detail::get_or(j, "plot", cfg.plot);
  return cfg;
}

inline OrderCheckConfig parse_order_check_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  OrderCheckConfig cfg;
  cfg.system = detail::get_or<std::string>(j, "system", cfg.system);
  cfg.h_list = detail::get_or(j, "h_list", cfg.h_list);
  cfg.T = detail::get_or(j, "T", cfg.T);
  cfg.g = detail::get_or(j, "g", cfg.g);
  cfg.output_dir = detail::get_or<std::string>(j, "output_dir", cfg.output_dir);
  if (j.contains("expected_rate")) {
    const auto r = detail::get_or<std::vector<double>>(j, "expected_rate", {});
    if (r.size() != 2 || !(r[0] <= r[1]))
      throw ConfigError("'expected_rate' must be [lo, hi] with lo <= hi");
    cfg.rate_lo = r[0];
    cfg.rate_hi = r[1];
  }
  if (cfg.system != "quadratic_htvi" && cfg.system != "spherical_pendulum_del")
    throw ConfigError("unknown order-check system '" + cfg.system + "'");
  if (cfg.h_list.size() < 3) throw ConfigError("'h_list' needs at least three values");
  return cfg;
}

/// Whitespace-separated rows, one matrix row per line. Blank lines and lines
/// starting with '#' are skipped.
inline Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("matrix file '" + path + "': bad number '" + tok + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError("matrix file '" + path + "': ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("matrix file '" + path + "' is empty");
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

/// Builds the problem instance described by the config. Files take
/// precedence over seeded generation.
inline ProblemSpec build_problem(const ProblemConfig& pc) {
  std::mt19937_64 rng(pc.seed);
  try {
    if (pc.name == "rayleigh") {
      const Matrix a = pc.file.empty() ? random_symmetric(pc.n, pc.conditioning, rng)
                                       : read_matrix_file(pc.file);
      return rayleigh(a);
    }
    if (pc.name == "brockett") {
      const Matrix a = pc.file.empty() ? random_symmetric(pc.n, pc.conditioning, rng)
                                       : read_matrix_file(pc.file);
      Vector mu(pc.mu.empty() ? pc.m : static_cast<int>(pc.mu.size()));
      for (Eigen::Index i = 0; i < mu.size(); ++i)
        mu[i] = pc.mu.empty() ? static_cast<double>(i + 1) : pc.mu[static_cast<std::size_t>(i)];
      return brockett(a, mu);
    }
    if (pc.name == "procrustes") {
      // Generated entries are N(0, 1/l), so A'A stays close to the identity.
      const double scale = 1.0 / std::sqrt(static_cast<double>(pc.l));
      const Matrix a = pc.file.empty() ? Matrix(scale * random_gaussian(pc.l, pc.n, rng))
                                       : read_matrix_file(pc.file);
      const Matrix b = pc.file_b.empty() ? Matrix(scale * random_gaussian(a.rows(), pc.m, rng))
                                         : read_matrix_file(pc.file_b);
      return procrustes(a, b);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  throw ConfigError("unknown problem '" + pc.name + "'");
}

inline Point initial_point(const ProblemSpec& prob, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return prob.manifold.random_point(rng);
}

inline std::uint64_t default_init_seed(const ProblemConfig& pc) {
  return pc.init_seed ? *pc.init_seed : pc.seed + 1;
}

}  // namespace cvi::cli
