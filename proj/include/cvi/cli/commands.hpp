#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <ostream>
#include <string>
#include <vector>

#include "cvi/cli/config.hpp"
#include "cvi/cli/output.hpp"
#include "cvi/order_check.hpp"
#include "cvi/systems.hpp"

namespace cvi::cli {

enum ExitCode : int { ok = 0, config_error = 1, numerical_failure = 2, acceptance_failure = 3 };

struct CommandOptions {
  std::string config_path;
  std::string out_dir;  ///< overrides the config's output_dir when non-empty
  bool no_plot = false;
};

namespace detail {

inline std::filesystem::path prepare_output_dir(const std::string& configured,
                                                const CommandOptions& opts) {
  std::filesystem::path dir = opts.out_dir.empty() ? configured : opts.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ConfigError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

inline std::vector<std::string> unique_labels(const std::vector<MethodBlock>& blocks) {
  std::map<std::string, int> seen;
  std::vector<std::string> out;
  for (const auto& b : blocks) {
    const int n = seen[b.label]++;
    out.push_back(n == 0 ? b.label : b.label + "_" + std::to_string(n + 1));
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

inline void report(std::ostream& log, const std::string& label, const Trace& t) {
  log << label << ": " << t.iterations() << " iterations, f = "
      << (t.rows.empty() ? std::string("n/a") : format_number(t.rows.back().f));
  if (t.converged) log << " (converged)";
  if (t.failed) log << " (FAILED: " << t.failure << ")";
  log << '\n';
}

}  // namespace detail

/// One CSV per method block, each from its own initial point seed.
inline int cmd_run(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  try {
    const CliConfig cfg = parse_cli_config(read_json_file(opts.config_path));
    const auto dir = detail::prepare_output_dir(cfg.output_dir, opts);
    const ProblemSpec prob = build_problem(cfg.problem);
    const auto labels = detail::unique_labels(cfg.methods);
    bool failed = false;
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
      const auto& block = cfg.methods[i];
      const auto seed = block.has_seed ? block.run.seed : default_init_seed(cfg.problem);
      const Trace trace = run(block.run, prob, initial_point(prob, seed));
      std::ostringstream csv;
      write_trace_csv(csv, trace);
      detail::write_file(dir / (labels[i] + ".csv"), csv.str());
      detail::report(log, labels[i], trace);
      failed = failed || trace.failed;
    }
    return failed ? numerical_failure : ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return numerical_failure;
  }
}

/// All methods on the same instance and initial point; combined CSV plus an
/// SVG of the oracle gap (or raw f without an oracle) against iteration.
inline int cmd_compare(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  try {
    const CliConfig cfg = parse_cli_config(read_json_file(opts.config_path));
    if (cfg.methods.size() < 2) throw ConfigError("compare needs at least two method blocks");
    const auto dir = detail::prepare_output_dir(cfg.output_dir, opts);
    const ProblemSpec prob = build_problem(cfg.problem);
    const Point x0 = initial_point(prob, default_init_seed(cfg.problem));
    const auto labels = detail::unique_labels(cfg.methods);

    std::vector<Trace> traces;
    bool failed = false;
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
      traces.push_back(run(cfg.methods[i].run, prob, x0));
      detail::report(log, labels[i], traces.back());
      failed = failed || traces.back().failed;
    }
    std::ostringstream csv;
    write_combined_csv(csv, labels, traces);
    detail::write_file(dir / "compare.csv", csv.str());

    if (cfg.plot && !opts.no_plot) {
      const bool has_oracle = prob.oracle_value.has_value();
      std::vector<Series> series;
      bool all_positive = true;
      for (std::size_t i = 0; i < traces.size(); ++i) {
        Series s{labels[i], {}, {}};
        for (const auto& r : traces[i].rows) {
          s.x.push_back(static_cast<double>(r.k));
          s.y.push_back(has_oracle ? std::abs(*r.error_vs_oracle) : r.f);
          if (!has_oracle && !(r.f > 0)) all_positive = false;
        }
        series.push_back(std::move(s));
      }
      std::ostringstream svg;
      write_svg_plot(svg, series, prob.name + " on " + prob.manifold.name(),
                     has_oracle ? "|f - f*|" : "f", has_oracle || all_positive);
      detail::write_file(dir / "compare.svg", svg.str());
    }
    return failed ? numerical_failure : ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return numerical_failure;
  }
}

inline systems::OrderSystem make_order_system(const OrderCheckConfig& cfg) {
  if (cfg.system == "quadratic_htvi") return systems::quadratic_htvi_order_system();
  const double h_min = *std::min_element(cfg.h_list.begin(), cfg.h_list.end());
  return systems::spherical_pendulum_order_system(h_min / 100.0, cfg.g);
}

/// Fits the global error rate and checks it against the expected interval.
inline int cmd_order_check(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  try {
    const OrderCheckConfig cfg = parse_order_check_config(read_json_file(opts.config_path));
    const auto dir = detail::prepare_output_dir(cfg.output_dir, opts);
    const auto sys = make_order_system(cfg);
    OrderCheckResult res;
    try {
      res = order_check(sys.step, sys.reference, sys.initial, cfg.h_list, cfg.T);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    std::ostringstream csv;
    csv << "h,error,used\n";
    for (std::size_t i = 0; i < res.h.size(); ++i)
      csv << format_number(res.h[i]) << ',' << format_number(res.error[i]) << ','
          << (res.used[i] ? 1 : 0) << '\n';
    detail::write_file(dir / "order_check.csv", csv.str());
    for (const auto& w : res.warnings) err << "warning: " << w << '\n';

    const bool pass = !res.noise_floor && res.rate >= cfg.rate_lo && res.rate <= cfg.rate_hi;
    log << cfg.system << ": rate = " << res.rate << " expected [" << cfg.rate_lo << ", "
        << cfg.rate_hi << "] " << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? ok : acceptance_failure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return numerical_failure;
  }
}

}  // namespace cvi::cli
