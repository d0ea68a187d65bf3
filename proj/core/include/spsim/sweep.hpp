#pragma once

#include "spsim/analytics.hpp"

#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

namespace spsim {

/*
 Pulse-length sweep over the dimensionless product gamma*T on a log-spaced
 grid, in units where the reference decay rate is 1 (the "main" rate of the
 two-level system, gamma_x for the cascade with gamma_2x = 2 gamma_x).
*/
struct SweepConfig {
  std::string system = "2ls";       // "2ls" | "3ls"
  std::string channel = "default";  // resolved against the model's channels
  std::string shape = "square";     // "square" | "gaussian"
  double area = std::numbers::pi;
  double grid_min = 1e-3;
  double grid_max = 10.0;
  int grid_points = 24;
  int n_max = 14;
  double dt = 0.0;                  // 0 = automatic
  double horizon = 15.0;            // decay tail, units of 1/gamma_min
  bool mc = false;                  // append Monte-Carlo check columns
  std::uint64_t n_traj = 100000;
  std::uint64_t seed = 1;
  int threads = 0;                  // 0 = hardware concurrency
  std::string out = "-";            // "-" = stdout
  std::string format = "csv";       // "csv" | "json"
  std::string svg;                  // optional plot path

  void validate() const;            // throws std::invalid_argument
  std::vector<double> grid() const; // log-spaced gamma*T values
};

// `key = value` per line with '#' comments; unknown keys or malformed values
// throw std::runtime_error naming the line.
SweepConfig load_sweep_config(std::istream& in, const std::string& name = "<stream>");
SweepConfig load_sweep_config_file(const std::string& path);

struct SweepRow {
  double gamma_t = 0;
  double g2_moments = 0;     // hierarchy route <n(n-1)>/<n>^2
  double g2_correlator = 0;  // correlation-function route
  double mean_n = 0;
  std::vector<double> probs;  // P_0 .. P_{n_max}
  double residual = 0;
  double analytic_p2 = 0;     // short-pulse closed form for the system
  double analytic_g2 = 0;
  std::vector<double> mc_probs, mc_err;  // P_0..P_2 estimates when mc is on
};

struct SweepResult {
  SweepConfig config;
  std::string channel_name;  // resolved
  std::vector<SweepRow> rows;
};

// Runs the sweep, asserting per-point counting invariants (normalization,
// dual-route g2 agreement, cascade channel-mean equality). Failures throw
// std::runtime_error identifying the grid point.
SweepResult run_sweep(const SweepConfig& config);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_json(std::ostream& out, const SweepResult& result);
void write_sweep_svg(std::ostream& out, const SweepResult& result);
// Dispatches on config.format / config.out ("-" = stdout) and writes the SVG
// plot when config.svg is set.
void write_sweep(const SweepResult& result);

}  // namespace spsim
