#pragma once

#include <memory>
#include <optional>
#include <string>

#include "deltaclip/analysis.hpp"
#include "deltaclip/config.hpp"
#include "deltaclip/neurotron.hpp"
#include "deltaclip/run.hpp"

namespace deltaclip {

// Everything needed to execute one configured run: the problem objects are
// built deterministically from (config, seed, stream), so a grid can stamp
// out independent cells by varying the stream id.
struct PreparedRun {
  std::shared_ptr<Objective> objective;     // null for neurotron runs
  std::optional<MlpSpec> mlp_init;          // initial network, when mlp
  std::optional<Dataset> dataset;           // when mlp
  std::optional<NeurotronProblem> neurotron;
  StepRule rule{};
  Schedule schedule;
  Vector w0;
  long iterations = 0;
  double stop_tol = 1e-12;
  int batch = 1;
  std::optional<double> theta;
  RngStream oracle_stream{0};
  RngStream neurotron_stream{0};
};

PreparedRun prepare_run(const ExperimentConfig& cfg, std::uint64_t seed, std::uint64_t stream_id);

// Executes a prepared run with the runner the configuration selects.
Trajectory execute(const PreparedRun& run);

// Stream id for one grid cell, a hash of the seed and the cell's parameter
// values; independent of cell order.
std::uint64_t grid_cell_stream(std::uint64_t seed, double eta, double gamma, double delta);

struct RunResult {
  Trajectory trajectory;
  std::optional<TheoremReport> report;
  double wall_time_s = 0.0;
};

// Builds the theorem report for a finished trajectory when the configured
// problem admits one (quadratic: analytic constants; mlp: kernel lambda0 and
// measured mu/beta). Neurotron and stochastic runs return nullopt.
std::optional<TheoremReport> build_report(const PreparedRun& run, const Trajectory& traj);

// Command implementations behind the CLI. Each resolves the output directory
// from (flag override, config out_dir, DELTACLIP_OUT, "<config stem>_out").
// Return values are process exit codes: 0 ok (including diverged runs),
// 1 verification failure, 2 config/usage errors are signalled by ConfigError.
int cmd_run(const std::string& config_path, const std::string& out_override,
            std::optional<std::uint64_t> seed_override);
int cmd_grid(const std::string& config_path, const std::string& out_override,
             std::optional<std::uint64_t> seed_override, int jobs);
int cmd_verify(const std::string& config_path, const std::string& out_override,
               std::optional<std::uint64_t> seed_override);

// Trace file schema: header `t,loss,grad_norm,step_size,dist_from_init`, one
// row per recorded iterate, RFC-4180 quoting, %.17g numbers (round-trip safe).
void write_trace_csv(const std::string& path, const Trajectory& traj);

std::string format_double(double v);  // %.17g
std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& out_override);

}  // namespace deltaclip
