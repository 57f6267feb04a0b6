#include "deltaclip/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include <json.hpp>

namespace deltaclip {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream-id slots for the independent random decisions inside one run.
constexpr std::uint64_t kDatasetStream = 1;
constexpr std::uint64_t kWeightsStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kOracleStream = 4;
constexpr std::uint64_t kNeurotronStream = 5;

Dataset make_dataset(const DatasetConfig& cfg, RngStream rng) {
  if (cfg.kind == DatasetConfig::Kind::Csv) return load_dataset_csv(cfg.path);
  Dataset d;
  for (int i = 0; i < cfg.n; ++i) {
    Vector x = gaussian_vector(cfg.input_dim, rng);
    const double norm = l2_norm(x);
    for (auto& v : x) v /= norm;
    d.inputs.push_back(std::move(x));
    d.targets.push_back(cfg.target_lo + (cfg.target_hi - cfg.target_lo) * rng.uniform());
  }
  return d;
}

Vector make_init(const InitConfig& cfg, int dim, RngStream rng) {
  switch (cfg.kind) {
    case InitConfig::Kind::Zeros:
      return Vector(dim, 0.0);
    case InitConfig::Kind::Point:
      if (static_cast<int>(cfg.point.size()) != dim) {
        throw ConfigError("init.point has length " + std::to_string(cfg.point.size()) +
                          " but the problem dimension is " + std::to_string(dim));
      }
      return cfg.point;
    case InitConfig::Kind::Gaussian: {
      Vector w = gaussian_vector(dim, rng);
      for (auto& v : w) v *= cfg.scale;
      return w;
    }
  }
  return Vector(dim, 0.0);
}

StepRule make_rule(const OptimizerConfig& o) {
  switch (o.kind) {
    case OptimizerConfig::Kind::Constant: return StepRule::constant(o.eta);
    case OptimizerConfig::Kind::GClip: return StepRule::gclip(o.eta, o.gamma);
    case OptimizerConfig::Kind::DeltaGClip: return StepRule::delta_gclip(o.eta, o.gamma, o.delta);
    case OptimizerConfig::Kind::Neurotron: return StepRule::constant(o.eta);
  }
  return StepRule::constant(o.eta);
}

NeurotronProblem make_neurotron(const NeurotronConfig& cfg, RngStream rng) {
  NeurotronProblem p;
  p.sensing = cfg.identity_sensing ? Matrix::identity(cfg.r) : gaussian_matrix(cfg.r, cfg.n, rng);
  for (int i = 0; i < cfg.k; ++i) {
    p.gates.push_back(cfg.identity_gates ? Matrix::identity(cfg.r)
                                         : gaussian_matrix(cfg.r, cfg.n, rng));
  }
  if (cfg.true_filter) {
    p.true_filter = *cfg.true_filter;
  } else {
    p.true_filter = gaussian_vector(cfg.r, rng);
    const double norm = l2_norm(p.true_filter);
    for (auto& v : p.true_filter) v /= norm;
  }
  p.flip_prob = cfg.flip_prob;
  p.noise_mag = cfg.noise_mag;
  p.validate();
  return p;
}

}  // namespace

std::uint64_t grid_cell_stream(std::uint64_t seed, double eta, double gamma, double delta) {
  auto bits = [](double v) {
    std::uint64_t b = 0;
    static_assert(sizeof b == sizeof v);
    std::memcpy(&b, &v, sizeof b);
    return b;
  };
  std::uint64_t h = mix64(seed ^ 0x6772696455ULL);
  h = mix64(h ^ bits(eta));
  h = mix64(h ^ bits(gamma));
  h = mix64(h ^ bits(delta));
  return h;
}

PreparedRun prepare_run(const ExperimentConfig& cfg, std::uint64_t seed, std::uint64_t stream_id) {
  PreparedRun run;
  const RngStream base(seed, stream_id);
  run.rule = make_rule(cfg.optimizer);
  run.schedule = Schedule(cfg.schedule);
  run.iterations = cfg.iterations;
  run.stop_tol = cfg.stop_tol;
  run.theta = cfg.theta;
  run.batch = cfg.optimizer.batch;
  run.oracle_stream = base.split(kOracleStream);
  run.neurotron_stream = base.split(kNeurotronStream);

  if (cfg.optimizer.kind == OptimizerConfig::Kind::Neurotron) {
    run.neurotron = make_neurotron(*cfg.neurotron, base.split(kDatasetStream));
    run.w0 = make_init(cfg.init, cfg.neurotron->r, base.split(kInitStream));
    return run;
  }

  const ObjectiveConfig& obj = *cfg.objective;
  if (obj.kind == ObjectiveConfig::Kind::Quadratic) {
    try {
      run.objective = std::make_shared<QuadraticObjective>(obj.quadratic);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("objective: ") + e.what());
    }
    run.w0 = make_init(cfg.init, run.objective->dim(), base.split(kInitStream));
    return run;
  }

  Dataset data = make_dataset(obj.dataset, base.split(kDatasetStream));
  RngStream wstream = base.split(kWeightsStream);
  MlpSpec spec;
  try {
    spec = make_gaussian_mlp(obj.widths, obj.hidden, obj.output, wstream);
    run.objective = std::make_shared<MlpObjective>(spec, data);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("objective: ") + e.what());
  }
  if (cfg.init.kind == InitConfig::Kind::Gaussian) {
    // The network's own standard-normal weights are the initialization the
    // kernel analysis assumes; init.scale rescales them if asked.
    run.w0 = spec.weights;
    if (cfg.init.scale != 1.0) {
      for (auto& v : run.w0) v *= cfg.init.scale;
    }
  } else {
    run.w0 = make_init(cfg.init, spec.weight_count(), base.split(kInitStream));
  }
  run.mlp_init = std::move(spec);
  run.dataset = std::move(data);
  return run;
}

Trajectory execute(const PreparedRun& run) {
  if (run.neurotron) {
    return neurotron_run(*run.neurotron, run.w0, run.iterations, run.batch, run.rule.eta,
                         run.neurotron_stream);
  }
  if (run.theta) {
    NoiseOracle oracle(*run.theta, run.oracle_stream);
    return run_stochastic(*run.objective, run.rule, oracle, run.w0, run.iterations);
  }
  return run_deterministic(*run.objective, run.rule, run.schedule, run.w0, run.iterations,
                           run.stop_tol);
}

std::optional<TheoremReport> build_report(const PreparedRun& run, const Trajectory& traj) {
  // The rate/radius analysis covers deterministic, constant-eta delta-gclip
  // runs only; everything else gets no report.
  if (run.neurotron || run.theta || traj.records.empty()) return std::nullopt;
  if (run.rule.kind != StepRule::Kind::DeltaGClip || !run.schedule.empty()) return std::nullopt;

  double mu = 0.0, beta = 0.0, lambda0 = 0.0;
  if (const auto constants = run.objective->known_constants()) {
    mu = constants->mu;
    beta = constants->beta;
  } else if (run.mlp_init) {
    MlpSpec at_init = *run.mlp_init;
    at_init.weights = run.w0;
    lambda0 = ntk_lambda0(at_init, *run.dataset);
    const double rho = activation_rho(run.mlp_init->output);
    mu = std::min(empirical_pl(traj), lambda0 * rho * rho);
    // Measured smoothness witness: |grad|^2 <= 2 beta L along any descent
    // trajectory of a beta-smooth loss, so this maximum under-estimates beta.
    for (const auto& rec : traj.records) {
      if (rec.loss > 1e-15) beta = std::max(beta, rec.grad_norm * rec.grad_norm / (2.0 * rec.loss));
    }
  }
  if (!(mu > 0.0) || !(beta > 0.0) || !std::isfinite(mu) || !std::isfinite(beta)) {
    return std::nullopt;
  }
  if (run.rule.eta * run.rule.delta * mu >= 2.0) return std::nullopt;
  return make_theorem_report(traj, run.rule.eta, run.rule.delta, mu, beta, lambda0);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

void write_trace_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "t,loss,grad_norm,step_size,dist_from_init\n";
  for (const auto& r : traj.records) {
    out << r.t << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.step_size) << ',' << format_double(r.dist_from_init) << '\n';
  }
}

std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& out_override) {
  if (!out_override.empty()) return out_override;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  const std::string stem = fs::path(cfg.source_path).stem().string();
  if (const char* root = std::getenv("DELTACLIP_OUT"); root && *root) {
    return (fs::path(root) / stem).string();
  }
  return stem + "_out";
}

namespace {

void write_plot_script(const fs::path& dir) {
  std::ofstream out(dir / "plot.gp", std::ios::binary);
  out << "# gnuplot script for the run trace\n"
         "set datafile separator ','\n"
         "set logscale y\n"
         "set xlabel 't'\n"
         "plot 'trace.csv' every ::1 using 1:2 with lines title 'loss', \\\n"
         "     'trace.csv' every ::1 using 1:3 with lines title 'grad norm', \\\n"
         "     'trace.csv' every ::1 using 1:4 with lines title 'step size'\n";
}

json report_to_json(const std::optional<TheoremReport>& rep) {
  if (!rep) return nullptr;
  return json::parse(rep->to_json());
}

json run_report_json(const ExperimentConfig& cfg, const Trajectory& traj,
                     const std::optional<TheoremReport>& rep, double wall_time_s,
                     const std::string& trace_file) {
  json out;
  out["status"] = traj.reason == Termination::Diverged ? "diverged" : "ok";
  out["termination"] = to_string(traj.reason);
  if (!traj.records.empty()) {
    out["final_loss"] = traj.final_loss();
    out["min_loss"] = traj.min_loss();
    const double g = traj.min_grad_norm();
    out["min_grad_norm_sq"] = g * g;
    out["iterations_recorded"] = traj.records.size();
  } else {
    out["final_loss"] = nullptr;
    out["min_loss"] = nullptr;
    out["min_grad_norm_sq"] = nullptr;
    out["iterations_recorded"] = 0;
  }
  out["wall_time_s"] = wall_time_s;
  out["trace_file"] = trace_file;
  out["theorem_report"] = report_to_json(rep);
  out["config"] = json::parse(cfg.raw_json);
  return out;
}

struct GridCell {
  double eta = 0.0, gamma = 0.0, delta = 0.0;
  std::string status = "error";
  double final_loss = std::numeric_limits<double>::infinity();
  double min_loss = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::string trace_file;
  std::string note;
  bool has_loss = false;
};

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_override,
            std::optional<std::uint64_t> seed_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!cfg.grid.empty()) {
    throw ConfigError("config has grid axes; use the grid command");
  }
  const std::uint64_t seed = seed_override.value_or(cfg.seed);

  const auto t0 = std::chrono::steady_clock::now();
  const PreparedRun run = prepare_run(cfg, seed, 0);
  const Trajectory traj = execute(run);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir = resolve_out_dir(cfg, out_override);
  fs::create_directories(dir);
  write_trace_csv((dir / "trace.csv").string(), traj);
  write_plot_script(dir);

  const auto rep = build_report(run, traj);
  std::ofstream rf(dir / "report.json", std::ios::binary);
  rf << run_report_json(cfg, traj, rep, wall, "trace.csv").dump(2) << '\n';

  std::cout << "status=" << (traj.reason == Termination::Diverged ? "diverged" : "ok");
  if (!traj.records.empty()) {
    std::cout << " final_loss=" << format_double(traj.final_loss())
              << " iterations=" << traj.records.back().t;
  }
  std::cout << " report=" << (dir / "report.json").string() << '\n';
  return 0;
}

int cmd_grid(const std::string& config_path, const std::string& out_override,
             std::optional<std::uint64_t> seed_override, int jobs) {
  ExperimentConfig cfg = load_config(config_path);
  if (cfg.grid.empty()) {
    throw ConfigError("config has no grid axes; use the run command");
  }
  if (cfg.optimizer.kind == OptimizerConfig::Kind::Neurotron) {
    throw ConfigError("grid search over the neurotron optimizer is not supported");
  }
  const std::uint64_t seed = seed_override.value_or(cfg.seed);

  const std::vector<double> etas =
      cfg.grid.eta.empty() ? std::vector<double>{cfg.optimizer.eta} : cfg.grid.eta;
  const std::vector<double> gammas =
      cfg.grid.gamma.empty() ? std::vector<double>{cfg.optimizer.gamma} : cfg.grid.gamma;
  const std::vector<double> deltas =
      cfg.grid.delta.empty() ? std::vector<double>{cfg.optimizer.delta} : cfg.grid.delta;

  std::vector<GridCell> cells;
  for (double eta : etas)
    for (double gamma : gammas)
      for (double delta : deltas) {
        GridCell c;
        c.eta = eta;
        c.gamma = gamma;
        c.delta = delta;
        cells.push_back(c);
      }

  const fs::path dir = resolve_out_dir(cfg, out_override);
  fs::create_directories(dir / "cells");

  auto run_cell = [&](GridCell& cell) {
    char label[96];
    std::snprintf(label, sizeof label, "eta%g_gamma%g_delta%g", cell.eta, cell.gamma, cell.delta);
    const fs::path cell_dir = dir / "cells" / label;
    fs::create_directories(cell_dir);
    try {
      ExperimentConfig cell_cfg = cfg;
      cell_cfg.optimizer.eta = cell.eta;
      cell_cfg.optimizer.gamma = cell.gamma;
      cell_cfg.optimizer.delta = cell.delta;
      const std::uint64_t stream = grid_cell_stream(seed, cell.eta, cell.gamma, cell.delta);
      const PreparedRun run = prepare_run(cell_cfg, seed, stream);
      const Trajectory traj = execute(run);
      write_trace_csv((cell_dir / "trace.csv").string(), traj);
      cell.trace_file = (fs::path("cells") / label / "trace.csv").string();
      cell.status = traj.reason == Termination::Diverged ? "diverged" : "ok";
      if (!traj.records.empty()) {
        cell.final_loss = traj.final_loss();
        cell.min_loss = traj.min_loss();
        cell.iterations = traj.records.size();
        cell.has_loss = true;
      }
    } catch (const std::exception& e) {
      cell.status = "error";
      cell.note = e.what();
    }
  };

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (auto& c : cells) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
          run_cell(cells[i]);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  // Rank by final loss; diverged and errored cells sink to the bottom.
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto key = [&](const GridCell& c) {
      return c.status == "ok" ? c.final_loss : std::numeric_limits<double>::infinity();
    };
    return key(cells[a]) < key(cells[b]);
  });

  std::ofstream out(dir / "grid_summary.csv", std::ios::binary);
  out << "eta,gamma,delta,status,final_loss,min_loss,iterations,trace_file,best\n";
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const GridCell& c = cells[order[rank]];
    out << format_double(c.eta) << ',' << format_double(c.gamma) << ',' << format_double(c.delta)
        << ',' << csv_quote(c.status) << ',';
    if (c.has_loss) out << format_double(c.final_loss);
    out << ',';
    if (c.has_loss) out << format_double(c.min_loss);
    out << ',' << c.iterations << ',' << csv_quote(c.trace_file) << ','
        << (rank == 0 && c.status == "ok" ? 1 : 0) << '\n';
  }
  out.close();

  std::cout << "grid cells=" << cells.size() << " summary=" << (dir / "grid_summary.csv").string()
            << '\n';
  return 0;
}

namespace {

struct Check {
  std::string name;
  std::string status;  // pass | fail | skipped
  json detail = json::object();
};

Check sandwich_check(const StepRule& rule, std::uint64_t seed) {
  Check c{"step_size_sandwich", "pass"};
  RngStream rng(seed, 0x5A11D81CULL);  // fixed sub-stream for the sweep
  long violations = 0;
  const long draws = 100000;
  for (long i = 0; i < draws; ++i) {
    // log-uniform norms across 24 decades, plus exact zero now and then
    double norm = std::pow(10.0, -12.0 + 24.0 * rng.uniform());
    if (i % 1000 == 0) norm = 0.0;
    const double h = rule.step_size(norm);
    bool ok = h <= rule.eta && h > 0.0;
    if (rule.kind == StepRule::Kind::DeltaGClip) ok = ok && h >= rule.eta * rule.delta;
    if (rule.kind == StepRule::Kind::Constant) ok = ok && h == rule.eta;
    if (!ok) ++violations;
  }
  c.detail["draws"] = draws;
  c.detail["violations"] = violations;
  if (violations > 0) c.status = "fail";
  return c;
}

}  // namespace

int cmd_verify(const std::string& config_path, const std::string& out_override,
               std::optional<std::uint64_t> seed_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!cfg.grid.empty()) {
    throw ConfigError("verify needs a scalar optimizer config, not grid axes");
  }
  const std::uint64_t seed = seed_override.value_or(cfg.seed);
  const PreparedRun run = prepare_run(cfg, seed, 0);

  std::vector<Check> checks;

  // Gradient correctness at the starting point.
  if (run.objective) {
    Check c{"gradcheck", "pass"};
    const double worst = gradcheck(*run.objective, run.w0);
    const bool quadratic = run.objective->known_constants().has_value();
    const double threshold = quadratic ? 1e-9 : 1e-5;
    c.detail["value"] = worst;
    c.detail["threshold"] = threshold;
    if (!(worst <= threshold)) c.status = "fail";
    checks.push_back(c);
  } else {
    checks.push_back({"gradcheck", "skipped", {{"note", "no differentiable objective"}}});
  }

  checks.push_back(sandwich_check(run.rule, seed));

  // Rate envelope and trust radius on the configured trajectory.
  if (run.neurotron || run.theta) {
    checks.push_back({"rate_envelope", "skipped", {{"note", "deterministic runs only"}}});
    checks.push_back({"trust_radius", "skipped", {{"note", "deterministic runs only"}}});
  } else if (run.rule.kind != StepRule::Kind::DeltaGClip || !run.schedule.empty()) {
    checks.push_back(
        {"rate_envelope", "skipped", {{"note", "constant-eta delta-gclip runs only"}}});
    checks.push_back({"trust_radius", "skipped", {{"note", "constant-eta delta-gclip runs only"}}});
  } else {
    const Trajectory traj = execute(run);
    const auto rep = build_report(run, traj);
    double mu = 0.0, beta = 0.0;
    if (rep) {
      mu = rep->mu;
      beta = rep->beta;
    }
    const bool hypotheses_met =
        rep && run.rule.eta < std::min(1.0 / beta, 1.0 / mu) && traj.reason != Termination::Diverged;
    if (!hypotheses_met) {
      const char* note = traj.reason == Termination::Diverged
                             ? "run diverged"
                             : "hypotheses-not-met: need eta < min(1/beta, 1/mu)";
      checks.push_back({"rate_envelope", "skipped", {{"note", note}}});
      checks.push_back({"trust_radius", "skipped", {{"note", note}}});
    } else {
      Check env{"rate_envelope", rep->envelope_ok ? "pass" : "fail"};
      env.detail["mu"] = mu;
      env.detail["beta"] = beta;
      env.detail["rate_factor"] = rep->rate_factor;
      env.detail["max_violation"] = rep->max_envelope_violation;
      checks.push_back(env);

      Check ball{"trust_radius", rep->radius_ok ? "pass" : "fail"};
      ball.detail["radius"] = rep->radius_R;
      double max_dist = 0.0;
      for (const auto& r : traj.records) max_dist = std::max(max_dist, r.dist_from_init);
      ball.detail["max_dist_from_init"] = max_dist;
      checks.push_back(ball);
    }
  }

  bool all_pass = true;
  json out;
  out["checks"] = json::array();
  for (const auto& c : checks) {
    json jc;
    jc["name"] = c.name;
    jc["status"] = c.status;
    jc["detail"] = c.detail;
    out["checks"].push_back(jc);
    if (c.status == "fail") all_pass = false;
    std::cout << "[" << c.status << "] " << c.name;
    if (!c.detail.empty()) std::cout << " " << c.detail.dump();
    std::cout << '\n';
  }
  out["all_pass"] = all_pass;

  const fs::path dir = resolve_out_dir(cfg, out_override);
  fs::create_directories(dir);
  std::ofstream vf(dir / "verify.json", std::ios::binary);
  vf << out.dump(2) << '\n';

  std::cout << (all_pass ? "verification passed" : "verification FAILED") << '\n';
  return all_pass ? 0 : 1;
}

}  // namespace deltaclip
