#pragma once

#include <string>
#include <vector>

#include "deltaclip/noise.hpp"
#include "deltaclip/objective.hpp"
#include "deltaclip/step_rule.hpp"

namespace deltaclip {

enum class Termination { MaxIterations, GradTolerance, Diverged };

std::string to_string(Termination t);

struct TrajectoryRecord {
  long t = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double step_size = 0.0;      // the h used to leave this iterate
  double dist_from_init = 0.0;
};

// Per-iteration record of one optimizer run. A run of T steps carries T+1
// records (t = 0 through T); a run truncated by divergence keeps only the
// finite iterates. In stochastic runs loss and grad_norm are the true
// quantities while step_size is the one computed from the noisy gradient.
struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Vector final_weights;
  Termination reason = Termination::MaxIterations;

  double initial_loss() const { return records.front().loss; }
  double final_loss() const { return records.back().loss; }
  double min_loss() const;
  double min_grad_norm() const;
};

// w_{t+1} = w_t - h(|grad L(w_t)|) * grad L(w_t), for T steps or until
// grad_norm <= stop_tol. The schedule rescales eta as iterations pass.
// Non-finite loss or gradient terminates with Termination::Diverged and the
// trajectory truncated at the last finite iterate.
Trajectory run_deterministic(const Objective& obj, const StepRule& rule, const Schedule& sched,
                             const Vector& w0, long max_steps, double stop_tol = 1e-12);

// w_{t+1} = w_t - h(|g_t|) * g_t with g_t = grad L(w_t) + xi drawn from the
// oracle. Only the delta-gclip rule is accepted (the analyzed case). The
// oracle is taken by value so a rerun with the same configuration reproduces
// the trajectory byte for byte.
Trajectory run_stochastic(const Objective& obj, const StepRule& rule, NoiseOracle oracle,
                          const Vector& w0, long max_steps);

}  // namespace deltaclip
