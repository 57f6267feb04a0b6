#include "deltaclip/run.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deltaclip {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::MaxIterations: return "max-iterations";
    case Termination::GradTolerance: return "grad-tolerance";
    case Termination::Diverged: return "diverged";
  }
  return "?";
}

double Trajectory::min_loss() const {
  double m = records.front().loss;
  for (const auto& r : records) m = std::min(m, r.loss);
  return m;
}

double Trajectory::min_grad_norm() const {
  double m = records.front().grad_norm;
  for (const auto& r : records) m = std::min(m, r.grad_norm);
  return m;
}

namespace {

void check_run_args(const Objective& obj, const Vector& w0, long max_steps) {
  if (max_steps < 0) throw std::invalid_argument("run: max_steps must be >= 0");
  if (static_cast<int>(w0.size()) != obj.dim()) {
    throw std::invalid_argument("run: w0 has wrong dimension");
  }
  if (!all_finite(w0)) throw std::invalid_argument("run: w0 must be finite");
}

}  // namespace

Trajectory run_deterministic(const Objective& obj, const StepRule& rule, const Schedule& sched,
                             const Vector& w0, long max_steps, double stop_tol) {
  check_run_args(obj, w0, max_steps);

  Trajectory traj;
  traj.records.reserve(static_cast<std::size_t>(std::min(max_steps, 1L << 20)) + 1);
  Vector w = w0;
  Vector last_finite = w0;

  for (long t = 0; t <= max_steps; ++t) {
    if (!all_finite(w)) {
      traj.reason = Termination::Diverged;
      traj.final_weights = last_finite;
      return traj;
    }
    const double loss = obj.value(w);
    const Vector grad = obj.gradient(w);
    if (!std::isfinite(loss) || !all_finite(grad)) {
      traj.reason = Termination::Diverged;
      traj.final_weights = last_finite;
      return traj;
    }
    last_finite = w;

    const double grad_norm = l2_norm(grad);
    const double eta_t = sched.eta_at(t, rule.eta);
    const double h = rule.with_eta(eta_t).step_size(grad_norm);
    traj.records.push_back({t, loss, grad_norm, h, dist(w, w0)});

    if (grad_norm <= stop_tol) {
      traj.reason = Termination::GradTolerance;
      traj.final_weights = w;
      return traj;
    }
    if (t == max_steps) break;
    axpy(-h, grad, w);
  }
  traj.reason = Termination::MaxIterations;
  traj.final_weights = w;
  return traj;
}

Trajectory run_stochastic(const Objective& obj, const StepRule& rule, NoiseOracle oracle,
                          const Vector& w0, long max_steps) {
  if (rule.kind != StepRule::Kind::DeltaGClip) {
    throw std::invalid_argument("run_stochastic: rule must be delta-gclip");
  }
  check_run_args(obj, w0, max_steps);

  Trajectory traj;
  traj.records.reserve(static_cast<std::size_t>(std::min(max_steps, 1L << 20)) + 1);
  Vector w = w0;
  Vector last_finite = w0;

  for (long t = 0; t <= max_steps; ++t) {
    if (!all_finite(w)) {
      traj.reason = Termination::Diverged;
      traj.final_weights = last_finite;
      return traj;
    }
    const double loss = obj.value(w);
    Vector g = obj.gradient(w);
    if (!std::isfinite(loss) || !all_finite(g)) {
      traj.reason = Termination::Diverged;
      traj.final_weights = last_finite;
      return traj;
    }
    last_finite = w;
    const double true_grad_norm = l2_norm(g);

    // The optimizer only ever sees the corrupted gradient; the record keeps
    // the true loss and true gradient norm next to the noisy step size.
    // theta = 0 leaves g untouched so the run matches run_deterministic
    // iterate for iterate.
    if (oracle.theta != 0.0) axpy(1.0, oracle.sample(obj.dim()), g);
    const double h = rule.step_size(l2_norm(g));
    traj.records.push_back({t, loss, true_grad_norm, h, dist(w, w0)});

    if (t == max_steps) break;
    axpy(-h, g, w);
  }
  traj.reason = Termination::MaxIterations;
  traj.final_weights = w;
  return traj;
}

}  // namespace deltaclip
