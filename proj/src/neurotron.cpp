#include "deltaclip/neurotron.hpp"

#include <cmath>
#include <stdexcept>

namespace deltaclip {

void NeurotronProblem::validate() const {
  if (gates.empty()) throw std::invalid_argument("NeurotronProblem: need at least one gate");
  const int r = sensing.rows;
  const int n = sensing.cols;
  if (static_cast<int>(true_filter.size()) != r) {
    throw std::invalid_argument("NeurotronProblem: true filter length must match sensing rows");
  }
  for (const auto& a : gates) {
    if (a.rows != r || a.cols != n) {
      throw std::invalid_argument("NeurotronProblem: gate shape must match sensing matrix");
    }
  }
  if (!(flip_prob >= 0.0 && flip_prob < 1.0)) {
    throw std::invalid_argument("NeurotronProblem: flip_prob must lie in [0, 1)");
  }
  if (!(noise_mag >= 0.0) || !std::isfinite(noise_mag)) {
    throw std::invalid_argument("NeurotronProblem: noise_mag must be finite and >= 0");
  }
}

NeurotronProblem NeurotronProblem::identity_realizable(int r, Vector true_filter,
                                                       double flip_prob, double noise_mag) {
  NeurotronProblem p;
  p.sensing = Matrix::identity(r);
  p.gates = {Matrix::identity(r)};
  p.true_filter = std::move(true_filter);
  p.flip_prob = flip_prob;
  p.noise_mag = noise_mag;
  p.validate();
  return p;
}

double neurotron_predict(const NeurotronProblem& p, const Vector& w, const Vector& x) {
  double s = 0.0;
  for (const auto& a : p.gates) {
    const double z = dot(w, matvec(a, x));
    if (z > 0.0) s += z;
  }
  return s / static_cast<double>(p.gates.size());
}

Trajectory neurotron_run(const NeurotronProblem& p, const Vector& w1, long max_steps, int batch,
                         double eta, RngStream rng) {
  p.validate();
  if (batch < 1) throw std::invalid_argument("neurotron_run: batch must be >= 1");
  if (max_steps < 0) throw std::invalid_argument("neurotron_run: max_steps must be >= 0");
  if (static_cast<int>(w1.size()) != p.sensing.rows) {
    throw std::invalid_argument("neurotron_run: w1 has wrong dimension");
  }

  const int n = p.sensing.cols;
  Trajectory traj;
  Vector w = w1;
  Vector last_finite = w1;
  Vector batch_mean(n);
  Vector x(n);

  for (long t = 0; t <= max_steps; ++t) {
    if (!all_finite(w)) {
      traj.reason = Termination::Diverged;
      traj.final_weights = last_finite;
      return traj;
    }
    last_finite = w;

    std::fill(batch_mean.begin(), batch_mean.end(), 0.0);
    for (int i = 0; i < batch; ++i) {
      for (auto& xv : x) xv = rng.normal();
      // The label oracle flips with probability flip_prob and then offsets
      // by a sign-random fixed magnitude. Both uniforms are always drawn so
      // stream consumption does not depend on the outcome.
      const bool flip = rng.uniform() < p.flip_prob;
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      double v = neurotron_predict(p, p.true_filter, x);
      if (flip) v += sign * p.noise_mag;
      const double residual = v - neurotron_predict(p, w, x);
      axpy(residual / static_cast<double>(batch), x, batch_mean);
    }
    const Vector g = matvec(p.sensing, batch_mean);
    if (!all_finite(g)) {
      traj.reason = Termination::Diverged;
      traj.final_weights = last_finite;
      return traj;
    }

    traj.records.push_back({t, dist(w, p.true_filter), l2_norm(g), eta, dist(w, w1)});
    if (t == max_steps) break;
    axpy(eta, g, w);  // ascent sign, per the update rule
  }
  traj.reason = Termination::MaxIterations;
  traj.final_weights = w;
  return traj;
}

}  // namespace deltaclip
