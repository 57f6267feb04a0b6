#pragma once

#include <vector>

#include "deltaclip/rng.hpp"
#include "deltaclip/run.hpp"
#include "deltaclip/tensor.hpp"

namespace deltaclip {

// Single-filter multi-gate recovery problem for the Tron-style update.
// The predictor class is f_w(x) = (1/k) sum_i max(0, <w, A_i x>) with gate
// matrices A_1..A_k; labels come from f at a hidden true filter, corrupted
// with probability flip_prob by an adversarial offset of fixed magnitude
// noise_mag and random sign.
struct NeurotronProblem {
  Matrix sensing;               // M, r x n
  std::vector<Matrix> gates;    // A_1..A_k, each r x n
  Vector true_filter;           // w*, length r
  double flip_prob = 0.0;       // in [0, 1)
  double noise_mag = 0.0;       // magnitude of the label offset

  void validate() const;  // shape consistency; throws std::invalid_argument

  // Convenience: k = 1, A_1 = M = I_r, inputs of the same dimension.
  static NeurotronProblem identity_realizable(int r, Vector true_filter,
                                              double flip_prob = 0.0, double noise_mag = 0.0);
};

double neurotron_predict(const NeurotronProblem& p, const Vector& w, const Vector& x);

// Mini-batched Tron iteration: per batch of b standard-normal inputs, query
// the corrupted label oracle, form
//   g = M * ( (1/b) sum_i (v_i - f_w(x_i)) x_i )
// and apply the additive update w <- w + eta * g. The trajectory's loss
// column records |w_t - w*|; grad_norm records |g|.
Trajectory neurotron_run(const NeurotronProblem& p, const Vector& w1, long max_steps, int batch,
                         double eta, RngStream rng);

}  // namespace deltaclip
