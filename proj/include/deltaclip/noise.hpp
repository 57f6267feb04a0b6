#pragma once

#include "deltaclip/rng.hpp"
#include "deltaclip/tensor.hpp"

namespace deltaclip {

// Bounded unbiased gradient corruption: sample() returns a perturbation xi
// with |xi| = u * theta for u uniform on [0, 1] and direction uniform on the
// sphere. The distribution is symmetric about 0, so E[xi] = 0 and the emitted
// gradient g = grad + xi satisfies |g - grad| <= theta always.
struct NoiseOracle {
  double theta = 0.0;
  RngStream rng;

  // Throws std::invalid_argument unless theta >= 0 and finite.
  NoiseOracle(double theta, RngStream rng);

  // theta = 0 returns the zero vector without consuming the stream.
  Vector sample(int dim);
};

Vector sample_noise(NoiseOracle& oracle, int dim);

}  // namespace deltaclip
