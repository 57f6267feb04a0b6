#include "deltaclip/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace deltaclip {

NoiseOracle::NoiseOracle(double theta_in, RngStream rng_in)
    : theta(theta_in), rng(rng_in) {
  if (!std::isfinite(theta) || theta < 0.0) {
    throw std::invalid_argument("NoiseOracle: theta must be finite and >= 0");
  }
}

Vector NoiseOracle::sample(int dim) {
  if (dim < 1) throw std::invalid_argument("NoiseOracle::sample: dim must be positive");
  if (theta == 0.0) return Vector(dim, 0.0);
  Vector xi(dim);
  double norm = 0.0;
  do {
    for (auto& x : xi) x = rng.normal();
    norm = l2_norm(xi);
  } while (norm == 0.0);
  const double radius = rng.uniform() * theta;
  const double scale = radius / norm;
  for (auto& x : xi) x *= scale;
  // |xi| <= theta is a hard contract; rounding can breach it only when the
  // drawn radius sits within a few ulp of theta, so nudge back down.
  for (int guard = 0; guard < 4 && l2_norm(xi) > theta; ++guard) {
    const double fix = std::nextafter(theta / l2_norm(xi), 0.0);
    for (auto& x : xi) x *= fix;
  }
  return xi;
}

Vector sample_noise(NoiseOracle& oracle, int dim) {
  return oracle.sample(dim);
}

}  // namespace deltaclip
