#include "deltaclip/rng.hpp"

#include <cmath>
#include <numbers>

namespace deltaclip {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  // Expand (seed, stream_id) into four non-degenerate state words.
  std::uint64_t s = mix64(seed ^ mix64(stream_id));
  for (auto& w : state_) {
    s += 0x9E3779B97F4A7C15ULL;
    w = mix64(s);
  }
  // All-zero state is the one forbidden xoshiro state.
  if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
    state_[0] = 0x9E3779B97F4A7C15ULL;
  }
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller on (0,1] x [0,1) uniforms; log(0) is excluded by the 1-u flip.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

RngStream RngStream::split(std::uint64_t child_id) const {
  return RngStream(seed_, mix64(stream_id_ ^ mix64(child_id ^ 0xA076'1D64'78BD'642FULL)));
}

}  // namespace deltaclip
