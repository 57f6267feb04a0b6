#pragma once

#include <array>
#include <cstdint>

namespace deltaclip {

// splitmix64 finalizer; used for seeding and for hashing parameter tuples
// into stream ids.
std::uint64_t mix64(std::uint64_t x);

// Deterministic random stream: xoshiro256++ seeded through splitmix64 from a
// (seed, stream_id) pair. Identical pairs produce identical sample sequences
// on every platform; independent tasks derive their own stream with split().
// A stream is cheap to copy but must not be shared across concurrent tasks.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t next_u64();
  double uniform();  // [0, 1), 53-bit resolution
  double normal();   // standard normal via Box-Muller

  // Child stream keyed by (seed, stream_id, child_id); never overlaps the
  // parent sequence in practice and is independent of parent consumption.
  RngStream split(std::uint64_t child_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace deltaclip
