#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pblab {

// Seeded generator state. Identical (seed, stream) pairs replay identical draws;
// distinct streams are decorrelated through seed_seq mixing.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  double uniform();  // in [0, 1)
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

enum class StreamKind : std::uint64_t { demand = 1, patience = 2, learner = 3, drift = 4 };

// Stream id for a given replication and purpose.
std::uint64_t stream_id(std::uint64_t replication, StreamKind kind);

// 64-bit FNV-1a, used for config hashes and per-cell seed derivation.
std::uint64_t fnv1a(const void* data, std::size_t len);
std::uint64_t fnv1a(std::string_view text);

}  // namespace pblab
