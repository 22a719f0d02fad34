#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pdapa {

// splitmix64 step; used to derive well-separated seeds from (seed, tag...) keys
// so every node/run/purpose gets an independent stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream tags keep the derivation readable at call sites.
enum class StreamTag : std::uint64_t {
  regressor = 1,
  noise = 2,
  mask = 3,
  coordinated_mask = 4,
  optimum = 5,
  signal_profile = 6,
  moment_estimator = 7,
  selftest = 8,
};

inline std::mt19937_64 make_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> tags) {
  std::uint64_t state = seed ^ 0xd1b54a32d192ed03ULL;
  std::uint64_t mixed = splitmix64(state);
  for (std::uint64_t t : tags) {
    state ^= t * 0x2545f4914f6cdd1dULL;
    mixed ^= splitmix64(state);
  }
  return std::mt19937_64(mixed);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamTag purpose,
                                   std::uint64_t a = 0, std::uint64_t b = 0) {
  return make_stream(seed, {static_cast<std::uint64_t>(purpose), a, b});
}

}  // namespace pdapa
