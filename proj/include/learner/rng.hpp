#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace learner {

/// PCG32 (XSH-RR output over a 64-bit LCG), O'Neill 2014.
///
/// Satisfies UniformRandomBitGenerator so it plugs into <random>
/// distributions. Every draw in the simulation harness comes from a child
/// stream addressed by (seed, rep, role); see child().
class Pcg32 {
 public:
  using result_type = std::uint32_t;

  static constexpr std::string_view name = "pcg32-xsh-rr-64/32 (splitmix64 child streams)";

  Pcg32(std::uint64_t seed, std::uint64_t stream) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, std::uint64_t stream) {
    state_ = 0u;
    inc_ = (stream << 1u) | 1u;
    (*this)();
    state_ += seed;
    (*this)();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  /// Unbiased integer in [0, bound) (Lemire's rejection on the 32-bit product).
  std::uint32_t bounded(std::uint32_t bound) {
    std::uint64_t m = static_cast<std::uint64_t>((*this)()) * bound;
    auto low = static_cast<std::uint32_t>(m);
    if (low < bound) {
      const std::uint32_t threshold = (0u - bound) % bound;
      while (low < threshold) {
        m = static_cast<std::uint64_t>((*this)()) * bound;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32u);
  }

  static constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30u)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27u)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31u);
  }

  /// Independent stream for (seed, rep, role): the state seed mixes all three
  /// through splitmix64 and the LCG increment is selected by the role.
  static Pcg32 child(std::uint64_t seed, std::uint64_t rep, std::uint64_t role) {
    const std::uint64_t mixed = splitmix64(splitmix64(splitmix64(seed) ^ rep) ^ (role * 0x9e3779b97f4a7c15ULL));
    return Pcg32(mixed, splitmix64(role + 0x632be59bd9b4e019ULL));
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

/// Stream roles used by the simulation harness and fold assignment.
enum class StreamRole : std::uint64_t {
  TargetSignal = 1,
  SourceSignal = 2,
  TargetNoise = 3,
  SourceNoise = 4,
  Folds = 5,
  ExternalNoise = 6,
};

inline Pcg32 child_stream(std::uint64_t seed, std::uint64_t rep, StreamRole role) {
  return Pcg32::child(seed, rep, static_cast<std::uint64_t>(role));
}

}  // namespace learner
