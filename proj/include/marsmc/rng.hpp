#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace marsmc {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by (seed, purpose, a, b, c); draws within a stream
/// advance a block counter. Streams are independent of scheduling order, which
/// is what makes particle-parallel code reproducible at any worker count.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint32_t purpose, std::uint32_t a = 0, std::uint32_t b = 0,
             std::uint32_t c = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 bits.
  double uniform();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int next_ = 4;
};

/// Stream purposes; keeps draws for different jobs disjoint.
enum class Stream : std::uint32_t {
  PriorInit = 1,
  Resample = 2,
  Mutation = 3,
  Noise = 4,
  Generic = 5,
};

inline CounterRng make_stream(std::uint64_t seed, Stream purpose, std::uint32_t a = 0,
                              std::uint32_t b = 0, std::uint32_t c = 0) {
  return CounterRng(seed, static_cast<std::uint32_t>(purpose), a, b, c);
}

/// One Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; derives child seeds (per candidate, per replication).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace marsmc
