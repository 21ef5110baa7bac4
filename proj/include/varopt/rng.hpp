#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace varopt {

/// Seedable generator with a portable output stream.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The standard distributions are implementation-defined, so the transforms
/// below are written out by hand; their randomness consumption is part of the
/// reproducibility contract:
///   uniform()  one engine draw, top 53 bits
///   normal()   two uniform() draws, Box-Muller cosine branch
///   below(n)   one or more engine draws (rejection on the biased tail)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal.
  double normal();

  /// Uniform integer on [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates, drawing below(i + 1) for i = size-1 down to 1.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Labeled substream seed: all randomness in a command fans out from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index);

}  // namespace varopt
