#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace sonify {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Independent stream seeds for batch work. The derived seed depends only on
/// (master, key), so results do not depend on which thread runs which item.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t ordinal) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::string_view key) noexcept;

/// Seeded generator with platform-independent draws. std::mt19937_64 has a
/// standardized output sequence; the standard distributions do not, so the
/// bounded and real-valued draws are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform integer on [0, bound). bound must be > 0.
  std::size_t below(std::size_t bound);

  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace sonify
