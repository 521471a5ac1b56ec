#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace erase {

using Seed = std::uint64_t;

// Substream labels used across the pipeline. A child seed is a pure function
// of (parent seed, label), so every random choice can be replayed.
namespace labels {
inline constexpr std::string_view kPhase = "phase";
inline constexpr std::string_view kSeeds = "seeds";
inline constexpr std::string_view kStream = "stream";
inline constexpr std::string_view kUnlearn = "unlearn";
}  // namespace labels

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

Seed derive_seed(Seed parent, std::string_view label) noexcept;
// "retrain:<index>"
Seed retrain_seed(Seed parent, std::uint64_t index);

// Thin wrapper over mt19937_64. The standard distributions are
// implementation-defined, so bounded integers and uniform reals are derived
// here directly from the engine output to keep results identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, bound). bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double normal();

 private:
  std::mt19937_64 engine_;
};

// First k entries of a seeded Fisher-Yates shuffle of `items`.
template <typename T>
std::vector<T> fisher_yates_prefix(std::span<const T> items, std::size_t k, Rng& rng) {
  std::vector<T> pool(items.begin(), items.end());
  for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
    const std::size_t j = i + rng.uniform_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min(k, pool.size()));
  return pool;
}

}  // namespace erase
