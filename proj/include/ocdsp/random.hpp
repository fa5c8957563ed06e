#ifndef OCDSP_RANDOM_HPP
#define OCDSP_RANDOM_HPP

#include <cstdint>
#include <random>

namespace ocdsp {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed: stream_seed(master, i) = splitmix64(master + (i + 1) * 0x9e3779b97f4a7c15).
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master + (stream + 1) * 0x9e3779b97f4a7c15ULL);
}

/// Reproducible random source: std::mt19937_64 (bit sequence fixed by the
/// C++ standard), uniforms from the top 53 bits, Gaussians by Box-Muller.
/// Does not depend on the platform's <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal.
  double normal();

  double normal(double stddev) { return stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ocdsp

#endif  // OCDSP_RANDOM_HPP
