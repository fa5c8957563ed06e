#include "ocdsp/modulation.hpp"

#include <cmath>

#include "ocdsp/random.hpp"

namespace ocdsp {

namespace {

// exp(j 2 pi k / m) built from the first quadrant so that points on the axes
// are exact (cos(pi/2) would otherwise leave a 6e-17 residue).
Complex<double> unit_point(int k, int m) {
  const int quarter_steps = 4 * k;
  if (quarter_steps % m == 0) {
    switch ((quarter_steps / m) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  const double angle = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

PskModulation::PskModulation(int order) : order_(order), bits_(0) {
  if (order < 2 || (order & (order - 1)) != 0)
    throw ConfigError("modulation", "order", "must be a power of two >= 2");
  while ((1 << bits_) < order) ++bits_;
  points_.reserve(static_cast<std::size_t>(order));
  inverse_gray_.resize(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) {
    points_.push_back(unit_point(k, order));
    inverse_gray_[gray_word(static_cast<unsigned>(k))] = static_cast<unsigned>(k);
  }
}

unsigned PskModulation::index_of_word(unsigned word) const {
  return inverse_gray_.at(word);
}

unsigned PskModulation::read_word(std::span<const std::uint8_t> bits, std::size_t offset) const {
  unsigned word = 0;
  for (int i = 0; i < bits_; ++i) word = (word << 1) | (bits[offset + static_cast<std::size_t>(i)] & 1u);
  return word;
}

void PskModulation::write_word(unsigned word, Bits& out) const {
  for (int i = bits_ - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((word >> i) & 1u));
}

int PskModulation::sector_of_phase(double phase) const {
  const double step = 2.0 * kPi / order_;
  auto k = static_cast<long long>(std::floor(phase / step + 0.5));
  k %= order_;
  if (k < 0) k += order_;
  return static_cast<int>(k);
}

Bits random_bits(std::size_t n, Rng& rng) {
  Bits bits(n);
  std::size_t i = 0;
  while (i < n) {
    std::uint64_t word = rng.next_u64();
    for (int b = 0; b < 64 && i < n; ++b, ++i) bits[i] = static_cast<std::uint8_t>((word >> b) & 1u);
  }
  return bits;
}

}  // namespace ocdsp
