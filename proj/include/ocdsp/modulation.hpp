#ifndef OCDSP_MODULATION_HPP
#define OCDSP_MODULATION_HPP

#include <span>
#include <vector>

#include "ocdsp/types.hpp"

namespace ocdsp {

/// m-PSK alphabet with points exp(j 2 pi k / m) and binary-reflected Gray
/// labels: constellation index k carries the word k ^ (k >> 1), so cyclically
/// adjacent points differ in exactly one bit.
class PskModulation {
 public:
  explicit PskModulation(int order);

  int order() const noexcept { return order_; }
  int bits_per_symbol() const noexcept { return bits_; }

  const Complex<double>& point(int index) const { return points_[static_cast<std::size_t>(index)]; }
  const std::vector<Complex<double>>& points() const noexcept { return points_; }

  static constexpr unsigned gray_word(unsigned index) noexcept { return index ^ (index >> 1); }
  unsigned index_of_word(unsigned word) const;

  /// MSB-first word starting at bits[offset].
  unsigned read_word(std::span<const std::uint8_t> bits, std::size_t offset) const;
  void write_word(unsigned word, Bits& out) const;

  /// Nearest constellation index; ties go to the lowest index.
  template <typename Scalar>
  int nearest_index(const Complex<Scalar>& z) const {
    int best = 0;
    double best_d = std::norm(Complex<double>(z) - points_[0]);
    for (int k = 1; k < order_; ++k) {
      const double d = std::norm(Complex<double>(z) - points_[static_cast<std::size_t>(k)]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  }

  /// Index of exp(j 2 pi k / m) closest to a phase increment, rounding to the
  /// nearest sector.
  int sector_of_phase(double phase) const;

 private:
  int order_;
  int bits_;
  std::vector<Complex<double>> points_;
  std::vector<unsigned> inverse_gray_;
};

template <typename Scalar>
struct Decisions {
  CVector<Scalar> points;
  std::vector<int> indices;
  Bits bits;
};

template <typename Scalar = double>
CVector<Scalar> modulate(std::span<const std::uint8_t> bits, const PskModulation& mod) {
  const auto b = static_cast<std::size_t>(mod.bits_per_symbol());
  if (bits.size() % b != 0)
    throw ShapeError("modulate: bit count is not a multiple of log2(m)");
  const Index n = static_cast<Index>(bits.size() / b);
  CVector<Scalar> out(n);
  for (Index i = 0; i < n; ++i) {
    const unsigned word = mod.read_word(bits, static_cast<std::size_t>(i) * b);
    out(i) = Complex<Scalar>(mod.point(static_cast<int>(mod.index_of_word(word))));
  }
  return out;
}

template <typename Derived>
auto hard_decision(const Eigen::MatrixBase<Derived>& symbols, const PskModulation& mod) {
  using Scalar = typename Derived::Scalar::value_type;
  Decisions<Scalar> d;
  d.points.resize(symbols.size());
  d.indices.resize(static_cast<std::size_t>(symbols.size()));
  d.bits.reserve(static_cast<std::size_t>(symbols.size() * mod.bits_per_symbol()));
  for (Index i = 0; i < symbols.size(); ++i) {
    const int k = mod.nearest_index(symbols(i));
    d.indices[static_cast<std::size_t>(i)] = k;
    d.points(i) = Complex<Scalar>(mod.point(k));
    mod.write_word(PskModulation::gray_word(static_cast<unsigned>(k)), d.bits);
  }
  return d;
}

/// Differential m-PSK: symbol 0 is the reference exp(j0); each word advances
/// the constellation index by its Gray-decoded value. Output has one symbol
/// more than there are words.
template <typename Scalar = double>
CVector<Scalar> differential_encode(std::span<const std::uint8_t> bits, const PskModulation& mod) {
  const auto b = static_cast<std::size_t>(mod.bits_per_symbol());
  if (bits.size() % b != 0)
    throw ShapeError("differential_encode: bit count is not a multiple of log2(m)");
  const Index words = static_cast<Index>(bits.size() / b);
  CVector<Scalar> out(words + 1);
  unsigned index = 0;
  out(0) = Complex<Scalar>(mod.point(0));
  for (Index i = 0; i < words; ++i) {
    const unsigned word = mod.read_word(bits, static_cast<std::size_t>(i) * b);
    index = (index + mod.index_of_word(word)) % static_cast<unsigned>(mod.order());
    out(i + 1) = Complex<Scalar>(mod.point(static_cast<int>(index)));
  }
  return out;
}

/// Random bit source helper shared by simulators and tests.
class Rng;
Bits random_bits(std::size_t n, Rng& rng);

}  // namespace ocdsp

#endif  // OCDSP_MODULATION_HPP
