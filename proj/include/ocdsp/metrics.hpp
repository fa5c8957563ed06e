#ifndef OCDSP_METRICS_HPP
#define OCDSP_METRICS_HPP

#include <cmath>
#include <span>

#include "ocdsp/types.hpp"

namespace ocdsp {

struct BerReport {
  std::uint64_t bit_errors = 0;
  std::uint64_t bits_total = 0;
  double ber = 0.0;
  double ci95_halfwidth = 0.0;  // 1.96 sqrt(ber (1 - ber) / bits_total)
};

BerReport make_ber_report(std::uint64_t errors, std::uint64_t total);

BerReport count_ber(std::span<const std::uint8_t> tx_bits, std::span<const std::uint8_t> rx_bits);

/// Reported instead of -inf when the measured signal matches the reference.
inline constexpr double kEvmFloorDb = -200.0;

/// 10 log10( sum |meas - ref|^2 / sum |ref|^2 ).
template <typename DerivedA, typename DerivedB>
double evm_db(const Eigen::MatrixBase<DerivedA>& reference, const Eigen::MatrixBase<DerivedB>& measured) {
  if (reference.size() != measured.size()) throw ShapeError("evm_db: length mismatch");
  const double ref_power = static_cast<double>(reference.squaredNorm());
  if (!(ref_power > 0)) throw DomainError("evm_db: reference has zero power");
  const double err_power = static_cast<double>((measured - reference).squaredNorm());
  if (err_power == 0.0) return kEvmFloorDb;
  return std::max(kEvmFloorDb, 10.0 * std::log10(err_power / ref_power));
}

}  // namespace ocdsp

#endif  // OCDSP_METRICS_HPP
