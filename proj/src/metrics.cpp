#include "ocdsp/metrics.hpp"

namespace ocdsp {

BerReport make_ber_report(std::uint64_t errors, std::uint64_t total) {
  BerReport r;
  r.bit_errors = errors;
  r.bits_total = total;
  if (total > 0) {
    r.ber = static_cast<double>(errors) / static_cast<double>(total);
    r.ci95_halfwidth = 1.96 * std::sqrt(r.ber * (1.0 - r.ber) / static_cast<double>(total));
  }
  return r;
}

BerReport count_ber(std::span<const std::uint8_t> tx_bits, std::span<const std::uint8_t> rx_bits) {
  if (tx_bits.size() != rx_bits.size()) throw ShapeError("count_ber: length mismatch");
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < tx_bits.size(); ++i) errors += ((tx_bits[i] ^ rx_bits[i]) & 1u);
  return make_ber_report(errors, tx_bits.size());
}

}  // namespace ocdsp
