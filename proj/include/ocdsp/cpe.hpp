#ifndef OCDSP_CPE_HPP
#define OCDSP_CPE_HPP

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "ocdsp/modulation.hpp"
#include "ocdsp/types.hpp"

namespace ocdsp {

enum class CpeMethod { Nlms, Differential, Bwa, Vv };

const char* to_string(CpeMethod m);
CpeMethod cpe_method_from_string(const std::string& name);

struct CpeConfig {
  CpeMethod method = CpeMethod::Vv;
  int order = 4;
  double mu_nlms = 1.0;
  int block_size = 11;      // N_b
  int window = 11;          // N_v, odd
  int training_length = 32; // symbols used to anchor the phase reference

  void validate() const {
    if (order < 2 || (order & (order - 1)) != 0) throw ConfigError("cpe", "order", "must be a power of two >= 2");
    if (method == CpeMethod::Nlms && !(mu_nlms > 0)) throw ConfigError("cpe", "mu_nlms", "must be positive");
    if (method == CpeMethod::Bwa && block_size < 1) throw ConfigError("cpe", "block_size", "must be >= 1");
    if (method == CpeMethod::Vv && (window < 1 || window % 2 == 0))
      throw ConfigError("cpe", "window", "must be odd and >= 1");
    if (training_length < 0) throw ConfigError("cpe", "training_symbols", "must be >= 0");
  }
};

template <typename Scalar>
struct CpeResult {
  CVector<Scalar> corrected;
  RVectorXd phase;           // estimated carrier phase per symbol (rad)
  RVectorXd block_phase;     // per-block estimates (BWA only)
  CpeMethod method = CpeMethod::Vv;
  Index skipped_updates = 0; // NLMS updates skipped on zero-magnitude input
};

/// Removes 2 pi / m ambiguities: each entry moves by the multiple of 2 pi / m
/// closest to the previous output entry. The first entry is placed closest to
/// `anchor`.
inline RVectorXd unwrap_phase(const RVectorXd& trace, int order, double anchor = 0.0) {
  RVectorXd out(trace.size());
  if (trace.size() == 0) return out;
  const double step = 2.0 * kPi / order;
  out(0) = trace(0) + step * std::round((anchor - trace(0)) / step);
  for (Index i = 1; i < trace.size(); ++i)
    out(i) = trace(i) + step * std::round((out(i - 1) - trace(i)) / step);
  return out;
}

/// Data-aided phase reference arg(sum x_n conj(t_n)) over the known prefix;
/// 0 when there is no training.
template <typename Scalar>
double training_anchor(const CVector<Scalar>& symbols, std::span<const Complex<Scalar>> training) {
  const Index n = std::min<Index>(symbols.size(), static_cast<Index>(training.size()));
  Complex<double> acc(0);
  for (Index i = 0; i < n; ++i)
    acc += Complex<double>(symbols(i) * std::conj(training[static_cast<std::size_t>(i)]));
  return n > 0 ? std::arg(acc) : 0.0;
}

/// x^m by repeated multiplication.
template <typename Scalar>
Complex<Scalar> mth_power(Complex<Scalar> x, int m) {
  Complex<Scalar> r(1);
  for (int i = 0; i < m; ++i) r *= x;
  return r;
}

/// One-tap normalized LMS:
///   out(n) = w(n) x(n),  e(n) = d(n) - w(n) x(n),
///   w(n+1) = w(n) + mu / |x(n)|^2 * conj(x(n)) e(n).
/// d(n) is the training symbol during the prefix and the hard decision of
/// out(n) afterwards. Zero-magnitude inputs skip the update.
template <typename Scalar>
CpeResult<Scalar> nlms_cpe(const CVector<Scalar>& symbols, const PskModulation& mod, double mu,
                           std::span<const Complex<Scalar>> training = {}) {
  if (!(mu > 0)) throw ConfigError("cpe", "mu_nlms", "must be positive");
  CpeResult<Scalar> r;
  r.method = CpeMethod::Nlms;
  r.corrected.resize(symbols.size());
  r.phase.resize(symbols.size());
  Complex<Scalar> w(1);
  double prev_phase = 0.0;
  for (Index n = 0; n < symbols.size(); ++n) {
    const Complex<Scalar> x = symbols(n);
    const Complex<Scalar> out = w * x;
    r.corrected(n) = out;
    // Continuous (2 pi unwrapped) phase of the carrier estimate -arg w.
    double ph = -static_cast<double>(std::arg(w));
    ph += 2.0 * kPi * std::round((prev_phase - ph) / (2.0 * kPi));
    r.phase(n) = prev_phase = ph;

    const Complex<Scalar> d = n < static_cast<Index>(training.size())
                                  ? training[static_cast<std::size_t>(n)]
                                  : Complex<Scalar>(mod.point(mod.nearest_index(out)));
    const Scalar p = std::norm(x);
    if (!(p > 0)) {
      ++r.skipped_updates;
      continue;
    }
    const Complex<Scalar> e = d - out;
    w += static_cast<Scalar>(mu) / p * std::conj(x) * e;
  }
  return r;
}

/// Delay-and-multiply detection: the word for symbol pair (n, n+1) is the
/// Gray label of the sector of arg(x_{n+1} conj(x_n)), sectors centered on
/// multiples of 2 pi / m.
template <typename Scalar>
Bits differential_demod(const CVector<Scalar>& symbols, const PskModulation& mod) {
  if (symbols.size() < 2) throw ShapeError("differential_demod: needs at least 2 symbols");
  Bits bits;
  bits.reserve(static_cast<std::size_t>((symbols.size() - 1) * mod.bits_per_symbol()));
  for (Index n = 0; n + 1 < symbols.size(); ++n) {
    const double dphi = static_cast<double>(std::arg(symbols(n + 1) * std::conj(symbols(n))));
    mod.write_word(PskModulation::gray_word(static_cast<unsigned>(mod.sector_of_phase(dphi))), bits);
  }
  return bits;
}

/// Block-wise average: symbols are split into consecutive blocks of N_b
/// (the last one may be short); each block's estimate
/// (1/m) arg(sum over the block of x^m) is unwrapped across blocks and applied
/// to every symbol of that block.
template <typename Scalar>
CpeResult<Scalar> bwa_cpe(const CVector<Scalar>& symbols, const PskModulation& mod, int block_size,
                          std::span<const Complex<Scalar>> training = {}) {
  if (block_size < 1) throw ConfigError("cpe", "block_size", "must be >= 1");
  const int m = mod.order();
  const Index n = symbols.size();
  const Index blocks = (n + block_size - 1) / block_size;
  RVectorXd raw(blocks);
  for (Index b = 0; b < blocks; ++b) {
    Complex<Scalar> acc(0);
    const Index lo = b * block_size, hi = std::min<Index>(n, lo + block_size);
    for (Index k = lo; k < hi; ++k) acc += mth_power(symbols(k), m);
    raw(b) = static_cast<double>(std::arg(acc)) / m;
  }
  CpeResult<Scalar> r;
  r.method = CpeMethod::Bwa;
  r.block_phase = unwrap_phase(raw, m, training_anchor(symbols, training));
  r.phase.resize(n);
  r.corrected.resize(n);
  for (Index k = 0; k < n; ++k) {
    r.phase(k) = r.block_phase(k / block_size);
    r.corrected(k) = symbols(k) * std::polar(Scalar(1), static_cast<Scalar>(-r.phase(k)));
  }
  return r;
}

/// Sliding-window (Viterbi-Viterbi) estimate for the central symbol:
/// (1/m) arg(sum_{|k| <= (N_v-1)/2} x^m(n+k)). Near the record edges the
/// window shrinks symmetrically to the largest odd length that fits.
template <typename Scalar>
CpeResult<Scalar> vv_cpe(const CVector<Scalar>& symbols, const PskModulation& mod, int window,
                         std::span<const Complex<Scalar>> training = {}) {
  if (window < 1 || window % 2 == 0) throw ConfigError("cpe", "window", "must be odd and >= 1");
  const int m = mod.order();
  const Index n = symbols.size();
  const Index half = window / 2;
  CVector<Scalar> powered(n);
  for (Index k = 0; k < n; ++k) powered(k) = mth_power(symbols(k), m);
  RVectorXd raw(n);
  for (Index i = 0; i < n; ++i) {
    const Index h = std::min({half, i, n - 1 - i});
    Complex<Scalar> acc(0);
    for (Index k = i - h; k <= i + h; ++k) acc += powered(k);
    raw(i) = static_cast<double>(std::arg(acc)) / m;
  }
  CpeResult<Scalar> r;
  r.method = CpeMethod::Vv;
  r.phase = unwrap_phase(raw, m, training_anchor(symbols, training));
  r.corrected.resize(n);
  for (Index k = 0; k < n; ++k) r.corrected(k) = symbols(k) * std::polar(Scalar(1), static_cast<Scalar>(-r.phase(k)));
  return r;
}

/// Dispatches on cfg.method. Differential returns the input unchanged with a
/// zero phase trace; its bits come from differential_demod().
template <typename Scalar>
CpeResult<Scalar> run_cpe(const CVector<Scalar>& symbols, const CpeConfig& cfg,
                          std::span<const Complex<Scalar>> training = {}) {
  cfg.validate();
  const PskModulation mod(cfg.order);
  const auto head = training.first(std::min<std::size_t>(training.size(), static_cast<std::size_t>(cfg.training_length)));
  switch (cfg.method) {
    case CpeMethod::Nlms: return nlms_cpe(symbols, mod, cfg.mu_nlms, head);
    case CpeMethod::Bwa: return bwa_cpe(symbols, mod, cfg.block_size, head);
    case CpeMethod::Vv: return vv_cpe(symbols, mod, cfg.window, head);
    case CpeMethod::Differential: break;
  }
  CpeResult<Scalar> r;
  r.method = CpeMethod::Differential;
  r.corrected = symbols;
  r.phase = RVectorXd::Zero(symbols.size());
  return r;
}

}  // namespace ocdsp

#endif  // OCDSP_CPE_HPP
