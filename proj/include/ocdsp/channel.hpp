#ifndef OCDSP_CHANNEL_HPP
#define OCDSP_CHANNEL_HPP

#include <cmath>
#include <limits>
#include <utility>

#include "ocdsp/fft.hpp"
#include "ocdsp/random.hpp"
#include "ocdsp/types.hpp"

namespace ocdsp {

/// Quadratic spectral phase coefficient beta = D lambda^2 L / (4 pi c), so that
/// fiber dispersion is exp(+j beta w^2) and its equalizer exp(-j beta w^2).
inline double dispersion_beta(const SystemParams& p) {
  return p.cd_coefficient * p.wavelength * p.wavelength * p.fiber_length / (4.0 * kPi * p.light_speed);
}

/// Fiber chromatic dispersion over the whole record in one transform
/// (circular, all-pass). The sample rate is taken from the signal.
template <typename Scalar>
CVector<Scalar> apply_cd(const CVector<Scalar>& in, Scalar sample_rate, const SystemParams& params) {
  if (!(params.fiber_length >= 0)) throw ConfigError("channel", "fiber_length", "must be >= 0");
  if (in.size() < 1) throw ShapeError("apply_cd: empty signal");
  const double beta = dispersion_beta(params);
  if (beta == 0.0) return in;
  const RVector<Scalar> w = angular_frequencies<Scalar>(in.size(), sample_rate);
  CVector<Scalar> spectrum = fft(in);
  for (Index k = 0; k < spectrum.size(); ++k)
    spectrum(k) *= std::polar(Scalar(1), static_cast<Scalar>(beta * w(k) * w(k)));
  return ifft(spectrum);
}

template <typename Scalar>
DualPolSignal<Scalar> apply_cd(const DualPolSignal<Scalar>& in, const SystemParams& params) {
  return {apply_cd(in.x, in.sample_rate, params), apply_cd(in.y, in.sample_rate, params), in.sample_rate};
}

/// First-order PMD: differential group delay `dgd` (s) between principal
/// axes rotated by `rotation` (rad) from the transmitter axes.
struct PmdState {
  double dgd = 0.0;
  double rotation = 0.0;
};

/// Frequency-domain Jones matrix diag(e^{+j w tau/2}, e^{-j w tau/2}) R(theta),
/// R(theta) = [[cos, sin], [-sin, cos]]. Unitary at every frequency.
template <typename Scalar>
DualPolSignal<Scalar> apply_pmd(const DualPolSignal<Scalar>& in, const PmdState& pmd) {
  in.validate();
  if (!(pmd.dgd >= 0)) throw ConfigError("channel", "dgd", "must be >= 0");
  if (pmd.dgd == 0.0 && pmd.rotation == 0.0) return in;
  const Scalar c = static_cast<Scalar>(std::cos(pmd.rotation));
  const Scalar s = static_cast<Scalar>(std::sin(pmd.rotation));
  if (pmd.dgd == 0.0) {
    return {(c * in.x + s * in.y).eval(), (-s * in.x + c * in.y).eval(), in.sample_rate};
  }
  const CVector<Scalar> fx = fft(in.x);
  const CVector<Scalar> fy = fft(in.y);
  const RVector<Scalar> w = angular_frequencies<Scalar>(in.size(), in.sample_rate);
  CVector<Scalar> ox(in.size()), oy(in.size());
  const Scalar half_tau = static_cast<Scalar>(pmd.dgd / 2.0);
  for (Index k = 0; k < in.size(); ++k) {
    const Complex<Scalar> rx = c * fx(k) + s * fy(k);
    const Complex<Scalar> ry = -s * fx(k) + c * fy(k);
    ox(k) = rx * std::polar(Scalar(1), w(k) * half_tau);
    oy(k) = ry * std::polar(Scalar(1), -w(k) * half_tau);
  }
  return {ifft(ox), ifft(oy), in.sample_rate};
}

/// Wiener laser phase noise at one sample per symbol.
struct PhaseNoiseModel {
  double combined_linewidth = 0.0;  // Hz, TX + LO
  double symbol_period = 1.0;       // s
  std::uint64_t seed = 0;

  /// sigma_p^2 = 2 pi dnu T_s (rad^2 per symbol).
  double step_variance() const { return 2.0 * kPi * combined_linewidth * symbol_period; }

  static PhaseNoiseModel from_sigma(double sigma, double symbol_period, std::uint64_t seed) {
    return {sigma * sigma / (2.0 * kPi * symbol_period), symbol_period, seed};
  }
};

/// Random-walk phase phi_n = phi_{n-1} + g_n, phi_{-1} = 0, g_n ~ N(0, sigma_p^2).
inline RVectorXd wiener_phase(Index n, const PhaseNoiseModel& pn) {
  const double var = pn.step_variance();
  if (!(var >= 0)) throw ConfigError("channel", "linewidth", "phase-noise variance must be >= 0");
  RVectorXd phase = RVectorXd::Zero(n);
  if (var == 0.0) return phase;
  Rng rng(pn.seed);
  const double sd = std::sqrt(var);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    acc += rng.normal(sd);
    phase(i) = acc;
  }
  return phase;
}

template <typename Scalar>
struct PhaseNoiseOutput {
  DualPolSignal<Scalar> signal;
  RVectorXd phase;
};

/// The same phase trajectory multiplies both polarizations.
template <typename Scalar>
PhaseNoiseOutput<Scalar> apply_phase_noise(const DualPolSignal<Scalar>& in, const PhaseNoiseModel& pn) {
  in.validate();
  PhaseNoiseOutput<Scalar> out{in, wiener_phase(in.size(), pn)};
  for (Index i = 0; i < in.size(); ++i) {
    const Complex<Scalar> rot = std::polar(Scalar(1), static_cast<Scalar>(out.phase(i)));
    out.signal.x(i) *= rot;
    out.signal.y(i) *= rot;
  }
  return out;
}

inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

/// Circular complex Gaussian noise with variance mean|x|^2 / 10^(snr/10),
/// split equally between I and Q.
template <typename Scalar>
CVector<Scalar> add_awgn(const CVector<Scalar>& in, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return in;
  if (std::isnan(snr_db)) throw ConfigError("channel", "snr_db", "is NaN");
  const double power = static_cast<double>(in.squaredNorm()) / static_cast<double>(std::max<Index>(in.size(), 1));
  if (!(power > 0)) throw DomainError("add_awgn: signal has zero power");
  const double sd = std::sqrt(power / std::pow(10.0, snr_db / 10.0) / 2.0);
  Rng rng(seed);
  CVector<Scalar> out = in;
  for (Index i = 0; i < out.size(); ++i) {
    const double re = rng.normal(sd);
    const double im = rng.normal(sd);
    out(i) += Complex<Scalar>(static_cast<Scalar>(re), static_cast<Scalar>(im));
  }
  return out;
}

/// X and Y draw from independent streams derived from `seed`.
template <typename Scalar>
DualPolSignal<Scalar> add_awgn(const DualPolSignal<Scalar>& in, double snr_db, std::uint64_t seed) {
  return {add_awgn(in.x, snr_db, stream_seed(seed, 0)), add_awgn(in.y, snr_db, stream_seed(seed, 1)),
          in.sample_rate};
}

}  // namespace ocdsp

#endif  // OCDSP_CHANNEL_HPP
