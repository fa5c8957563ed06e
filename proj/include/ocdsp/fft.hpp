#ifndef OCDSP_FFT_HPP
#define OCDSP_FFT_HPP

#include <unsupported/Eigen/FFT>

#include "ocdsp/types.hpp"

namespace ocdsp {

// Forward transform, no scaling.
template <typename Scalar>
CVector<Scalar> fft(const CVector<Scalar>& in) {
  Eigen::FFT<Scalar> engine;
  CVector<Scalar> out(in.size());
  engine.fwd(out, in);
  return out;
}

// Inverse transform scaled by 1/N, so ifft(fft(x)) == x.
template <typename Scalar>
CVector<Scalar> ifft(const CVector<Scalar>& in) {
  Eigen::FFT<Scalar> engine;
  CVector<Scalar> out(in.size());
  engine.inv(out, in);
  return out;
}

/// Angular frequency (rad/s) of each DFT bin for an n-point record at the
/// given sample rate. Bins above n/2 map to negative frequencies.
template <typename Scalar>
RVector<Scalar> angular_frequencies(Index n, Scalar sample_rate) {
  RVector<Scalar> w(n);
  const Scalar df = sample_rate / static_cast<Scalar>(n);
  for (Index k = 0; k < n; ++k) {
    const Index signed_k = (k <= (n - 1) / 2) ? k : k - n;
    w(k) = Scalar(2) * Scalar(kPi) * df * static_cast<Scalar>(signed_k);
  }
  return w;
}

inline Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

/// Band-limited interpolation by an integer factor (spectrum zero padding).
/// Samples at multiples of the factor reproduce the input exactly up to
/// rounding; the spectrum stays inside the original Nyquist band.
template <typename Scalar>
CVector<Scalar> upsample_ideal(const CVector<Scalar>& in, int factor) {
  if (factor < 1) throw ConfigError("upsample factor must be >= 1");
  if (factor == 1) return in;
  const Index n = in.size();
  const CVector<Scalar> spectrum = fft(in);
  CVector<Scalar> padded = CVector<Scalar>::Zero(n * factor);
  const Index half = n / 2;
  padded.head(n - half) = spectrum.head(n - half);
  padded.tail(half) = spectrum.tail(half);
  if (n % 2 == 0 && n > 0) {
    // Split the Nyquist bin so real signals remain real.
    const Complex<Scalar> nyq = spectrum(half);
    padded(n - half) = Scalar(0.5) * nyq;
    padded(n * factor - half) = Scalar(0.5) * nyq;
  }
  return ifft(padded) * static_cast<Scalar>(factor);
}

template <typename Scalar>
CVector<Scalar> decimate(const CVector<Scalar>& in, int factor, Index phase = 0) {
  if (factor < 1) throw ConfigError("decimation factor must be >= 1");
  if (factor == 1 && phase == 0) return in;
  const Index n = in.size() > phase ? (in.size() - phase + factor - 1) / factor : 0;
  CVector<Scalar> out(n);
  for (Index i = 0; i < n; ++i) out(i) = in(phase + i * factor);
  return out;
}

}  // namespace ocdsp

#endif  // OCDSP_FFT_HPP
