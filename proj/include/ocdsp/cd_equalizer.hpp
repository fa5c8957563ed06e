#ifndef OCDSP_CD_EQUALIZER_HPP
#define OCDSP_CD_EQUALIZER_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ocdsp/channel.hpp"
#include "ocdsp/fft.hpp"
#include "ocdsp/modulation.hpp"
#include "ocdsp/types.hpp"

namespace ocdsp {

// ---------------------------------------------------------------------------
// Static time-domain FIR
// ---------------------------------------------------------------------------

/// Maximum tap count 2 floor(|D| lambda^2 L / (2 c T^2)) + 1 for sampling
/// period T. Returns 1 when there is no dispersion.
inline int dispersion_tap_count(const SystemParams& p, double sampling_period) {
  const double ratio = std::abs(p.cd_coefficient) * p.wavelength * p.wavelength * p.fiber_length /
                       (2.0 * p.light_speed * sampling_period * sampling_period);
  return 2 * static_cast<int>(std::floor(ratio)) + 1;
}

/// Odd-length centered FIR; taps(center + k) is the coefficient at delay k.
template <typename Scalar>
struct FirTaps {
  CVector<Scalar> taps;

  Index size() const { return taps.size(); }
  Index center() const { return taps.size() / 2; }

  static FirTaps identity(Index n = 1) {
    if (n < 1 || n % 2 == 0) throw ConfigError("cd_eq", "n_taps", "FIR length must be odd and >= 1");
    FirTaps f{CVector<Scalar>::Zero(n)};
    f.taps(n / 2) = Scalar(1);
    return f;
  }
};

/// Chirp FIR that inverts the fiber dispersion of apply_cd:
///   a_k = sqrt(c T^2 / (j D lambda^2 L)) exp(+j pi c T^2 k^2 / (D lambda^2 L)),
///   |k| <= floor(N/2), N = dispersion_tap_count() unless n_taps > 0.
/// The tap set is scaled to unit energy when `normalize` is set.
template <typename Scalar = double>
FirTaps<Scalar> stdfir_design(const SystemParams& p, int n_taps = 0, bool normalize = true) {
  if (p.fiber_length == 0.0 || p.cd_coefficient == 0.0) return FirTaps<Scalar>::identity(1);
  if (p.fiber_length < 0) throw ConfigError("channel", "fiber_length", "must be >= 0");
  const double t = p.sampling_period();
  const int n = n_taps > 0 ? n_taps : dispersion_tap_count(p, t);
  if (n % 2 == 0) throw ConfigError("cd_eq", "n_taps", "FIR length must be odd");
  const double dl2l = p.cd_coefficient * p.wavelength * p.wavelength * p.fiber_length;
  const double a = kPi * p.light_speed * t * t / dl2l;
  const Complex<double> gain = std::sqrt(Complex<double>(p.light_speed * t * t / dl2l, 0.0) / Complex<double>(0, 1));
  FirTaps<Scalar> f{CVector<Scalar>(n)};
  const int half = n / 2;
  for (int k = -half; k <= half; ++k)
    f.taps(k + half) = Complex<Scalar>(gain * std::polar(1.0, a * static_cast<double>(k) * k));
  if (normalize) f.taps /= static_cast<Scalar>(f.taps.norm());
  return f;
}

template <typename Scalar>
struct FilterOutput {
  CVector<Scalar> samples;
  Index transient = 0;  // samples at each end affected by zero padding
};

/// Centered linear convolution y(n) = sum_k a_k x(n - k), same length as x.
template <typename Scalar>
FilterOutput<Scalar> fir_filter(const CVector<Scalar>& in, const FirTaps<Scalar>& f) {
  const Index n = in.size(), nt = f.size(), c = f.center();
  if (nt < 1 || nt % 2 == 0) throw ConfigError("cd_eq", "n_taps", "FIR length must be odd and >= 1");
  if (n < nt) throw ShapeError("fir_filter: signal shorter than the filter");
  FilterOutput<Scalar> out{CVector<Scalar>::Zero(n), c};
  for (Index i = 0; i < n; ++i) {
    Complex<Scalar> acc(0);
    const Index k_lo = std::max<Index>(-c, i - (n - 1));
    const Index k_hi = std::min<Index>(c, i);
    for (Index k = k_lo; k <= k_hi; ++k) acc += f.taps(c + k) * in(i - k);
    out.samples(i) = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time-domain LMS
// ---------------------------------------------------------------------------

enum class LmsMode { SequenceTraining, DecisionDirected };

template <typename Scalar>
struct LmsState {
  CVector<Scalar> weights;
  Scalar mu{0.1};
  LmsMode mode = LmsMode::SequenceTraining;

  /// Center tap 1, others 0.
  static LmsState identity(Index n_taps, Scalar mu, LmsMode mode = LmsMode::SequenceTraining) {
    return {FirTaps<Scalar>::identity(n_taps).taps, mu, mode};
  }
};

template <typename Scalar>
struct LmsRun {
  CVector<Scalar> symbols;                                            // y_out, one per symbol
  Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> weight_trace;  // row = recorded iteration
  std::vector<Index> trace_iterations;
  CVector<Scalar> errors;                                             // e_LMS per symbol
};

/// Tapped-delay-line window of `n_taps` samples centered on `center`,
/// newest first: window(j) = x(center + n_taps/2 - j), zero outside the record.
template <typename Scalar>
CVector<Scalar> centered_window(const CVector<Scalar>& x, Index center, Index n_taps) {
  CVector<Scalar> w(n_taps);
  const Index half = n_taps / 2;
  for (Index j = 0; j < n_taps; ++j) {
    const Index idx = center + half - j;
    w(j) = (idx >= 0 && idx < x.size()) ? x(idx) : Complex<Scalar>(0);
  }
  return w;
}

/// Symbol-spaced adaptation on an input sampled at `sps` samples/symbol:
///   y(n) = W^H x(n),  e(n) = d(n) - y(n),  W <- W + mu x(n) e*(n).
/// In sequence-training mode d(n) comes from `training` while it lasts and
/// from hard decisions afterwards; decision-directed mode always decides.
/// `state` carries the final weights on return.
template <typename Scalar>
LmsRun<Scalar> tdlms_run(const CVector<Scalar>& in, int sps, std::span<const Complex<Scalar>> training,
                         LmsState<Scalar>& state, const PskModulation& mod, Index trace_every = 1) {
  if (!(state.mu > 0)) throw ConfigError("cd_eq", "lms_mu", "step size must be positive");
  if (sps < 1) throw ConfigError("system", "samples_per_symbol", "must be >= 1");
  const Index nt = state.weights.size();
  if (nt < 1) throw ConfigError("cd_eq", "n_taps", "LMS needs at least one tap");
  const Index n_sym = in.size() / sps;
  if (trace_every < 1) trace_every = 1;

  LmsRun<Scalar> run;
  run.symbols.resize(n_sym);
  run.errors.resize(n_sym);
  const Index n_trace = n_sym > 0 ? (n_sym - 1) / trace_every + 1 : 0;
  run.weight_trace.resize(n_trace, nt);
  run.trace_iterations.reserve(static_cast<std::size_t>(n_trace));

  for (Index n = 0; n < n_sym; ++n) {
    const CVector<Scalar> xv = centered_window(in, n * sps, nt);
    const Complex<Scalar> y = state.weights.dot(xv);  // W^H x
    Complex<Scalar> d;
    if (state.mode == LmsMode::SequenceTraining && n < static_cast<Index>(training.size()))
      d = training[static_cast<std::size_t>(n)];
    else
      d = Complex<Scalar>(mod.point(mod.nearest_index(y)));
    const Complex<Scalar> e = d - y;
    state.weights += state.mu * xv * std::conj(e);
    run.symbols(n) = y;
    run.errors(n) = e;
    if (n % trace_every == 0) {
      run.weight_trace.row(static_cast<Index>(run.trace_iterations.size())) = state.weights.transpose();
      run.trace_iterations.push_back(n);
    }
  }
  return run;
}

/// Rank-1 correlation x x^H has the single nonzero eigenvalue ||x||^2.
template <typename Scalar>
Scalar instantaneous_max_eigenvalue(const CVector<Scalar>& window) {
  return window.squaredNorm();
}

/// 1 / U_max with U_max the largest eigenvalue of the instantaneous
/// correlation matrix, averaged over every full `n_taps` window of `in`
/// (about 1 / (n_taps * power)).
template <typename Scalar>
Scalar lms_stepsize_bound(const CVector<Scalar>& in, Index n_taps) {
  if (n_taps < 1 || in.size() < n_taps) throw ShapeError("lms_stepsize_bound: window shorter than taps");
  Scalar acc(0);
  Index count = 0;
  // Running ||window||^2 over consecutive windows.
  Scalar energy = in.head(n_taps).squaredNorm();
  for (Index start = 0;; ++start) {
    acc += energy;
    ++count;
    if (start + n_taps >= in.size()) break;
    energy += std::norm(in(start + n_taps)) - std::norm(in(start));
  }
  const Scalar u_max = acc / static_cast<Scalar>(count);
  if (!(u_max > 0)) throw DomainError("lms_stepsize_bound: window has zero energy");
  return Scalar(1) / u_max;
}

// ---------------------------------------------------------------------------
// Frequency-domain equalizer
// ---------------------------------------------------------------------------

enum class FdeMethod { OverlapSave, OverlapAdd, WholeRecord };

struct FdeConfig {
  Index fft_size = 0;
  Index overlap = 0;
  FdeMethod method = FdeMethod::OverlapSave;
};

/// Shortest overlap that spans the dispersion impulse response at the
/// signal's sample rate: N^A - 1.
inline Index fde_min_overlap(const SystemParams& p, double sample_rate) {
  return dispersion_tap_count(p, 1.0 / sample_rate) - 1;
}

/// overlap = 2 (N^A - 1) + 32, fft_size = smallest power of two >= 4 overlap.
inline FdeConfig fde_default_config(const SystemParams& p, double sample_rate,
                                    FdeMethod method = FdeMethod::OverlapSave) {
  FdeConfig cfg;
  cfg.overlap = 2 * fde_min_overlap(p, sample_rate) + 32;
  cfg.fft_size = next_pow2(4 * cfg.overlap);
  cfg.method = method;
  return cfg;
}

inline void fde_validate(const FdeConfig& cfg, const SystemParams& p, double sample_rate) {
  if (!is_pow2(cfg.fft_size)) throw ConfigError("cd_eq", "fft_size", "must be a power of two");
  if (cfg.overlap < 0) throw ConfigError("cd_eq", "overlap", "must be >= 0");
  if (cfg.overlap >= cfg.fft_size) throw ConfigError("cd_eq", "overlap", "must be smaller than fft_size");
  const Index min_overlap = fde_min_overlap(p, sample_rate);
  if (cfg.overlap < min_overlap)
    throw ConfigError("cd_eq", "overlap",
                      "must be >= " + std::to_string(min_overlap) + " samples to span the dispersion length");
}

/// Impulse response of exp(-j beta w^2) sampled on an fft_size-point grid,
/// truncated to the overlap + 1 taps around zero delay. All three FDE methods
/// apply exactly this FIR.
template <typename Scalar>
FirTaps<Scalar> fde_design_taps(const SystemParams& p, double sample_rate, const FdeConfig& cfg) {
  const double beta = dispersion_beta(p);
  const Index k = cfg.fft_size;
  const RVector<Scalar> w = angular_frequencies<Scalar>(k, static_cast<Scalar>(sample_rate));
  CVector<Scalar> response(k);
  for (Index i = 0; i < k; ++i) response(i) = std::polar(Scalar(1), static_cast<Scalar>(-beta * w(i) * w(i)));
  const CVector<Scalar> h = ifft(response);
  // Odd length keeps the centered-FIR convention; an odd overlap drops one tap.
  const Index len = cfg.overlap % 2 == 0 ? cfg.overlap + 1 : cfg.overlap;
  const Index half = len / 2;
  FirTaps<Scalar> f{CVector<Scalar>(len)};
  for (Index j = -half; j <= half; ++j) f.taps(j + half) = h((j + k) % k);
  return f;
}

namespace detail {

/// Full linear convolution length n + taps - 1, via one zero-padded transform.
template <typename Scalar>
CVector<Scalar> linear_convolve_whole(const CVector<Scalar>& x, const CVector<Scalar>& h) {
  const Index len = x.size() + h.size() - 1;
  const Index k = next_pow2(len);
  CVector<Scalar> xp = CVector<Scalar>::Zero(k), hp = CVector<Scalar>::Zero(k);
  xp.head(x.size()) = x;
  hp.head(h.size()) = h;
  const CVector<Scalar> prod = (fft(xp).array() * fft(hp).array()).matrix();
  return ifft(prod).head(len);
}

template <typename Scalar>
CVector<Scalar> linear_convolve_ols(const CVector<Scalar>& x, const CVector<Scalar>& h, Index k) {
  const Index m = h.size() - 1;
  const Index step = k - m;
  const Index len = x.size() + m;
  CVector<Scalar> hp = CVector<Scalar>::Zero(k);
  hp.head(h.size()) = h;
  const CVector<Scalar> hf = fft(hp);
  // m zeros of history, then the record, then zeros until the last block fills.
  const Index blocks = (len + step - 1) / step;
  CVector<Scalar> xp = CVector<Scalar>::Zero(blocks * step + m);
  xp.segment(m, x.size()) = x;
  CVector<Scalar> out(blocks * step);
  Eigen::FFT<Scalar> engine;
  CVector<Scalar> spec(k), seg(k), blk(k);
  for (Index b = 0; b < blocks; ++b) {
    seg = xp.segment(b * step, k);
    engine.fwd(spec, seg);
    spec = (spec.array() * hf.array()).matrix();
    engine.inv(blk, spec);
    out.segment(b * step, step) = blk.tail(step);
  }
  return out.head(len);
}

template <typename Scalar>
CVector<Scalar> linear_convolve_ola(const CVector<Scalar>& x, const CVector<Scalar>& h, Index k) {
  const Index m = h.size() - 1;
  const Index step = k - m;
  const Index len = x.size() + m;
  CVector<Scalar> hp = CVector<Scalar>::Zero(k);
  hp.head(h.size()) = h;
  const CVector<Scalar> hf = fft(hp);
  const Index blocks = (x.size() + step - 1) / step;
  CVector<Scalar> out = CVector<Scalar>::Zero(blocks * step + m);
  Eigen::FFT<Scalar> engine;
  CVector<Scalar> spec(k), seg(k), blk(k);
  for (Index b = 0; b < blocks; ++b) {
    seg.setZero();
    const Index take = std::min(step, x.size() - b * step);
    seg.head(take) = x.segment(b * step, take);
    engine.fwd(spec, seg);
    spec = (spec.array() * hf.array()).matrix();
    engine.inv(blk, spec);
    out.segment(b * step, k) += blk;
  }
  return out.head(len);
}

}  // namespace detail

/// Applies the FDE FIR from fde_design_taps() blockwise (overlap-save or
/// overlap-add) or in one transform, output time-aligned to the input.
template <typename Scalar>
FilterOutput<Scalar> fde_run(const CVector<Scalar>& in, double sample_rate, const SystemParams& p,
                             const FdeConfig& cfg) {
  if (in.size() < 1) throw ShapeError("fde_run: empty signal");
  if (dispersion_beta(p) == 0.0) return {in, 0};
  fde_validate(cfg, p, sample_rate);
  const FirTaps<Scalar> f = fde_design_taps<Scalar>(p, sample_rate, cfg);
  CVector<Scalar> full;
  switch (cfg.method) {
    case FdeMethod::OverlapSave: full = detail::linear_convolve_ols(in, f.taps, cfg.fft_size); break;
    case FdeMethod::OverlapAdd: full = detail::linear_convolve_ola(in, f.taps, cfg.fft_size); break;
    case FdeMethod::WholeRecord: full = detail::linear_convolve_whole(in, f.taps); break;
  }
  return {full.segment(f.center(), in.size()), f.center()};
}

}  // namespace ocdsp

#endif  // OCDSP_CD_EQUALIZER_HPP
