#ifndef OCDSP_POLARIZATION_HPP
#define OCDSP_POLARIZATION_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "ocdsp/cd_equalizer.hpp"
#include "ocdsp/modulation.hpp"
#include "ocdsp/types.hpp"

namespace ocdsp {

/// Four FIR branches of the 2x2 butterfly plus the adaptation step size.
template <typename Scalar>
struct ButterflyTaps {
  CVector<Scalar> wxx, wxy, wyx, wyy;
  Scalar mu{1e-3};

  Index size() const { return wxx.size(); }

  /// wxx = wyy = center spike, cross terms zero.
  static ButterflyTaps identity(Index n_taps, Scalar mu) {
    if (n_taps < 1 || n_taps % 2 == 0) throw ConfigError("pol_eq", "n_taps", "must be odd and >= 1");
    const CVector<Scalar> spike = FirTaps<Scalar>::identity(n_taps).taps;
    const CVector<Scalar> zero = CVector<Scalar>::Zero(n_taps);
    return {spike, zero, zero, spike, mu};
  }

  void validate() const {
    const Index n = wxx.size();
    if (n < 1 || wxy.size() != n || wyx.size() != n || wyy.size() != n)
      throw ShapeError("butterfly taps: the four branches must have equal nonzero length");
    if (!all_finite(wxx) || !all_finite(wxy) || !all_finite(wyx) || !all_finite(wyy))
      throw DomainError("butterfly taps: non-finite coefficient");
  }
};

template <typename Scalar>
using PolPair = std::pair<Complex<Scalar>, Complex<Scalar>>;

/// x_out = wxx . x + wxy . y,  y_out = wyx . x + wyy . y  (unconjugated inner products).
template <typename Scalar>
PolPair<Scalar> butterfly_apply(const CVector<Scalar>& x_win, const CVector<Scalar>& y_win,
                                const ButterflyTaps<Scalar>& t) {
  if (x_win.size() != t.size() || y_win.size() != t.size())
    throw ShapeError("butterfly_apply: window length differs from tap length");
  return {t.wxx.cwiseProduct(x_win).sum() + t.wxy.cwiseProduct(y_win).sum(),
          t.wyx.cwiseProduct(x_win).sum() + t.wyy.cwiseProduct(y_win).sum()};
}

/// Decision-directed / trained LMS step. eps = d - out; each branch moves by
/// mu * eps * conj(input window), the steepest-descent direction of |eps|^2
/// for the unconjugated butterfly.
template <typename Scalar>
ButterflyTaps<Scalar> ddlms_update(ButterflyTaps<Scalar> t, const CVector<Scalar>& x_win,
                                   const CVector<Scalar>& y_win, const PolPair<Scalar>& out,
                                   const PolPair<Scalar>& desired) {
  if (x_win.size() != t.size() || y_win.size() != t.size()) throw ShapeError("ddlms_update: window length mismatch");
  const Complex<Scalar> ex = t.mu * (desired.first - out.first);
  const Complex<Scalar> ey = t.mu * (desired.second - out.second);
  t.wxx += ex * x_win.conjugate();
  t.wxy += ex * y_win.conjugate();
  t.wyx += ey * x_win.conjugate();
  t.wyy += ey * y_win.conjugate();
  return t;
}

/// Constant-modulus step with eta = 1 - |out|^2 (Godard p = 2, unit radius):
/// v <- v + mu * eta * out * conj(input window).
template <typename Scalar>
ButterflyTaps<Scalar> cma_update(ButterflyTaps<Scalar> t, const CVector<Scalar>& x_win,
                                 const CVector<Scalar>& y_win, const PolPair<Scalar>& out) {
  if (x_win.size() != t.size() || y_win.size() != t.size()) throw ShapeError("cma_update: window length mismatch");
  const Complex<Scalar> gx = t.mu * (Scalar(1) - std::norm(out.first)) * out.first;
  const Complex<Scalar> gy = t.mu * (Scalar(1) - std::norm(out.second)) * out.second;
  t.wxx += gx * x_win.conjugate();
  t.wxy += gx * y_win.conjugate();
  t.wyx += gy * x_win.conjugate();
  t.wyy += gy * y_win.conjugate();
  return t;
}

enum class PolAlgorithm { DdLms, Cma };
enum class DdLmsPhase { Training, DecisionDirected };

struct PolEqMode {
  PolAlgorithm algorithm = PolAlgorithm::Cma;
  DdLmsPhase phase = DdLmsPhase::Training;
  Index training_length = 0;  // symbols, DD-LMS training phase only
  Index trace_every = 100;    // tap snapshots every this many symbols
  // CMA degeneracy check: when |sum x_out conj(y_out)| / sqrt(sum |x_out|^2 sum |y_out|^2)
  // over the last check window exceeds the threshold, both outputs carry the
  // same tributary and row y is re-initialized orthogonally to row x.
  double singularity_threshold = 0.9;
  Index singularity_check_every = 1000;
};

template <typename Scalar>
struct TapSnapshot {
  Index symbol = 0;
  ButterflyTaps<Scalar> taps;
};

template <typename Scalar>
struct PolEqResult {
  DualPolSignal<Scalar> symbols;        // one sample per symbol
  std::vector<TapSnapshot<Scalar>> trace;
  RVectorXd cost;                       // (1-|x|^2)^2 + (1-|y|^2)^2 for CMA, |eps_x|^2 + |eps_y|^2 for DD-LMS
  int singularity_resets = 0;
  ButterflyTaps<Scalar> final_taps;
};

/// Rebuilds the y row as the para-unitary complement of the x row:
/// wyx = -conj(reverse(wxy)), wyy = conj(reverse(wxx)).
template <typename Scalar>
void orthogonalize_second_row(ButterflyTaps<Scalar>& t) {
  t.wyx = -t.wxy.reverse().conjugate();
  t.wyy = t.wxx.reverse().conjugate();
}

/// Tap-space similarity of the two butterfly rows, in [0, 1].
template <typename Scalar>
double row_correlation(const ButterflyTaps<Scalar>& t) {
  const Complex<Scalar> inner = t.wxx.dot(t.wyx) + t.wxy.dot(t.wyy);
  const double nx = std::sqrt(static_cast<double>(t.wxx.squaredNorm() + t.wxy.squaredNorm()));
  const double ny = std::sqrt(static_cast<double>(t.wyx.squaredNorm() + t.wyy.squaredNorm()));
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return std::abs(inner) / (nx * ny);
}

/// Runs the butterfly over a signal at `sps` samples/symbol (window centered
/// on each symbol's first sample), adapting once per symbol. DD-LMS takes
/// desired symbols from `training` (1 sample/symbol) during its training
/// phase and from hard decisions otherwise.
template <typename Scalar>
PolEqResult<Scalar> equalize_dualpol(const DualPolSignal<Scalar>& in, int sps, const PolEqMode& mode,
                                     ButterflyTaps<Scalar> taps, const PskModulation& mod,
                                     const DualPolSignal<Scalar>* training = nullptr) {
  in.validate();
  taps.validate();
  if (sps < 1 || sps > 2) throw ConfigError("pol_eq", "samples_per_symbol", "must be 1 or 2");
  if (mode.training_length < 0) throw ConfigError("pol_eq", "training_symbols", "must be >= 0");
  const bool trained = mode.algorithm == PolAlgorithm::DdLms && mode.phase == DdLmsPhase::Training;
  Index n_training = 0;
  if (trained) {
    n_training = mode.training_length;
    if (training == nullptr || training->size() < n_training)
      throw ShapeError("equalize_dualpol: training sequence shorter than training_length");
  }

  const Index n_sym = in.size() / sps;
  const Index nt = taps.size();
  PolEqResult<Scalar> res;
  res.symbols.x.resize(n_sym);
  res.symbols.y.resize(n_sym);
  res.symbols.sample_rate = in.sample_rate / static_cast<Scalar>(sps);
  res.cost.resize(n_sym);
  const Index trace_every = std::max<Index>(1, mode.trace_every);
  Complex<double> cross(0);
  double px = 0.0, py = 0.0;

  for (Index n = 0; n < n_sym; ++n) {
    const CVector<Scalar> xw = centered_window(in.x, n * sps, nt);
    const CVector<Scalar> yw = centered_window(in.y, n * sps, nt);
    const PolPair<Scalar> out = butterfly_apply(xw, yw, taps);
    res.symbols.x(n) = out.first;
    res.symbols.y(n) = out.second;

    if (mode.algorithm == PolAlgorithm::Cma) {
      const double ex = 1.0 - std::norm(out.first), ey = 1.0 - std::norm(out.second);
      res.cost(n) = ex * ex + ey * ey;
      taps = cma_update(std::move(taps), xw, yw, out);
      cross += Complex<double>(out.first * std::conj(out.second));
      px += std::norm(out.first);
      py += std::norm(out.second);
      if (mode.singularity_check_every > 0 && (n + 1) % mode.singularity_check_every == 0) {
        if (px > 0 && py > 0 && std::abs(cross) / std::sqrt(px * py) > mode.singularity_threshold) {
          orthogonalize_second_row(taps);
          ++res.singularity_resets;
        }
        cross = 0.0;
        px = py = 0.0;
      }
    } else {
      PolPair<Scalar> desired;
      if (n < n_training) {
        desired = {training->x(n), training->y(n)};
      } else {
        desired = {Complex<Scalar>(mod.point(mod.nearest_index(out.first))),
                   Complex<Scalar>(mod.point(mod.nearest_index(out.second)))};
      }
      res.cost(n) = std::norm(desired.first - out.first) + std::norm(desired.second - out.second);
      taps = ddlms_update(std::move(taps), xw, yw, out, desired);
    }
    if (n % trace_every == 0) res.trace.push_back({n, taps});
  }
  res.final_taps = std::move(taps);
  return res;
}

}  // namespace ocdsp

#endif  // OCDSP_POLARIZATION_HPP
