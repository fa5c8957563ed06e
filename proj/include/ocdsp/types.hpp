#ifndef OCDSP_TYPES_HPP
#define OCDSP_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "ocdsp/errors.hpp"

namespace ocdsp {

using Index = Eigen::Index;

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using CVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CVectorXd = CVector<double>;
using RVectorXd = RVector<double>;

/// One bit per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

inline constexpr double kLightSpeed = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

/// Converts a dispersion coefficient in ps/(nm km) to s/m^2.
constexpr double ps_per_nm_km(double value) { return value * 1e-6; }

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  for (Index i = 0; i < v.size(); ++i) {
    const auto z = v(i);
    if (!std::isfinite(std::real(z)) || !std::isfinite(std::imag(z))) return false;
  }
  return true;
}

/// Two aligned complex-baseband sample streams (X and Y polarization).
template <typename Scalar>
struct DualPolSignal {
  CVector<Scalar> x;
  CVector<Scalar> y;
  Scalar sample_rate{1};

  DualPolSignal() = default;
  DualPolSignal(CVector<Scalar> x_in, CVector<Scalar> y_in, Scalar rate)
      : x(std::move(x_in)), y(std::move(y_in)), sample_rate(rate) {
    validate();
  }

  Index size() const { return x.size(); }

  void validate() const {
    if (x.size() != y.size()) throw ShapeError("dual-pol signal: x and y lengths differ");
    if (!(sample_rate > 0)) throw DomainError("dual-pol signal: sample rate must be positive");
    if (!all_finite(x) || !all_finite(y)) throw DomainError("dual-pol signal: non-finite sample");
  }
};

using DualPolSignalXd = DualPolSignal<double>;

/// Link and transceiver parameters, SI units throughout.
struct SystemParams {
  double symbol_rate = 28e9;          // baud
  int samples_per_symbol = 2;
  double wavelength = 1550e-9;        // m
  double cd_coefficient = ps_per_nm_km(16.0);  // s/m^2
  double fiber_length = 0.0;          // m
  double light_speed = kLightSpeed;   // m/s
  double tx_linewidth = 0.0;          // Hz
  double lo_linewidth = 0.0;          // Hz

  double sample_rate() const { return symbol_rate * samples_per_symbol; }
  double sampling_period() const { return 1.0 / sample_rate(); }
  double symbol_period() const { return 1.0 / symbol_rate; }

  void validate() const {
    if (!(symbol_rate > 0)) throw ConfigError("system", "symbol_rate", "must be positive");
    if (samples_per_symbol < 1) throw ConfigError("system", "samples_per_symbol", "must be >= 1");
    if (!(wavelength > 0)) throw ConfigError("system", "wavelength", "must be positive");
    if (!(fiber_length >= 0)) throw ConfigError("channel", "fiber_length", "must be >= 0");
    if (!(tx_linewidth >= 0) || !(lo_linewidth >= 0))
      throw ConfigError("channel", "linewidth", "must be >= 0");
  }
};

}  // namespace ocdsp

#endif  // OCDSP_TYPES_HPP
