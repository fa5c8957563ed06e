#include "ocdsp/analytics.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <ostream>
#include <string>

#include "ocdsp/csv.hpp"

namespace ocdsp::analytics {

namespace {

void check_order(int m) {
  if (m < 2 || (m & (m - 1)) != 0) throw ConfigError("cpe", "order", "must be a power of two >= 2");
}

double log2_order(int m) { return std::log2(static_cast<double>(m)); }

// erfc(pi / (m sqrt(2) s)) with the s = 0 limit.
double tail(int m, double s) {
  if (s <= 0.0) return 0.0;
  return std::erfc(kPi / (static_cast<double>(m) * std::sqrt(2.0) * s));
}

}  // namespace

double ber_floor_nlms(int m, double sigma) {
  check_order(m);
  if (sigma < 0) throw DomainError("ber_floor: sigma must be >= 0");
  return tail(m, sigma) / log2_order(m);
}

double ber_floor_differential(int m, double sigma) { return ber_floor_nlms(m, sigma); }

double sigma_bwa_k(double sigma, int block_size, int k) {
  if (block_size < 1) throw DomainError("sigma_bwa_k: block size must be >= 1");
  if (k < 1 || k > block_size) throw DomainError("sigma_bwa_k: k must lie in [1, N_b]");
  const double a = k - 1, b = block_size - k, n = block_size;
  const double bracket = 2 * a * a * a + 3 * a * a + 2 * b * b * b + 3 * b * b + n - 1;
  return sigma * sigma / (6.0 * n * n) * bracket;
}

double ber_floor_bwa(int m, double sigma, int block_size) {
  check_order(m);
  if (sigma < 0) throw DomainError("ber_floor: sigma must be >= 0");
  double sum = 0.0;
  for (int k = 1; k <= block_size; ++k) sum += tail(m, std::sqrt(sigma_bwa_k(sigma, block_size, k)));
  return sum / (block_size * log2_order(m));
}

double sigma_vv(double sigma, int window) {
  if (window < 1 || window % 2 == 0) throw DomainError("sigma_vv: window must be odd and >= 1");
  const double n = window;
  return sigma * sigma * (n * n - 1.0) / (12.0 * n);
}

double ber_floor_vv(int m, double sigma, int window) {
  check_order(m);
  if (sigma < 0) throw DomainError("ber_floor: sigma must be >= 0");
  return tail(m, std::sqrt(sigma_vv(sigma, window))) / log2_order(m);
}

double ber_floor(CpeMethod method, int m, double sigma, int size) {
  switch (method) {
    case CpeMethod::Nlms: return ber_floor_nlms(m, sigma);
    case CpeMethod::Differential: return ber_floor_differential(m, sigma);
    case CpeMethod::Bwa: return ber_floor_bwa(m, sigma, size);
    case CpeMethod::Vv: return ber_floor_vv(m, sigma, size);
  }
  return 0.0;
}

double sigma_for_floor(CpeMethod method, int m, double target, int size) {
  check_order(m);
  const double cap = 1.0 / log2_order(m);
  if (!(target > 0) || !(target < cap))
    throw DomainError("sigma_for_floor: target must lie in (0, 1/log2 m)");
  // The single-erfc floors invert in closed form.
  const auto closed_form = [&](double scale_sq) {
    const double arg = boost::math::erfc_inv(target * log2_order(m));
    const double s_eff = kPi / (static_cast<double>(m) * std::sqrt(2.0) * arg);
    return s_eff / std::sqrt(scale_sq);
  };
  switch (method) {
    case CpeMethod::Nlms:
    case CpeMethod::Differential: return closed_form(1.0);
    case CpeMethod::Vv: {
      if (size <= 1) throw DomainError("sigma_for_floor: VV floor is 0 for N_v = 1");
      return closed_form(sigma_vv(1.0, size));
    }
    case CpeMethod::Bwa: break;
  }
  if (size <= 1) throw DomainError("sigma_for_floor: BWA floor is 0 for N_b = 1");
  const auto f = [&](double s) { return ber_floor_bwa(m, s, size) - target; };
  double hi = 0.1;
  while (f(hi) < 0) hi *= 2;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, 1e-9, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

std::vector<FloorRow> floor_table(CpeMethod method, int m, const std::vector<double>& sigmas,
                                  const std::vector<int>& sizes) {
  std::vector<FloorRow> rows;
  for (int n : sizes)
    for (double s : sigmas) rows.push_back({m, s, n, ber_floor(method, m, s, n)});
  return rows;
}

void write_floor_csv(std::ostream& os, const std::vector<FloorRow>& rows) {
  csv::write_row(os, {"m", "sigma", "N", "floor"});
  for (const auto& r : rows)
    csv::write_row(os, {std::to_string(r.m), csv::format_double(r.sigma), std::to_string(r.size),
                        csv::format_double(r.floor)});
}

}  // namespace ocdsp::analytics
