#include <doctest.h>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <sstream>

#include "ocdsp/analytics.hpp"
#include "ocdsp/random.hpp"

using namespace ocdsp;
using namespace ocdsp::analytics;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

const Big kBigPi = boost::math::constants::pi<Big>();

// 50-digit evaluation of the floors from the per-symbol variances, with the
// variance brackets expanded independently as sums of squared offsets.
Big big_tail(int m, const Big& var) {
  if (var == 0) return 0;
  return boost::math::erfc(kBigPi / (Big(m) * sqrt(Big(2) * var)));
}

// Wiener phase: variance of the block mean around symbol k is
// sigma^2 / N^2 * sum_j |j - k|-weighted counts. Computed by brute force.
Big big_bwa_var(const Big& sigma, int n, int k) {
  Big acc = 0;
  // e_k = phi_k - mean(phi); expand in independent increments.
  for (int i = 1; i < n; ++i) {
    // Increment between symbol i and i+1 (1-based) enters phi_j for j > i.
    Big coeff = 0;
    const Big after = Big(n - i) / n;
    coeff = (k > i ? Big(1) : Big(0)) - after;
    acc += coeff * coeff;
  }
  return acc * sigma * sigma;
}

Big big_floor_bwa(int m, double sigma, int n) {
  Big sum = 0;
  for (int k = 1; k <= n; ++k) sum += big_tail(m, big_bwa_var(Big(sigma), n, k));
  return sum / (n * log2(Big(m)));
}

}  // namespace

TEST_SUITE("analytics") {

TEST_CASE("zero phase noise gives zero floors") {
  for (int m : {2, 4, 8, 16}) {
    CHECK(ber_floor_nlms(m, 0.0) == 0.0);
    CHECK(ber_floor_differential(m, 0.0) == 0.0);
    CHECK(ber_floor_bwa(m, 0.0, 11) == 0.0);
    CHECK(ber_floor_vv(m, 0.0, 11) == 0.0);
  }
}

TEST_CASE("nlms and differential floors coincide") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const int m = 2 << static_cast<int>(rng.next_u64() % 4);
    const double s = 0.3 * rng.uniform();
    CHECK(ber_floor_nlms(m, s) == ber_floor_differential(m, s));
  }
}

TEST_CASE("single-erfc floors match a 50-digit oracle") {
  for (int m : {2, 4, 8}) {
    for (double s : {0.02, 0.1, 0.254, 0.5}) {
      const Big expect = big_tail(m, Big(s) * Big(s)) / log2(Big(m));
      CHECK(ber_floor_nlms(m, s) == doctest::Approx(expect.convert_to<double>()).epsilon(1e-13));
    }
  }
  CHECK(ber_floor_differential(4, 0.254) == doctest::Approx(1e-3).epsilon(0.02));
}

TEST_CASE("bwa variance brackets") {
  CHECK(sigma_bwa_k(0.1, 1, 1) == 0.0);
  CHECK(sigma_bwa_k(0.3, 3, 2) == doctest::Approx(2.0 * 0.09 / 9.0).epsilon(1e-14));
  for (int n = 1; n <= 41; ++n)
    for (int k = 1; k <= n; ++k) {
      CHECK(sigma_bwa_k(0.2, n, k) == doctest::Approx(sigma_bwa_k(0.2, n, n + 1 - k)).epsilon(1e-14));
      CHECK(sigma_bwa_k(0.2, n, k) == doctest::Approx(big_bwa_var(Big(0.2), n, k).convert_to<double>()).epsilon(1e-13));
    }
  CHECK_THROWS_AS(sigma_bwa_k(0.1, 5, 0), DomainError);
  CHECK_THROWS_AS(sigma_bwa_k(0.1, 5, 6), DomainError);
}

TEST_CASE("bwa floor matches the oracle") {
  for (int m : {2, 4, 8})
    for (int n : {2, 5, 11, 20})
      for (double s : {0.02, 0.05, 0.12}) {
        const double want = big_floor_bwa(m, s, n).convert_to<double>();
        CHECK(ber_floor_bwa(m, s, n) == doctest::Approx(want).epsilon(1e-12));
      }
  CHECK(ber_floor_bwa(4, 0.2, 1) == 0.0);
}

TEST_CASE("vv variance is the centre-symbol bwa variance") {
  CHECK(sigma_vv(0.5, 1) == 0.0);
  CHECK(sigma_vv(0.3, 3) == doctest::Approx(2.0 * 0.09 / 9.0).epsilon(1e-14));
  for (int n = 1; n <= 41; n += 2) {
    const double centre = sigma_bwa_k(0.17, n, (n + 1) / 2);
    if (centre == 0.0)
      CHECK(sigma_vv(0.17, n) == 0.0);
    else
      CHECK(sigma_vv(0.17, n) == doctest::Approx(centre).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sigma_vv(0.1, 4), DomainError);
  CHECK_THROWS_AS(ber_floor_vv(4, 0.1, 0), DomainError);
}

TEST_CASE("floor ordering and monotonicity") {
  for (int m : {2, 4, 8}) {
    for (int n = 1; n <= 41; n += 2) {
      double prev_s_vv = -1, prev_s_bwa = -1;
      for (double s = 0.0; s <= 0.3; s += 0.01) {
        const double vv = ber_floor_vv(m, s, n), bwa = ber_floor_bwa(m, s, n);
        CHECK(vv <= bwa * (1 + 1e-12));
        CHECK(vv >= 0.0);
        CHECK(bwa <= 1.0);
        CHECK(vv >= prev_s_vv);
        CHECK(bwa >= prev_s_bwa);
        prev_s_vv = vv;
        prev_s_bwa = bwa;
      }
      if (n + 2 <= 41) {
        CHECK(ber_floor_vv(m, 0.1, n + 2) >= ber_floor_vv(m, 0.1, n));
        CHECK(ber_floor_bwa(m, 0.1, n + 2) >= ber_floor_bwa(m, 0.1, n));
      }
    }
    for (int n = 1; n < 40; ++n) CHECK(ber_floor_bwa(m, 0.1, n + 1) >= ber_floor_bwa(m, 0.1, n));
  }
}

TEST_CASE("sigma_for_floor inverts the floors") {
  for (auto method : {CpeMethod::Nlms, CpeMethod::Differential, CpeMethod::Bwa, CpeMethod::Vv})
    for (double target : {1e-3, 1e-4, 1e-5}) {
      const int n = 11;
      const double s = sigma_for_floor(method, 4, target, n);
      CHECK(ber_floor(method, 4, s, n) == doctest::Approx(target).epsilon(1e-8));
    }
  CHECK(sigma_for_floor(CpeMethod::Differential, 4, 1e-3, 1) == doctest::Approx(0.25416).epsilon(1e-4));
  CHECK_THROWS_AS(sigma_for_floor(CpeMethod::Vv, 4, 1e-3, 1), DomainError);
  CHECK_THROWS_AS(sigma_for_floor(CpeMethod::Nlms, 4, 0.7, 1), DomainError);
}

TEST_CASE("floor table csv") {
  const auto rows = floor_table(CpeMethod::Vv, 4, {0.0, 0.1}, {1, 3});
  REQUIRE(rows.size() == 4);
  std::ostringstream os;
  write_floor_csv(os, rows);
  CHECK(os.str().rfind("m,sigma,N,floor\n", 0) == 0);
  CHECK(os.str().find("4,0,1,0\n") != std::string::npos);
}

}  // TEST_SUITE
