#include <doctest.h>

#include <algorithm>
#include <vector>

#include "ocdsp/analytics.hpp"
#include "ocdsp/channel.hpp"
#include "ocdsp/cpe.hpp"
#include "ocdsp/metrics.hpp"
#include "test_support.hpp"

using namespace ocdsp;

namespace {

CVectorXd rotate(const CVectorXd& s, const RVectorXd& phase) {
  CVectorXd out(s.size());
  for (Index i = 0; i < s.size(); ++i) out(i) = s(i) * std::polar(1.0, phase(i));
  return out;
}

std::span<const Complex<double>> as_span(const CVectorXd& v, Index n) {
  return {v.data(), static_cast<std::size_t>(std::min(n, v.size()))};
}

double phase_mse(const RVectorXd& est, const RVectorXd& truth) {
  return (est - truth).squaredNorm() / static_cast<double>(est.size());
}

}  // namespace

TEST_SUITE("cpe") {

TEST_CASE("method names") {
  for (auto m : {CpeMethod::Nlms, CpeMethod::Differential, CpeMethod::Bwa, CpeMethod::Vv})
    CHECK(cpe_method_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(cpe_method_from_string("kalman"), ConfigError);
}

TEST_CASE("nlms") {
  const PskModulation qpsk(4);
  const CVectorXd s = test::random_psk(2000, 4, 1);
  SUBCASE("clean input keeps the unit tap") {
    const auto r = nlms_cpe(s, qpsk, 1.0);
    CHECK(test::rms(r.corrected, s) < 1e-15);
    CHECK(r.phase.cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("constant offset is acquired") {
    const RVectorXd phase = RVectorXd::Constant(s.size(), 0.3);
    const auto r = nlms_cpe(rotate(s, phase), qpsk, 0.5);
    CHECK(r.phase(s.size() - 1) == doctest::Approx(0.3).epsilon(1e-3));
  }
  SUBCASE("zero-magnitude input skips the update") {
    CVectorXd x = s;
    x(10) = 0.0;
    const auto r = nlms_cpe(x, qpsk, 1.0);
    CHECK(r.skipped_updates == 1);
    CHECK(all_finite(r.corrected));
  }
  SUBCASE("mu must be positive") { CHECK_THROWS_AS(nlms_cpe(s, qpsk, 0.0), ConfigError); }
}

TEST_CASE("differential detection") {
  const PskModulation qpsk(4);
  SUBCASE("isolated phase jump corrupts one word") {
    Rng rng(3);
    const Bits bits = random_bits(2000, rng);
    const auto s = differential_encode(bits, qpsk);
    RVectorXd phase = RVectorXd::Zero(s.size());
    phase.tail(s.size() - 500).setConstant(kPi / 2);
    const auto rx = differential_demod(rotate(s, phase), qpsk);
    Index errors_outside = 0, errors_at = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      const bool wrong = bits[i] != rx[i];
      if (i / 2 == 499) errors_at += wrong;
      else errors_outside += wrong;
    }
    CHECK(errors_outside == 0);
    CHECK(errors_at >= 1);
  }
  SUBCASE("constant offset is irrelevant") {
    Rng rng(4);
    const Bits bits = random_bits(1000, rng);
    const auto s = differential_encode(bits, qpsk);
    CHECK(differential_demod(rotate(s, RVectorXd::Constant(s.size(), 2.5)), qpsk) == bits);
  }
  SUBCASE("too short") { CHECK_THROWS_AS(differential_demod(CVectorXd::Ones(1).eval(), qpsk), ShapeError); }
}

TEST_CASE("m-th power removes the modulation") {
  for (int m : {2, 4, 8}) {
    const PskModulation mod(m);
    for (const auto& p : mod.points()) {
      CHECK(std::abs(mth_power(p, m) - 1.0) < 1e-12);
      const double phi = 0.1;
      CHECK(std::abs(mth_power(p * std::polar(1.0, phi), m) - std::polar(1.0, m * phi)) < 1e-12);
    }
  }
}

TEST_CASE("block and window estimators on a constant offset") {
  const PskModulation qpsk(4);
  const CVectorXd s = test::random_psk(1000, 4, 5);
  for (double phi0 : {0.0, 0.2, -0.6}) {
    const auto x = rotate(s, RVectorXd::Constant(s.size(), phi0));
    for (int nb : {1, 7, 11}) {
      const auto r = bwa_cpe(x, qpsk, nb);
      CHECK((r.block_phase.array() - phi0).abs().maxCoeff() < 1e-12);
      CHECK(r.block_phase.size() == (1000 + nb - 1) / nb);
    }
    for (int nv : {1, 5, 11}) {
      const auto r = vv_cpe(x, qpsk, nv);
      CHECK((r.phase.array() - phi0).abs().maxCoeff() < 1e-12);
      CHECK(test::rms(r.corrected, s) < 1e-12);
    }
  }
}

TEST_CASE("vv with one-symbol window equals bwa with one-symbol blocks") {
  const PskModulation qpsk(4);
  const CVectorXd s = test::random_psk(5000, 4, 6);
  const auto pn = PhaseNoiseModel::from_sigma(0.08, 1.0 / 28e9, 7);
  const CVectorXd x = add_awgn(rotate(s, wiener_phase(s.size(), pn)), 15.0, 8);
  const auto training = as_span(s, 32);
  const auto a = vv_cpe(x, qpsk, 1, training);
  const auto b = bwa_cpe(x, qpsk, 1, training);
  CHECK((a.phase.array() == b.phase.array()).all());
  CHECK((a.corrected.array() == b.corrected.array()).all());
}

TEST_CASE("even window is rejected") {
  const PskModulation qpsk(4);
  CHECK_THROWS_AS(vv_cpe(CVectorXd::Ones(10).eval(), qpsk, 4), ConfigError);
  CpeConfig cfg;
  cfg.window = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("unwrap") {
  SUBCASE("constant trace is unchanged") {
    const RVectorXd t = RVectorXd::Constant(50, 0.1);
    CHECK((unwrap_phase(t, 4).array() == t.array()).all());
  }
  SUBCASE("a 2pi/m jump is removed") {
    RVectorXd t = RVectorXd::Constant(50, 0.1);
    t.tail(20).array() += 2 * kPi / 4;
    CHECK((unwrap_phase(t, 4).array() - 0.1).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("slow ramp stays monotone") {
    const int m = 4;
    RVectorXd wrapped(100);
    for (Index i = 0; i < 100; ++i) wrapped(i) = std::remainder(i * kPi / (2.0 * m), 2 * kPi / m);
    const auto u = unwrap_phase(wrapped, m);
    for (Index i = 1; i < 100; ++i) CHECK(u(i) - u(i - 1) == doctest::Approx(kPi / (2.0 * m)));
  }
  SUBCASE("anchor picks the ambiguity branch") {
    const RVectorXd t = RVectorXd::Constant(5, 0.1);
    CHECK(unwrap_phase(t, 4, kPi / 2)(0) == doctest::Approx(0.1 + kPi / 2));
  }
}

TEST_CASE("estimator variances follow the closed forms in the slip-free regime") {
  const PskModulation qpsk(4);
  const double sigma = 0.05;
  const int n = 11;
  std::vector<double> vv_mse, bwa_mse;
  for (int seed = 0; seed < 100; ++seed) {
    const CVectorXd s = test::random_psk(4400, 4, stream_seed(20, seed));
    const auto truth = wiener_phase(s.size(), PhaseNoiseModel::from_sigma(sigma, 1.0 / 28e9, stream_seed(21, seed)));
    const auto x = rotate(s, truth);
    const auto training = as_span(s, 32);
    const Index lo = n, hi = s.size() - n;
    const auto vv = vv_cpe(x, qpsk, n, training);
    const auto bwa = bwa_cpe(x, qpsk, n, training);
    vv_mse.push_back(phase_mse(vv.phase.segment(lo, hi - lo), truth.segment(lo, hi - lo)));
    bwa_mse.push_back(phase_mse(bwa.phase.segment(lo, hi - lo), truth.segment(lo, hi - lo)));
  }
  const auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  double mean_bwa_var = 0;
  for (int k = 1; k <= n; ++k) mean_bwa_var += analytics::sigma_bwa_k(sigma, n, k) / n;
  CHECK(median(vv_mse) == doctest::Approx(analytics::sigma_vv(sigma, n)).epsilon(0.1));
  CHECK(median(bwa_mse) == doctest::Approx(mean_bwa_var).epsilon(0.1));
  CHECK(median(vv_mse) < median(bwa_mse));
}

TEST_CASE("differential floor holds at moderate phase noise") {
  const PskModulation qpsk(4);
  const double sigma = 0.3;
  Rng rng(30);
  const Bits bits = random_bits(400000, rng);
  const auto s = differential_encode(bits, qpsk);
  const auto x = rotate(s, wiener_phase(s.size(), PhaseNoiseModel::from_sigma(sigma, 1.0 / 28e9, 31)));
  const auto report = count_ber(bits, differential_demod(x, qpsk));
  const double floor = analytics::ber_floor_differential(4, sigma);
  CHECK(std::abs(report.ber - floor) < 3.0 * test::binomial_sd(floor, 400000.0));
}

TEST_CASE("run_cpe dispatch") {
  const CVectorXd s = test::random_psk(200, 4, 9);
  CpeConfig cfg;
  cfg.method = CpeMethod::Differential;
  auto r = run_cpe(s, cfg);
  CHECK((r.corrected.array() == s.array()).all());
  cfg.method = CpeMethod::Bwa;
  cfg.block_size = 4;
  r = run_cpe(s, cfg);
  CHECK(r.block_phase.size() == 50);
}

}  // TEST_SUITE
