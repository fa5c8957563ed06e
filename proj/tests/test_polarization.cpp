#include <doctest.h>

#include "ocdsp/channel.hpp"
#include "ocdsp/metrics.hpp"
#include "ocdsp/polarization.hpp"
#include "test_support.hpp"

using namespace ocdsp;

namespace {

struct Link {
  DualPolSignalXd tx;  // 1 sps
  DualPolSignalXd rx;  // 2 sps after the channel
};

Link make_link(Index n_sym, PmdState pmd, double snr_db, std::uint64_t seed) {
  const double rs = 28e9;
  Link l;
  l.tx = DualPolSignalXd(test::random_psk(n_sym, 4, seed), test::random_psk(n_sym, 4, seed + 1), rs);
  DualPolSignalXd up(upsample_ideal(l.tx.x, 2), upsample_ideal(l.tx.y, 2), 2 * rs);
  l.rx = add_awgn(apply_pmd(up, pmd), snr_db, seed + 2);
  return l;
}

// Best EVM over the two tributary assignments, ignoring a common phase per output.
double evm_up_to_ambiguity(const DualPolSignalXd& tx, const DualPolSignalXd& out, Index from) {
  const Index n = out.size() - from;
  const auto aligned = [&](const CVectorXd& ref, const CVectorXd& got) {
    const Complex<double> rot = got.segment(from, n).dot(ref.segment(from, n));
    const CVectorXd fixed = got.segment(from, n) * (rot / std::abs(rot));
    return evm_db(ref.segment(from, n), fixed);
  };
  const double straight = std::max(aligned(tx.x, out.x), aligned(tx.y, out.y));
  const double swapped = std::max(aligned(tx.y, out.x), aligned(tx.x, out.y));
  return std::min(straight, swapped);
}

}  // namespace

TEST_SUITE("polarization") {

TEST_CASE("butterfly passthrough, swap and linearity") {
  const CVectorXd xw = test::random_gaussian(7, 1), yw = test::random_gaussian(7, 2);
  auto t = ButterflyTaps<double>::identity(7, 1e-3);
  auto out = butterfly_apply(xw, yw, t);
  CHECK(out.first == xw(3));
  CHECK(out.second == yw(3));
  std::swap(t.wxx, t.wxy);
  std::swap(t.wyx, t.wyy);
  out = butterfly_apply(xw, yw, t);
  CHECK(out.first == yw(3));
  CHECK(out.second == xw(3));

  ButterflyTaps<double> r{test::random_gaussian(7, 3), test::random_gaussian(7, 4), test::random_gaussian(7, 5),
                          test::random_gaussian(7, 6), 1e-3};
  const CVectorXd x2 = test::random_gaussian(7, 7), y2 = test::random_gaussian(7, 8);
  const Complex<double> a(0.3, -1.2), b(2.0, 0.5);
  const auto lhs = butterfly_apply((a * xw + b * x2).eval(), (a * yw + b * y2).eval(), r);
  const auto o1 = butterfly_apply(xw, yw, r), o2 = butterfly_apply(x2, y2, r);
  CHECK(std::abs(lhs.first - (a * o1.first + b * o2.first)) < 1e-12);
  CHECK(std::abs(lhs.second - (a * o1.second + b * o2.second)) < 1e-12);
}

TEST_CASE("tap updates at their fixed points") {
  const CVectorXd xw = test::random_gaussian(5, 1), yw = test::random_gaussian(5, 2);
  const auto t = ButterflyTaps<double>::identity(5, 0.01);
  const auto out = butterfly_apply(xw, yw, t);
  SUBCASE("zero DD-LMS error leaves the taps unchanged") {
    const auto u = ddlms_update(t, xw, yw, out, out);
    CHECK((u.wxx.array() == t.wxx.array()).all());
    CHECK((u.wyx.array() == t.wyx.array()).all());
  }
  SUBCASE("unit-modulus output leaves CMA taps unchanged") {
    const PolPair<double> unit{std::polar(1.0, 0.4), std::polar(1.0, -2.0)};
    const auto u = cma_update(t, xw, yw, unit);
    CHECK((u.wxx - t.wxx).norm() < 1e-15);
    CHECK((u.wyy - t.wyy).norm() < 1e-15);
  }
  SUBCASE("zero step size leaves the taps unchanged") {
    auto z = t;
    z.mu = 0.0;
    const auto u = ddlms_update(z, xw, yw, out, PolPair<double>{1.0, 1.0});
    CHECK((u.wxx.array() == z.wxx.array()).all());
    const auto v = cma_update(z, xw, yw, out);
    CHECK((v.wxy.array() == z.wxy.array()).all());
  }
  SUBCASE("all-zero taps are a degenerate CMA fixed point") {
    auto z = ButterflyTaps<double>::identity(5, 0.01);
    z.wxx.setZero();
    z.wyy.setZero();
    const auto o = butterfly_apply(xw, yw, z);
    const auto u = cma_update(z, xw, yw, o);
    CHECK(u.wxx.norm() == 0.0);
    CHECK(u.wyy.norm() == 0.0);
  }
}

TEST_CASE("identity channel passes through unchanged") {
  const auto l = make_link(2000, {0.0, 0.0}, kNoiselessSnr, 10);
  PolEqMode mode;
  mode.algorithm = PolAlgorithm::Cma;
  const auto r = equalize_dualpol(l.rx, 2, mode, ButterflyTaps<double>::identity(7, 1e-3), PskModulation(4));
  CHECK(test::rms(r.symbols.x, l.tx.x) < 1e-12);
  CHECK(test::rms(r.symbols.y, l.tx.y) < 1e-12);
}

TEST_CASE("dd-lms recovers a static rotation with training") {
  const auto l = make_link(20000, {0.0, kPi / 6}, kNoiselessSnr, 20);
  PolEqMode mode;
  mode.algorithm = PolAlgorithm::DdLms;
  mode.training_length = 2000;
  const auto r = equalize_dualpol(l.rx, 2, mode, ButterflyTaps<double>::identity(7, 1e-2), PskModulation(4), &l.tx);
  const Index from = 10000, n = 10000;
  CHECK(evm_db(l.tx.x.segment(from, n), r.symbols.x.segment(from, n)) <= -30.0);
  CHECK(evm_db(l.tx.y.segment(from, n), r.symbols.y.segment(from, n)) <= -30.0);
}

TEST_CASE("dd-lms with dgd at 20 dB snr is error free") {
  const double t = 1.0 / 28e9;
  const auto l = make_link(100000, {0.2 * t, kPi / 6}, 20.0, 30);
  PolEqMode mode;
  mode.algorithm = PolAlgorithm::DdLms;
  mode.training_length = 2000;
  const PskModulation qpsk(4);
  const auto r = equalize_dualpol(l.rx, 2, mode, ButterflyTaps<double>::identity(7, 1e-3), qpsk, &l.tx);
  const Index from = 10000, n = l.tx.size() - from;
  const auto dx = hard_decision(r.symbols.x.segment(from, n), qpsk);
  const auto tx = hard_decision(l.tx.x.segment(from, n), qpsk);
  const auto dy = hard_decision(r.symbols.y.segment(from, n), qpsk);
  const auto ty = hard_decision(l.tx.y.segment(from, n), qpsk);
  CHECK(count_ber(tx.bits, dx.bits).bit_errors == 0);
  CHECK(count_ber(ty.bits, dy.bits).bit_errors == 0);
}

TEST_CASE("cma converges on rotation plus dgd") {
  const double t = 1.0 / 28e9;
  const auto l = make_link(50000, {0.2 * t, kPi / 4}, kNoiselessSnr, 40);
  PolEqMode mode;
  mode.algorithm = PolAlgorithm::Cma;
  const auto r = equalize_dualpol(l.rx, 2, mode, ButterflyTaps<double>::identity(7, 1e-3), PskModulation(4));
  const Index from = 40000;
  CHECK(r.cost.segment(from, 10000).mean() < 1e-2);
  CHECK(evm_up_to_ambiguity(l.tx, r.symbols, from) < -20.0);
}

TEST_CASE("cma resolves a quarter-turn swap up to the usual ambiguity") {
  const auto l = make_link(20000, {0.0, kPi / 2}, kNoiselessSnr, 50);
  PolEqMode mode;
  mode.algorithm = PolAlgorithm::Cma;
  const auto r = equalize_dualpol(l.rx, 2, mode, ButterflyTaps<double>::identity(7, 1e-3), PskModulation(4));
  CHECK(evm_up_to_ambiguity(l.tx, r.symbols, 10000) < -30.0);
}

TEST_CASE("singularity check re-initialises a duplicated row") {
  const auto l = make_link(5000, {0.0, 0.3}, kNoiselessSnr, 60);
  auto taps = ButterflyTaps<double>::identity(7, 1e-3);
  taps.wyx = taps.wxx;
  taps.wyy = taps.wxy;
  CHECK(row_correlation(taps) == doctest::Approx(1.0));
  PolEqMode mode;
  mode.algorithm = PolAlgorithm::Cma;
  const auto r = equalize_dualpol(l.rx, 2, mode, taps, PskModulation(4));
  CHECK(r.singularity_resets >= 1);
  CHECK(evm_up_to_ambiguity(l.tx, r.symbols, 4000) < -20.0);

  auto u = ButterflyTaps<double>::identity(7, 1e-3);
  u.wxy = test::random_gaussian(7, 1);
  orthogonalize_second_row(u);
  CHECK(row_correlation(u) < 1e-12);
}

TEST_CASE("argument checks") {
  const auto l = make_link(100, {0.0, 0.0}, kNoiselessSnr, 70);
  PolEqMode mode;
  mode.algorithm = PolAlgorithm::DdLms;
  mode.training_length = 200;
  CHECK_THROWS_AS(equalize_dualpol(l.rx, 2, mode, ButterflyTaps<double>::identity(3, 1e-3), PskModulation(4), &l.tx),
                  ShapeError);
  mode.algorithm = PolAlgorithm::Cma;
  CHECK_THROWS_AS(equalize_dualpol(l.rx, 3, mode, ButterflyTaps<double>::identity(3, 1e-3), PskModulation(4)),
                  ConfigError);
  CHECK_THROWS_AS(ButterflyTaps<double>::identity(4, 1e-3), ConfigError);
}

}  // TEST_SUITE
