#include <doctest.h>

#include <sstream>

#include "ocdsp/cpe.hpp"
#include "ocdsp/metrics.hpp"
#include "ocdsp/modulation.hpp"
#include "ocdsp/random.hpp"
#include "ocdsp/signal_io.hpp"
#include "test_support.hpp"

using namespace ocdsp;

TEST_SUITE("core") {

TEST_CASE("bpsk sign convention") {
  const PskModulation bpsk(2);
  const Bits bits{0, 1};
  const auto s = modulate(bits, bpsk);
  CHECK(s(0) == Complex<double>(1, 0));
  CHECK(s(1) == Complex<double>(-1, 0));
}

TEST_CASE("qpsk all-zero words map to 1+0j") {
  const PskModulation qpsk(4);
  const Bits bits(64, 0);
  const auto s = modulate(bits, qpsk);
  for (Index i = 0; i < s.size(); ++i) CHECK(s(i) == Complex<double>(1, 0));
}

TEST_CASE("gray labels of cyclically adjacent points differ in one bit") {
  for (int m : {2, 4, 8, 16}) {
    const PskModulation mod(m);
    for (int k = 0; k < m; ++k) {
      const unsigned a = PskModulation::gray_word(static_cast<unsigned>(k));
      const unsigned b = PskModulation::gray_word(static_cast<unsigned>((k + 1) % m));
      CHECK(__builtin_popcount(a ^ b) == 1);
      CHECK(mod.index_of_word(a) == static_cast<unsigned>(k));
    }
  }
}

TEST_CASE("constellation points have unit modulus") {
  for (int m : {2, 4, 8, 16, 32}) {
    const PskModulation mod(m);
    for (const auto& p : mod.points()) CHECK(std::abs(std::abs(p) - 1.0) <= 2.3e-16);
  }
}

TEST_CASE("modulation order must be a power of two") {
  CHECK_THROWS_AS(PskModulation(3), ConfigError);
  CHECK_THROWS_AS(PskModulation(1), ConfigError);
}

TEST_CASE("modulate rejects partial words") {
  const PskModulation mod(8);
  const Bits bits(7, 0);
  CHECK_THROWS_AS(modulate(bits, mod), ShapeError);
  CHECK_THROWS_AS(differential_encode(bits, mod), ShapeError);
}

TEST_CASE("hard decision inverts modulation on constellation points") {
  for (int m : {2, 4, 8, 16}) {
    const PskModulation mod(m);
    Bits bits;
    for (int k = 0; k < m; ++k) mod.write_word(static_cast<unsigned>(k), bits);
    const auto s = modulate(bits, mod);
    const auto d = hard_decision(s, mod);
    CHECK(d.bits == bits);
    CHECK((d.points - s).norm() == 0.0);
  }
}

TEST_CASE("hard decision nearest neighbour") {
  const PskModulation qpsk(4);
  CVectorXd z(1);
  z(0) = 0.9 * std::polar(1.0, 0.1);
  auto d = hard_decision(z, qpsk);
  CHECK(d.indices[0] == 0);

  // A point exactly between index 0 and index 1.
  z(0) = Complex<double>(1.0, 1.0) / std::sqrt(2.0);
  const double d0 = std::norm(z(0) - qpsk.point(0));
  const double d1 = std::norm(z(0) - qpsk.point(1));
  REQUIRE(d0 == d1);
  d = hard_decision(z, qpsk);
  CHECK(d.indices[0] == 0);
}

TEST_CASE("differential encoding") {
  const PskModulation qpsk(4);
  SUBCASE("zero increments give a constant sequence") {
    const Bits bits(20, 0);
    const auto s = differential_encode(bits, qpsk);
    REQUIRE(s.size() == 11);
    for (Index i = 0; i < s.size(); ++i) CHECK(s(i) == Complex<double>(1, 0));
  }
  SUBCASE("single pi/2 increment steps the phase once") {
    Bits bits(20, 0);
    // Word 01 is the Gray label of index 1 (+pi/2), placed at word 4.
    bits[9] = 1;
    const auto s = differential_encode(bits, qpsk);
    for (Index i = 0; i < s.size(); ++i) {
      const auto expected = i >= 5 ? Complex<double>(0, 1) : Complex<double>(1, 0);
      CHECK(std::abs(s(i) - expected) == 0.0);
    }
  }
  SUBCASE("noiseless round trip is exact for every order") {
    for (int m : {2, 4, 8, 16}) {
      const PskModulation mod(m);
      Rng rng(100 + static_cast<std::uint64_t>(m));
      const Bits bits = random_bits(10000 * static_cast<std::size_t>(mod.bits_per_symbol()), rng);
      const auto s = differential_encode(bits, mod);
      CHECK(differential_demod(s, mod) == bits);
    }
  }
}

TEST_CASE("count_ber") {
  Bits a(1000000, 0);
  Rng rng(7);
  for (auto& b : a) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
  SUBCASE("identical") { CHECK(count_ber(a, a).ber == 0.0); }
  SUBCASE("complemented") {
    Bits b = a;
    for (auto& v : b) v ^= 1u;
    const auto r = count_ber(a, b);
    CHECK(r.ber == 1.0);
    CHECK(r.ci95_halfwidth == 0.0);
  }
  SUBCASE("planted errors") {
    Bits b = a;
    for (std::size_t i = 0; i < 37; ++i) b[i * 27011 + 5] ^= 1u;
    const auto r = count_ber(a, b);
    CHECK(r.bit_errors == 37);
    CHECK(r.ber == doctest::Approx(3.7e-5).epsilon(1e-12));
    CHECK(r.ci95_halfwidth == doctest::Approx(1.96 * std::sqrt(3.7e-5 * (1 - 3.7e-5) / 1e6)).epsilon(1e-12));
  }
  SUBCASE("length mismatch") {
    Bits b(10, 0);
    CHECK_THROWS_AS(count_ber(a, b), ShapeError);
  }
}

TEST_CASE("evm_db") {
  const CVectorXd ref = test::random_psk(100000, 4, 3);
  CHECK(evm_db(ref, ref) == kEvmFloorDb);
  CHECK(evm_db(ref, (1.1 * ref).eval()) == doctest::Approx(-20.0).epsilon(1e-9));
  const CVectorXd noisy = ref + test::random_gaussian(ref.size(), 4, 1e-4);
  CHECK(evm_db(ref, noisy) == doctest::Approx(-40.0).epsilon(0.005));
  CHECK_THROWS_AS(evm_db(CVectorXd::Zero(4).eval(), ref.head(4).eval()), DomainError);
  CHECK_THROWS_AS(evm_db(ref.head(3).eval(), ref.head(4).eval()), ShapeError);
}

TEST_CASE("signal dump round trip is bit exact") {
  DualPolSignalXd s(test::random_gaussian(513, 1), test::random_gaussian(513, 2), 56e9 / 3.0);
  std::stringstream ss;
  write_signal(ss, s);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 16) == "OCDSP-DUALPOL-IQ");
  CHECK(bytes.size() == 16 + bytes.substr(16).find('\n') + 1 + 513 * 32);
  const auto back = read_signal(ss);
  CHECK(back.sample_rate == s.sample_rate);
  CHECK((back.x.array() == s.x.array()).all());
  CHECK((back.y.array() == s.y.array()).all());

  std::stringstream bad("NOT-A-SIGNAL-DUMP\n");
  CHECK_THROWS_AS(read_signal(bad), ShapeError);
}

TEST_CASE("dual-pol signal invariants") {
  CHECK_THROWS_AS(DualPolSignalXd(CVectorXd::Zero(3), CVectorXd::Zero(4), 1.0), ShapeError);
  CHECK_THROWS_AS(DualPolSignalXd(CVectorXd::Zero(3), CVectorXd::Zero(3), 0.0), DomainError);
  CVectorXd bad = CVectorXd::Zero(3);
  bad(1) = {std::nan(""), 0.0};
  CHECK_THROWS_AS(DualPolSignalXd(bad, CVectorXd::Zero(3), 1.0), DomainError);
}

TEST_CASE("stream seeds are distinct and reproducible") {
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) != stream_seed(2, 0));
  Rng a(stream_seed(9, 3)), b(stream_seed(9, 3));
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}

}  // TEST_SUITE
