#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "srlab/dyadic.hpp"
#include "srlab/sr_engine.hpp"

using namespace srlab;

namespace {

double random_double(std::mt19937_64& gen, int exp_span = 40) {
  std::uniform_int_distribution<int> exp(-exp_span, exp_span);
  std::uniform_int_distribution<int> cleared(0, 52);
  std::uint64_t mantissa = (gen() >> 11) | (std::uint64_t{1} << 52);
  mantissa &= ~((std::uint64_t{1} << cleared(gen)) - 1);
  const double sign = gen() & 1 ? -1.0 : 1.0;
  return sign * std::ldexp(static_cast<double>(mantissa), exp(gen) - 52);
}

// Count of draws z in [0, 2^r) for which the result is the value-ceiling.
std::uint64_t enumerate_ups(const Unrounded& x, const SrConfig& cfg) {
  const double hi = round_up(x, cfg.fmt);
  const double lo = round_down(x, cfg.fmt);
  std::uint64_t ups = 0;
  for (std::uint64_t z = 0; z < (std::uint64_t{1} << cfg.random_bits()); ++z) {
    const double v = sr_round_with_bits(x, cfg, z);
    REQUIRE((v == hi || v == lo));
    ups += (v == hi && hi != lo) ? 1 : 0;
  }
  return ups;
}

// Textbook formulation: round up iff U < q_r, with U uniform on the r-bit grid.
template <typename Source>
double sr_by_comparison(double x, const SrConfig& cfg, Source& bits) {
  const DyadicFraction q = dy_q(dy_from_float(x), cfg.fmt.p, cfg.random_bits());
  const BigInt threshold = q.scaled_to(cfg.random_bits());
  const BigInt u = bits.next_bits(cfg.random_bits());
  return u < threshold ? round_up(x, cfg.fmt) : round_down(x, cfg.fmt);
}

}  // namespace

TEST_CASE("config factories and labels") {
  CHECK(SrConfig::stochastic(11, 7).label() == "SR7");
  CHECK(SrConfig::ideal(11).label() == "SRideal");
  CHECK(SrConfig::ideal(11).random_bits() == 42);
  CHECK(SrConfig::nearest(11).label() == "RN");
  CHECK(SrConfig::substrate().label() == "binary64");
  CHECK(SrConfig::stochastic(11, 7).truncation_width() == 18);
  CHECK_THROWS_AS(SrConfig::stochastic(11, 0), std::invalid_argument);
  CHECK_THROWS_AS(SrConfig::stochastic(11, 43), std::invalid_argument);
  CHECK_NOTHROW(SrConfig::stochastic(11, 42));
  CHECK_THROWS_AS(SrConfig::ideal(53), std::invalid_argument);
}

TEST_CASE("q_r on hand examples") {
  CHECK(q_r_numerator(1.3125, SrConfig::stochastic(2, 1)) == 1);
  CHECK(q_r_numerator(1.3125, SrConfig::stochastic(2, 3)) == 5);
  CHECK(q_r_numerator(1.5, SrConfig::stochastic(2, 4)) == 0);
  CHECK(q_r_numerator(-1.3125, SrConfig::stochastic(2, 3)) == 3);
  CHECK(q_r_numerator(-0.8125, SrConfig::stochastic(2, 1)) == 2);
  CHECK(sr_round_with_bits(-0.8125, SrConfig::stochastic(2, 1), 1) == -0.75);
  // r = 1 on 1.3125: fl_3 = 1.25, halfway, so one of the two draws carries.
  const auto cfg = SrConfig::stochastic(2, 1);
  CHECK(sr_round_with_bits(1.3125, cfg, 0) == 1.0);
  CHECK(sr_round_with_bits(1.3125, cfg, 1) == 1.5);
}

TEST_CASE("carry across a binade") {
  const auto cfg = SrConfig::stochastic(3, 2);
  CHECK(sr_round_with_bits(1.9375, cfg, 0) == 1.75);
  CHECK(sr_round_with_bits(1.9375, cfg, 1) == 2.0);
  CHECK(sr_round_with_bits(-1.9375, cfg, 1) == -2.0);
}

TEST_CASE("exhaustive enumeration matches the dyadic oracle") {
  std::mt19937_64 gen(99);
  for (int p : {2, 8, 11, 24}) {
    for (int r = 1; r <= 10; ++r) {
      const auto cfg = SrConfig::stochastic(p, r);
      for (int i = 0; i < 40; ++i) {
        const double x = random_double(gen);
        const BigInt oracle = dy_q(dy_from_float(x), p, r).scaled_to(r);
        REQUIRE(BigInt(q_r_numerator(x, cfg)) == oracle);
        REQUIRE(BigInt(enumerate_ups(x, cfg)) == oracle);
      }
    }
  }
}

TEST_CASE("sign symmetry") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 500; ++i) {
    const double x = std::fabs(random_double(gen));
    const auto cfg = SrConfig::stochastic(8, 5);
    const std::uint64_t z = gen() >> 59;
    // The carry acts on the magnitude, so a draw rounds x and -x alike.
    CHECK(sr_round_with_bits(-x, cfg, z) == -sr_round_with_bits(x, cfg, z));
  }
}

TEST_CASE("comparison formulation has the same law as the carry mechanism") {
  std::mt19937_64 gen(12);
  for (int i = 0; i < 200; ++i) {
    const double x = random_double(gen);
    const auto cfg = SrConfig::stochastic(11, 6);
    std::vector<std::uint64_t> all(64);
    for (std::uint64_t z = 0; z < 64; ++z) {
      all[z] = z;
    }
    ScriptedBits a(all);
    ScriptedBits b(all);
    int ups_carry = 0;
    int ups_compare = 0;
    const double hi = round_up(x, cfg.fmt);
    for (int z = 0; z < 64; ++z) {
      ups_carry += sr_round(x, cfg, a) == hi ? 1 : 0;
      ups_compare += sr_by_comparison(x, cfg, b) == hi ? 1 : 0;
    }
    CHECK(ups_carry == ups_compare);
  }
}

TEST_CASE("every rounding draws exactly once, even when exact") {
  const std::vector<std::uint64_t> draws{1, 2, 3};
  ScriptedBits bits(draws);
  const auto cfg = SrConfig::stochastic(2, 2);
  sr_round(1.5, cfg, bits);
  sr_round(1.3125, cfg, bits);
  CHECK(bits.consumed() == 2);
  CHECK(round_with(1.3, SrConfig::nearest(2), bits) == 1.5);
  CHECK(bits.consumed() == 2);
}

TEST_CASE("exact_op residual signs agree with exact arithmetic") {
  std::mt19937_64 gen(77);
  for (int i = 0; i < 3000; ++i) {
    const double a = random_double(gen, 20);
    const double b = random_double(gen, 20);
    const DyadicValue da = dy_from_float(a);
    const DyadicValue db = dy_from_float(b);

    const Unrounded add = exact_op(Op::Add, a, b);
    REQUIRE(dy_compare(dy_add(da, db), dy_from_float(add.head)) == add.tail);
    const Unrounded sub = exact_op(Op::Sub, a, b);
    REQUIRE(dy_compare(dy_sub(da, db), dy_from_float(sub.head)) == sub.tail);
    const Unrounded mul = exact_op(Op::Mul, a, b);
    REQUIRE(dy_compare(dy_mul(da, db), dy_from_float(mul.head)) == mul.tail);
    // a / b versus q: compare a with q * b, flipping for negative b.
    const Unrounded div = exact_op(Op::Div, a, b);
    const int div_sign = dy_compare(da, dy_mul(dy_from_float(div.head), db)) * (b < 0 ? -1 : 1);
    REQUIRE(div_sign == div.tail);
    const double m = std::fabs(a);
    const Unrounded sq = exact_op(Op::Sqrt, m);
    const DyadicValue s = dy_from_float(sq.head);
    REQUIRE(dy_compare(dy_from_float(m), dy_mul(s, s)) == sq.tail);
  }
}

TEST_CASE("exact_op errors") {
  CHECK_THROWS_AS(exact_op(Op::Div, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(exact_op(Op::Sqrt, -1.0), std::domain_error);
  CHECK_THROWS_AS(exact_op(Op::Add, std::nan(""), 1.0), std::domain_error);
  CHECK_THROWS_AS(exact_op(Op::Mul, 1e300, 1e300), std::range_error);
}

TEST_CASE("operations with stochastic rounding") {
  const auto cfg = SrConfig::stochastic(11, 7);
  // 2048 + 1 sits halfway between 2048 and 2050 at p = 11.
  const std::vector<std::uint64_t> low{63};
  const std::vector<std::uint64_t> high{64};
  ScriptedBits lo_bits(low);
  ScriptedBits hi_bits(high);
  CHECK(sr_op(Op::Add, 2048.0, 1.0, cfg, lo_bits) == 2048.0);
  CHECK(sr_op(Op::Add, 2048.0, 1.0, cfg, hi_bits) == 2050.0);
  RngStream s(1, 0);
  CHECK(sr_op(Op::Mul, 3.0, 5.0, cfg, s) == 15.0);
  CHECK(sr_op(Op::Sqrt, 4.0, 0.0, cfg, s) == 2.0);
  CHECK(rn_op(Op::Add, 2048.0, 1.0, FpFormat(11)) == 2048.0);
  CHECK(rn_op(Op::Add, 2050.0, 1.0, FpFormat(11)) == 2052.0);
}

TEST_CASE("residual below the truncation point still counts") {
  // 1 + 2^-60 is not a double; truncation to p + r bits gives exactly 1, so
  // the up-probability is 0 and the value rounds down to 1.
  const auto cfg = SrConfig::stochastic(11, 7);
  const Unrounded x = exact_op(Op::Add, 1.0, std::ldexp(1.0, -60));
  CHECK(x.tail == 1);
  CHECK(q_r_numerator(x, cfg) == 0);
  CHECK(sr_round_with_bits(x, cfg, 127) == 1.0);
  // Just below 1: q_r = 1 - 2^-7 in magnitude terms, value floor 1 - 2^-11.
  const Unrounded y = exact_op(Op::Sub, 1.0, std::ldexp(1.0, -60));
  CHECK(y.tail == -1);
  CHECK(round_down(y, cfg.fmt) == 1.0 - std::ldexp(1.0, -11));
  CHECK(q_r_numerator(y, cfg) == 127);
}

TEST_CASE("traced records") {
  const auto cfg = SrConfig::stochastic(2, 1);
  const std::vector<std::uint64_t> one{1};
  ScriptedBits bits(one);
  RoundingRecord rec;
  const double v = sr_op(Op::Add, 1.0, 0.3125, cfg, bits, &rec);
  CHECK(v == 1.5);
  CHECK(rec.exact_input == 1.3125);
  CHECK(rec.delta == doctest::Approx((1.5 - 1.3125) / 1.3125));
  CHECK(rec.beta == doctest::Approx((1.25 - 1.3125) / 1.3125));
}
