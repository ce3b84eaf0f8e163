#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "hoqmc/bernoulli.hpp"
#include "hoqmc/dual.hpp"
#include "hoqmc/walsh.hpp"

using namespace hoqmc;

namespace {

std::uint64_t ipow(std::uint64_t b, unsigned e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

// Digits xi_1..xi_len of i / b^len.
std::vector<Elem> cell_digits(std::uint64_t i, std::uint32_t b, unsigned len) {
  std::vector<Elem> d(len);
  for (unsigned p = len; p-- > 0; i /= b) d[p] = static_cast<Elem>(i % b);
  return d;
}

Complex wal_at_cell(std::uint64_t k, std::uint64_t cell, std::uint32_t b, unsigned len) {
  return wal(DigitVector::from_integer(PrimeBase(b), k), cell_digits(cell, b, len));
}

// Midpoint rule on b^len cells for int B_r(x)/r! conj(wal_k(x)) dx.
Complex quad_bernoulli(unsigned r, std::uint64_t k, std::uint32_t b, unsigned len) {
  const std::uint64_t m = ipow(b, len);
  Complex sum = 0;
  for (std::uint64_t i = 0; i < m; ++i) {
    const double x = (i + 0.5) / m;
    sum += bernoulli(r, x) / factorial_double(r) * std::conj(wal_at_cell(k, i, b, len));
  }
  return sum / static_cast<double>(m);
}

double periodic_bernoulli(unsigned r, double x) { return bernoulli(r, x - std::floor(x)); }

// Midpoint rule on the b^len x b^len grid for the periodic coefficient.
Complex quad_periodic(unsigned r, std::uint64_t k, std::uint64_t l, std::uint32_t b, unsigned len) {
  const std::uint64_t m = ipow(b, len);
  std::vector<Complex> wk(m), wl(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    wk[i] = std::conj(wal_at_cell(k, i, b, len));
    wl[i] = wal_at_cell(l, i, b, len);
  }
  std::vector<double> table(2 * m);  // B~_r(d / m)/r! for d = i - j + m
  for (std::uint64_t d = 0; d < 2 * m; ++d) {
    table[d] = periodic_bernoulli(r, (static_cast<double>(d) - static_cast<double>(m)) / m) / factorial_double(r);
  }
  Complex sum = 0;
  for (std::uint64_t i = 0; i < m; ++i) {
    Complex row = 0;
    for (std::uint64_t j = 0; j < m; ++j) row += table[i + m - j] * wl[j];
    sum += wk[i] * row;
  }
  return sum / static_cast<double>(m * m);
}

}  // namespace

TEST(Wal, Examples) {
  const PrimeBase b2(2), b3(3);
  EXPECT_EQ(wal(DigitVector(b2), std::vector<Elem>{1, 0, 1}), Complex(1, 0));
  EXPECT_EQ(wal(DigitVector::from_integer(b2, 1), std::vector<Elem>{1}), Complex(-1, 0));
  const Complex w3 = wal(DigitVector::from_integer(b3, 1), std::vector<Elem>{1});
  EXPECT_NEAR(w3.real(), std::cos(2 * std::numbers::pi / 3), 1e-15);
  EXPECT_NEAR(w3.imag(), std::sin(2 * std::numbers::pi / 3), 1e-15);
}

TEST(Wal, UnitModulus) {
  for (std::uint32_t b : {2u, 3u, 5u, 7u})
    for (std::uint64_t k = 0; k < 200; ++k)
      for (std::uint64_t c = 0; c < 50; ++c) ASSERT_NEAR(std::abs(wal_at_cell(k, c, b, 6)), 1.0, 1e-15);
}

TEST(WalMulti, Examples) {
  const PrimeBase b(2);
  const NetPoint half{b, {{1}, {1}}};
  const std::vector<std::uint64_t> k11{1, 1}, k00{0, 0}, k53{5, 3};
  EXPECT_EQ(wal_multi(MultiIndex::from_integers(b, k00), half), Complex(1, 0));
  EXPECT_EQ(wal_multi(MultiIndex::from_integers(b, k11), half), Complex(1, 0));
  const NetPoint origin{b, {{0, 0, 0}, {0, 0, 0}}};
  EXPECT_EQ(wal_multi(MultiIndex::from_integers(b, k53), origin), Complex(1, 0));
  const std::vector<std::uint64_t> k1{1};
  EXPECT_THROW(wal_multi(MultiIndex::from_integers(b, k1), half), InvalidInput);
}

TEST(Bernoulli, Examples) {
  for (double x : {0.0, 0.3, 0.99}) EXPECT_EQ(bernoulli(0, x), 1.0);
  EXPECT_EQ(bernoulli_exact(1, 0), Rational(-1, 2));
  EXPECT_EQ(bernoulli_exact(4, 0), Rational(-1, 30));
  EXPECT_THROW(bernoulli(17, 0.5), InvalidInput);
}

// Bernoulli numbers B_r = B_r(0) against the standard table.
TEST(Bernoulli, NumbersMatchTable) {
  const std::vector<Rational> table{Rational(1),         Rational(-1, 2), Rational(1, 6),  Rational(0),
                                    Rational(-1, 30),    Rational(0),     Rational(1, 42), Rational(0),
                                    Rational(-1, 30),    Rational(0),     Rational(5, 66), Rational(0),
                                    Rational(-691, 2730), Rational(0),    Rational(7, 6),  Rational(0),
                                    Rational(-3617, 510)};
  for (unsigned r = 0; r < table.size(); ++r) EXPECT_EQ(bernoulli_exact(r, 0), table[r]) << r;
}

// B_r(x + 1) - B_r(x) = r x^(r-1) and zero mean on [0, 1].
TEST(Bernoulli, DifferenceIdentityAndZeroMean) {
  for (unsigned r = 1; r <= kMaxBernoulliDegree; ++r) {
    for (int num : {-3, 0, 1, 5, 7}) {
      const Rational x(num, 7);
      Rational pw = 1;
      for (unsigned i = 1; i < r; ++i) pw *= x;
      EXPECT_EQ(bernoulli_exact(r, x + 1) - bernoulli_exact(r, x), Rational(r) * pw);
    }
    // int_0^1 B_r = (B_{r+1}(1) - B_{r+1}(0)) / (r+1)
    EXPECT_EQ(bernoulli_exact(r + 1, 1) - bernoulli_exact(r + 1, 0), 0);
    EXPECT_NEAR(bernoulli(r, 0.37), bernoulli_exact(r, Rational(37, 100)).convert_to<double>(), 1e-12);
  }
}

TEST(ScaledBernoulli, MatchesExactValues) {
  for (unsigned r : {2u, 5u, 9u})
    for (std::uint64_t q : {7u, 32u}) {
      const ScaledBernoulli poly(r, q);
      for (std::int64_t c = -3; c < static_cast<std::int64_t>(2 * q); c += 2) {
        EXPECT_EQ(Rational(poly.numerator_at(c), poly.scale()), bernoulli_exact(r, Rational(c, q)));
        EXPECT_EQ(Rational(poly.periodic_numerator_at(c), poly.scale()),
                  bernoulli_periodic_exact(r, Rational(c, static_cast<std::int64_t>(q))));
      }
    }
}

TEST(BernoulliCoeff, Examples) {
  const PrimeBase b(2);
  auto c00 = walsh_coeff_bernoulli(0, DigitVector(b));
  EXPECT_NEAR(c00.value.real(), 1.0, c00.abs_error + 1e-15);
  for (unsigned r = 1; r <= 8; ++r) EXPECT_LE(std::abs(walsh_coeff_bernoulli(r, DigitVector(b)).value), 1e-15);
  auto c = walsh_coeff_bernoulli(1, DigitVector::from_integer(b, 1));
  EXPECT_NEAR(c.value.real(), -0.25, 1e-15);
  EXPECT_NEAR(c.value.imag(), 0.0, 1e-15);
  EXPECT_GE(c.abs_error, 0.0);
  EXPECT_LT(c.abs_error, 1e-13);
}

TEST(BernoulliCoeff, MatchesQuadrature) {
  for (std::uint32_t b : {2u, 3u, 5u}) {
    WalshEngine engine{PrimeBase(b)};
    const unsigned len = b == 2 ? 12 : (b == 3 ? 8 : 6);
    for (unsigned r = 0; r <= 4; ++r)
      for (std::uint64_t k : {1u, 2u, 3u, 7u, 11u, 24u}) {
        const auto c = engine.bernoulli_coeff(r, k);
        const auto q = quad_bernoulli(r, k, b, len);
        EXPECT_NEAR(c.value.real(), q.real(), 1e-6) << b << " " << r << " " << k;
        EXPECT_NEAR(c.value.imag(), q.imag(), 1e-6) << b << " " << r << " " << k;
      }
  }
}

TEST(PeriodicCoeff, Examples) {
  const PrimeBase b(2);
  for (unsigned r = 2; r <= 8; ++r) EXPECT_LE(std::abs(walsh_coeff_bernoulli_periodic(r, DigitVector(b), DigitVector(b)).value), 1e-15);
  EXPECT_THROW(walsh_coeff_bernoulli_periodic(1, DigitVector(b), DigitVector(b)), InvalidInput);

  const auto c = walsh_coeff_bernoulli_periodic(2, DigitVector::from_integer(b, 1), DigitVector::from_integer(b, 1));
  const auto q = quad_periodic(2, 1, 1, 2, 12);
  EXPECT_NEAR(c.value.real(), q.real(), 1e-6);
  EXPECT_NEAR(c.value.imag(), 0.0, 1e-12);
}

TEST(PeriodicCoeff, MatchesQuadratureBase3) {
  WalshEngine engine{PrimeBase(3)};
  for (auto [r, k, l] : {std::tuple{2u, 1u, 1u}, std::tuple{3u, 2u, 1u}, std::tuple{4u, 5u, 7u}, std::tuple{2u, 4u, 3u}}) {
    const auto c = engine.bernoulli_periodic_coeff(r, k, l);
    const auto q = quad_periodic(r, k, l, 3, 7);
    EXPECT_NEAR(c.value.real(), q.real(), 1e-6);
    EXPECT_NEAR(c.value.imag(), q.imag(), 1e-6);
  }
}

// kappa(k - l) > r forces b_hat_{r,per}(k, l) = 0.
TEST(PeriodicCoeff, VanishesForLargeDigitDistance) {
  for (std::uint32_t b : {2u, 3u}) {
    WalshEngine engine{PrimeBase(b)};
    const std::uint64_t top = ipow(b, b == 2 ? 6 : 4);
    unsigned checked = 0;
    for (unsigned r = 2; r <= 4; ++r)
      for (std::uint64_t k = 0; k < top; ++k)
        for (std::uint64_t l = 0; l < top; ++l) {
          if (hamming_weight(digit_sub(k, l, b), b) <= r) continue;
          const auto c = engine.bernoulli_periodic_coeff(r, k, l);
          ASSERT_LE(std::abs(c.value), c.abs_error + 1e-15) << b << " " << r << " " << k << " " << l;
          ++checked;
        }
    EXPECT_GT(checked, 0u);
  }
}

// More than tau nonzero digits in k forces b_hat_tau(k) = 0.
TEST(BernoulliCoeff, VanishesBeyondDigitCount) {
  for (std::uint32_t b : {2u, 3u}) {
    WalshEngine engine{PrimeBase(b)};
    for (unsigned alpha = 2; alpha <= 3; ++alpha)
      for (std::uint64_t k = 0; k < ipow(b, 7); ++k) {
        if (hamming_weight(k, b) <= alpha) continue;
        for (unsigned tau = 0; tau <= alpha; ++tau) {
          const auto c = engine.bernoulli_coeff(tau, k);
          ASSERT_LE(std::abs(c.value), c.abs_error + 1e-15) << k << " " << tau;
        }
      }
  }
}

TEST(PeriodicCoeff, RecursionAgreesWithDirectPath) {
  for (std::uint32_t b : {2u, 3u, 5u}) {
    WalshEngine engine{PrimeBase(b)};
    for (unsigned r = 3; r <= 6; ++r)
      for (std::uint64_t k : {1u, 2u, 5u, 9u})
        for (std::uint64_t l : {1u, 3u, 4u}) {
          const auto direct = engine.bernoulli_periodic_coeff(r, k, l);
          const auto rec = engine.periodic_via_recursion(r, k, l);
          EXPECT_LE(std::abs(direct.value - rec.value), direct.abs_error + rec.abs_error)
              << b << " " << r << " " << k << " " << l;
        }
  }
}

TEST(KernelCoeff, Examples) {
  const PrimeBase b(2);
  for (unsigned alpha = 2; alpha <= 4; ++alpha) {
    const auto c = kernel_walsh_coeff_1d(alpha, DigitVector(b), DigitVector(b));
    EXPECT_NEAR(c.value.real(), 1.0, c.abs_error + 1e-15);
  }
  const std::vector<std::uint64_t> z{0, 0};
  const auto z2 = MultiIndex::from_integers(b, z);
  EXPECT_NEAR(kernel_walsh_coeff_sd(2, z2, z2).value.real(), 1.0, 1e-14);
  // one coordinate pair with kappa(k_j - l_j) > 2 alpha
  const std::vector<std::uint64_t> k{31, 1}, l{0, 1};
  EXPECT_LE(std::abs(kernel_walsh_coeff_sd(2, MultiIndex::from_integers(b, k), MultiIndex::from_integers(b, l)).value),
            1e-12);
  EXPECT_THROW(kernel_walsh_coeff_sd(2, z2, MultiIndex::from_integers(b, std::vector<std::uint64_t>{0})), InvalidInput);
}

TEST(KernelCoeff, SparsityAndConjugateSymmetry) {
  for (std::uint32_t b : {2u, 3u}) {
    WalshEngine engine{PrimeBase(b)};
    const unsigned digits = b == 2 ? 6 : 5;
    const auto audit = audit_kernel_sparsity(engine, 2, digits);
    EXPECT_GT(audit.pairs_checked, 0u);
    EXPECT_LT(audit.max_magnitude, 1e-10);
    for (std::uint64_t k = 0; k < ipow(b, 3); ++k)
      for (std::uint64_t l = 0; l < ipow(b, 3); ++l) {
        const auto a = engine.kernel_coeff(2, k, l), c = engine.kernel_coeff(2, l, k);
        ASSERT_LE(std::abs(a.value - std::conj(c.value)), a.abs_error + c.abs_error);
      }
  }
}

TEST(KernelCoeff, SparsityInTwoDimensions) {
  WalshEngine engine{PrimeBase(2)};
  unsigned checked = 0;
  for (std::uint64_t k1 = 0; k1 < 64; k1 += 3)
    for (std::uint64_t l1 = 0; l1 < 64; l1 += 5)
      for (std::uint64_t k2 = 0; k2 < 16; k2 += 3)
        for (std::uint64_t l2 = 0; l2 < 16; l2 += 7) {
          if (hamming_weight(digit_sub(k1, l1, 2), 2) <= 4) continue;
          const std::uint64_t k[2]{k1, k2}, l[2]{l1, l2};
          ASSERT_LT(std::abs(engine.kernel_coeff(2, k, l).value), 1e-10);
          ++checked;
        }
  EXPECT_GT(checked, 0u);
}

TEST(KernelCoeff, DiagonalDecayIsBounded) {
  WalshEngine engine{PrimeBase(2)};
  const auto profile = diagonal_decay_profile(engine, 2, 8);
  ASSERT_EQ(profile.block_max.size(), 8u);
  EXPECT_TRUE(std::isfinite(profile.max_ratio));
  EXPECT_LE(profile.block_max.back(), profile.block_max[2] * 1.01);
}

TEST(KernelCoeff, ConcurrentEvaluationIsDeterministic) {
  WalshEngine engine{PrimeBase(3)};
  std::vector<Complex> serial;
  for (std::uint64_t k = 0; k < 81; ++k) serial.push_back(engine.kernel_coeff(3, k, (k * 7) % 81).value);
  engine.clear_cache();
  std::vector<Complex> parallel(81);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (std::uint64_t k = t; k < 81; k += 4) parallel[k] = engine.kernel_coeff(3, k, (k * 7) % 81).value;
    });
  for (auto& th : pool) th.join();
  EXPECT_EQ(serial, parallel);
}

// (1/b^m) sum over the grid h/b^m of wal_k conj(wal_l) is delta_{k,l}.
TEST(WalshSystem, OrthonormalOnFullGrid) {
  const std::uint32_t b = 3;
  const unsigned m = 3;
  const std::uint64_t q = ipow(b, m);
  for (std::uint64_t k = 0; k < q; ++k)
    for (std::uint64_t l = 0; l < q; ++l) {
      Complex sum = 0;
      for (std::uint64_t h = 0; h < q; ++h) sum += wal_at_cell(k, h, b, m) * std::conj(wal_at_cell(l, h, b, m));
      sum /= static_cast<double>(q);
      ASSERT_NEAR(std::abs(sum - Complex(k == l ? 1.0 : 0.0, 0.0)), 0.0, 1e-12);
    }
}

// The average of wal_k over a digital net is 1 on P^perp and 0 elsewhere.
TEST(WalshSystem, CharacterPropertyOnNets) {
  const auto betas = ConstructionParams::default_betas(2);
  for (const auto& net : {chen_skriganov(PrimeBase(3), 2, 1, 2, betas), interlace_net(chen_skriganov(PrimeBase(2), 2, 1, 2, betas), 2)}) {
    const std::uint32_t b = net.base().value();
    const std::uint64_t top = ipow(b, static_cast<unsigned>(net.n()));
    std::vector<NetPoint> pts;
    for_each_point(net, [&](std::uint64_t, const NetPoint& p) { pts.push_back(p); });
    std::vector<std::uint64_t> k(net.s(), 0);
    while (true) {
      const auto mk = MultiIndex::from_integers(net.base(), k);
      Complex avg = 0;
      for (const auto& p : pts) avg += wal_multi(mk, p);
      avg /= static_cast<double>(pts.size());
      ASSERT_NEAR(std::abs(avg - Complex(in_dual(net, mk) ? 1.0 : 0.0, 0.0)), 0.0, 1e-12);
      std::size_t j = 0;
      for (; j < k.size(); ++j) {
        if (++k[j] < top) break;
        k[j] = 0;
      }
      if (j == k.size()) break;
    }
  }
}
