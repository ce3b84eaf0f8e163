#pragma once

// Bernoulli polynomials with exact rational coefficients.

#include <cmath>
#include <cstdint>
#include <mutex>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hoqmc/error.hpp"

namespace hoqmc {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr unsigned kMaxBernoulliDegree = 16;
// Internal tables go further: the kernel needs second antiderivatives of B_{2 alpha}.
inline constexpr unsigned kBernoulliTableDegree = 20;

namespace detail {

// coeffs[r][i] is the coefficient of x^i in B_r. Built from B_0 = 1,
// B_r' = r B_{r-1} and int_0^1 B_r = 0 for r >= 1.
inline const std::vector<std::vector<Rational>>& bernoulli_table() {
  static const std::vector<std::vector<Rational>> table = [] {
    std::vector<std::vector<Rational>> t(kBernoulliTableDegree + 1);
    t[0] = {Rational(1)};
    for (unsigned r = 1; r <= kBernoulliTableDegree; ++r) {
      const auto& prev = t[r - 1];
      std::vector<Rational> cur(r + 1);
      Rational mean = 0;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        cur[i + 1] = Rational(r) * prev[i] / Rational(i + 1);
        mean += cur[i + 1] / Rational(i + 2);
      }
      cur[0] = -mean;
      t[r] = std::move(cur);
    }
    return t;
  }();
  return table;
}

inline void check_table_degree(unsigned r) {
  if (r > kBernoulliTableDegree) throw InvalidInput("Bernoulli degree beyond internal table");
}

}  // namespace detail

inline const std::vector<Rational>& bernoulli_coefficients(unsigned r) {
  detail::check_table_degree(r);
  return detail::bernoulli_table()[r];
}

inline Rational factorial(unsigned r) {
  Rational f = 1;
  for (unsigned i = 2; i <= r; ++i) f *= i;
  return f;
}

inline double factorial_double(unsigned r) {
  double f = 1.0;
  for (unsigned i = 2; i <= r; ++i) f *= i;
  return f;
}

inline Rational bernoulli_exact(unsigned r, const Rational& x) {
  const auto& c = bernoulli_coefficients(r);
  Rational acc = 0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

// 1-periodic extension of B_r.
inline Rational bernoulli_periodic_exact(unsigned r, const Rational& x) {
  BigInt fl = numerator(x) / denominator(x);
  if (x < 0 && fl * denominator(x) != numerator(x)) fl -= 1;
  return bernoulli_exact(r, x - Rational(fl));
}

namespace detail {

inline const std::vector<std::vector<double>>& bernoulli_double_table() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t;
    for (const auto& row : bernoulli_table()) {
      std::vector<double> r;
      for (const auto& c : row) r.push_back(c.convert_to<double>());
      t.push_back(std::move(r));
    }
    return t;
  }();
  return table;
}

}  // namespace detail

// Evaluation in binary64 (Horner). Public degree cap is 16.
inline double bernoulli(unsigned r, double x) {
  if (r > kMaxBernoulliDegree) throw InvalidInput("Bernoulli degree above 16 is not supported");
  const auto& c = detail::bernoulli_double_table()[r];
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

// Sum of |coefficients|: bounds |B_r| on [0, 1] and the Horner rounding scale.
inline double bernoulli_abs_coefficient_sum(unsigned r) {
  double s = 0.0;
  for (const auto& c : bernoulli_coefficients(r)) s += std::fabs(c.convert_to<double>());
  return s;
}

// Exact values B_r(c / q) for integer c, represented as value(c) / scale with
// integer numerators; avoids per-point rational normalisation in hot tables.
class ScaledBernoulli {
 public:
  ScaledBernoulli(unsigned r, std::uint64_t q) : q_(q) {
    const auto& c = bernoulli_coefficients(r);
    BigInt common = 1;
    for (const auto& a : c) common = boost::multiprecision::lcm(common, denominator(a));
    BigInt qpow = 1;
    for (unsigned i = 0; i < r; ++i) qpow *= q;
    scale_ = common * qpow;
    // B_r(c/q) * scale = sum_i a_i * common * c^i * q^(r-i)
    coeffs_.resize(c.size());
    BigInt qp = 1;
    for (std::size_t i = c.size(); i-- > 0;) {
      coeffs_[i] = numerator(c[i]) * (common / denominator(c[i])) * qp;
      qp *= q;
    }
  }

  const BigInt& scale() const noexcept { return scale_; }

  BigInt numerator_at(const BigInt& c) const {
    BigInt acc = 0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * c + coeffs_[i];
    return acc;
  }

  // Periodic extension: c is reduced mod q first.
  BigInt periodic_numerator_at(std::int64_t c) const {
    const auto q = static_cast<std::int64_t>(q_);
    std::int64_t red = c % q;
    if (red < 0) red += q;
    return numerator_at(BigInt(red));
  }

 private:
  std::uint64_t q_;
  BigInt scale_;
  std::vector<BigInt> coeffs_;
};

}  // namespace hoqmc
