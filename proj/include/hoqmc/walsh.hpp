#pragma once

// b-adic Walsh functions and Walsh coefficients of Bernoulli polynomials and
// of the Sobolev kernel.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <span>
#include <tuple>
#include <vector>

#include "hoqmc/bernoulli.hpp"
#include "hoqmc/digits.hpp"
#include "hoqmc/error.hpp"
#include "hoqmc/ff.hpp"
#include "hoqmc/nets.hpp"

namespace hoqmc {

using Complex = std::complex<double>;

inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

// Digit expansion of a Walsh index together with its nonzero-digit
// decomposition k = kappa_1 b^{a_1 - 1} + ... + kappa_v b^{a_v - 1}, a_1 > ... > a_v.
class WalshIndex {
 public:
  explicit WalshIndex(DigitVector k) : k_(std::move(k)) {
    for (std::size_t i = k_.size(); i-- > 0;) {
      if (k_.digit(i) != 0) {
        positions_.push_back(static_cast<unsigned>(i + 1));
        digits_.push_back(k_.digit(i));
      }
    }
  }
  WalshIndex(PrimeBase b, std::uint64_t k) : WalshIndex(DigitVector::from_integer(b, k)) {}

  const DigitVector& digits_vector() const noexcept { return k_; }
  const PrimeBase& base() const noexcept { return k_.base(); }
  std::span<const unsigned> positions() const noexcept { return positions_; }
  std::span<const Elem> nonzero_digits() const noexcept { return digits_; }
  unsigned leading_position() const noexcept { return positions_.empty() ? 0 : positions_.front(); }

 private:
  DigitVector k_;
  std::vector<unsigned> positions_;
  std::vector<Elem> digits_;
};

// omega_b^e with e taken mod b.
inline Complex root_of_unity(std::uint32_t b, std::uint64_t e) {
  const auto r = e % b;
  if (r == 0) return {1.0, 0.0};
  if (2 * r == b) return {-1.0, 0.0};
  const double theta = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(b);
  return {std::cos(theta), std::sin(theta)};
}

// Per-component rounding error of root_of_unity, generously rounded up.
inline constexpr double kRootError = 32 * kUnitRoundoff;

// Exponent sum kappa_0 xi_1 + kappa_1 xi_2 + ... mod b; x given by its
// digits xi_1, xi_2, ... (most significant first).
inline std::uint64_t walsh_exponent(const DigitVector& k, std::span<const Elem> x_digits) {
  const std::uint32_t b = k.base().value();
  std::uint64_t e = 0;
  const std::size_t len = std::min(k.size(), x_digits.size());
  for (std::size_t i = 0; i < len; ++i) e = (e + static_cast<std::uint64_t>(k.digit(i)) * x_digits[i]) % b;
  return e;
}

inline Complex wal(const DigitVector& k, std::span<const Elem> x_digits) {
  return root_of_unity(k.base().value(), walsh_exponent(k, x_digits));
}

inline Complex wal(const WalshIndex& k, std::span<const Elem> x_digits) { return wal(k.digits_vector(), x_digits); }

inline Complex wal_multi(const MultiIndex& k, const NetPoint& x) {
  if (k.dimension() != x.coords.size()) {
    throw InvalidInput("wal_multi: index dimension " + std::to_string(k.dimension()) + " != point dimension " +
                       std::to_string(x.coords.size()));
  }
  if (k.dimension() > 0) require_same_base(k[0].base(), x.base);
  std::uint64_t e = 0;
  const std::uint32_t b = x.base.value();
  for (std::size_t j = 0; j < k.dimension(); ++j) e = (e + walsh_exponent(k[j], x.coords[j])) % b;
  return root_of_unity(b, e);
}

struct WalshCoefficient {
  Complex value{0.0, 0.0};
  double abs_error = 0.0;
};

inline WalshCoefficient conj(const WalshCoefficient& a) { return {std::conj(a.value), a.abs_error}; }

inline WalshCoefficient operator*(const WalshCoefficient& a, const WalshCoefficient& b) {
  const double ma = std::abs(a.value), mb = std::abs(b.value);
  const Complex v = a.value * b.value;
  const double err = ma * b.abs_error + mb * a.abs_error + a.abs_error * b.abs_error + 4 * kUnitRoundoff * ma * mb;
  return {v, err * (1 + 4 * kUnitRoundoff)};
}

inline WalshCoefficient operator+(const WalshCoefficient& a, const WalshCoefficient& b) {
  const Complex v = a.value + b.value;
  return {v, (a.abs_error + b.abs_error + 2 * kUnitRoundoff * std::abs(v)) * (1 + 4 * kUnitRoundoff)};
}

inline WalshCoefficient operator-(const WalshCoefficient& a) { return {-a.value, a.abs_error}; }

namespace detail {

// Neumaier-compensated complex accumulator that also tracks sum |term|.
class ComplexAccumulator {
 public:
  void add(Complex t) {
    add_part(re_, cre_, t.real());
    add_part(im_, cim_, t.imag());
    abs_sum_ += std::fabs(t.real()) + std::fabs(t.imag());  // >= |t|
    ++count_;
  }
  Complex value() const { return {re_ + cre_, im_ + cim_}; }
  double abs_sum() const noexcept { return abs_sum_; }
  // Bound on |value() - exact sum of the added (already rounded) terms|.
  double rounding_bound() const {
    const double n = static_cast<double>(count_);
    return 2 * kUnitRoundoff * std::abs(value()) + 4 * (n + 1) * kUnitRoundoff * kUnitRoundoff * abs_sum_;
  }

 private:
  static void add_part(double& s, double& c, double t) {
    const double u = s + t;
    if (std::fabs(s) >= std::fabs(t)) {
      c += (s - u) + t;
    } else {
      c += (t - u) + s;
    }
    s = u;
  }
  double re_ = 0, im_ = 0, cre_ = 0, cim_ = 0, abs_sum_ = 0;
  std::uint64_t count_ = 0;
};

inline double rational_to_double(const BigInt& num, const BigInt& den) {
  return Rational(num, den).convert_to<double>();
}

}  // namespace detail

inline constexpr unsigned kDefaultMaxResolution = 16;
inline constexpr std::uint64_t kMaxGridCells = std::uint64_t{1} << 22;
// Finest grid used for the terms of the recursion cross-check.
inline constexpr std::uint64_t kRecursionGridCells = std::uint64_t{1} << 14;

// Walsh coefficients computed from exact piecewise-polynomial integrals on the
// grid of intervals where the Walsh functions are constant. Tables are
// memoized; the caches are filled idempotently so results never depend on
// call order.
class WalshEngine {
 public:
  explicit WalshEngine(PrimeBase base, unsigned max_resolution = kDefaultMaxResolution)
      : base_(base), max_resolution_(max_resolution) {}

  const PrimeBase& base() const noexcept { return base_; }
  unsigned max_resolution() const noexcept { return max_resolution_; }

  // b_hat_r(k) = int_0^1 B_r(x)/r! conj(wal_k(x)) dx.
  WalshCoefficient bernoulli_coeff(unsigned r, std::uint64_t k) {
    detail::check_table_degree(r + 1);
    const unsigned res = digit_count(k, base_.value());
    const auto& pieces = piece_table(r, res);
    const auto& ex = exponents(k, res);
    detail::ComplexAccumulator acc;
    double mag = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      acc.add(std::conj(root(ex[i])) * pieces[i]);
      mag += std::fabs(pieces[i]);
    }
    return {acc.value(), 40 * kUnitRoundoff * mag + acc.rounding_bound()};
  }

  // b_hat_{r,per}(k, l) = int int B~_r(x - y)/r! conj(wal_k(x)) wal_l(y) dx dy.
  WalshCoefficient bernoulli_periodic_coeff(unsigned r, std::uint64_t k, std::uint64_t l) {
    if (r < 2) throw InvalidInput("periodic Bernoulli coefficient needs r >= 2");
    detail::check_table_degree(r + 2);
    const unsigned res = std::max(digit_count(k, base_.value()), digit_count(l, base_.value()));
    const auto conv = convolved(r, l, res);
    const auto& ex = exponents(k, res);
    detail::ComplexAccumulator acc;
    for (std::size_t i = 0; i < ex.size(); ++i) acc.add(std::conj(root(ex[i])) * conv->values[i]);
    return {acc.value(), conv->error + acc.rounding_bound()};
  }

  // K_hat_alpha(k, l) for the one-dimensional kernel.
  WalshCoefficient kernel_coeff(unsigned alpha, std::uint64_t k, std::uint64_t l) {
    if (alpha < 2) throw InvalidInput("kernel smoothness alpha must be >= 2");
    WalshCoefficient total;
    for (unsigned tau = 0; tau <= alpha; ++tau) {
      total = total + bernoulli_coeff(tau, k) * conj(bernoulli_coeff(tau, l));
    }
    const auto per = bernoulli_periodic_coeff(2 * alpha, k, l);
    return total + (alpha % 2 == 1 ? per : -per);
  }

  // K_hat_{alpha,s}(k, l) = prod_j K_hat_alpha(k_j, l_j).
  WalshCoefficient kernel_coeff(unsigned alpha, std::span<const std::uint64_t> k, std::span<const std::uint64_t> l) {
    if (k.size() != l.size()) {
      throw InvalidInput("kernel_coeff: dimension mismatch " + std::to_string(k.size()) + " vs " +
                         std::to_string(l.size()));
    }
    WalshCoefficient prod{{1.0, 0.0}, 0.0};
    for (std::size_t j = 0; j < k.size(); ++j) {
      prod = prod * kernel_coeff(alpha, k[j], l[j]);
      if (prod.value == Complex{0.0, 0.0} && prod.abs_error == 0.0) break;
    }
    return prod;
  }

  // Independent evaluation of b_hat_{r,per}(k, l) for r > 2 and k, l >= 1 by
  // the recursion in r. The c-sum stops at c_max or where the index would need
  // a grid finer than kRecursionGridCells; the geometric tail is folded into
  // abs_error.
  WalshCoefficient periodic_via_recursion(unsigned r, std::uint64_t k, std::uint64_t l, unsigned c_max = 40) {
    if (r <= 2) throw InvalidInput("recursion applies for r > 2");
    if (k == 0 || l == 0) throw InvalidInput("recursion applies for k, l >= 1");
    const std::uint32_t b = base_.value();
    const unsigned a1 = digit_count(k, b);
    std::uint64_t top = 1;
    for (unsigned i = 1; i < a1; ++i) top *= b;
    const auto kappa1 = static_cast<Elem>(k / top);
    const std::uint64_t k_rest = k - kappa1 * top;

    const Complex w = root_of_unity(b, b - kappa1);  // omega^{-kappa_1}
    const double lead_err = 64 * kUnitRoundoff;
    WalshCoefficient first{1.0 / (1.0 - w), lead_err / std::norm(1.0 - w)};
    WalshCoefficient second{0.5 + 1.0 / (w - 1.0), lead_err / std::norm(w - 1.0)};
    WalshCoefficient sum = first * bernoulli_periodic_coeff(r - 1, k_rest, l) +
                           second * bernoulli_periodic_coeff(r - 1, k, l);

    unsigned res_cap = 0;
    for (std::uint64_t q = b; q <= kRecursionGridCells && res_cap < max_resolution_; q *= b) ++res_cap;
    const unsigned c_limit = std::min<unsigned>(c_max, res_cap > a1 ? res_cap - a1 : 0);
    double inv_root_sum = 0;
    std::uint64_t scale = top;
    double bc = 1.0;
    for (unsigned c = 1; c <= c_limit; ++c) {
      scale *= b;
      bc *= b;
      for (Elem theta = 1; theta < b; ++theta) {
        const Complex d = root_of_unity(b, theta) - 1.0;
        WalshCoefficient factor{1.0 / (bc * d), lead_err / (bc * std::norm(d))};
        sum = sum + factor * bernoulli_periodic_coeff(r - 1, theta * scale + k, l);
      }
    }
    for (Elem theta = 1; theta < b; ++theta) inv_root_sum += 1.0 / std::abs(root_of_unity(b, theta) - 1.0);
    // |b_hat_{r-1,per}| <= sup |B_{r-1}| / (r-1)!, and sum_{c > C} b^{-c} = b^{-C}/(b-1).
    const double sup = bernoulli_abs_coefficient_sum(r - 1) / factorial_double(r - 1);
    const double tail = sup * inv_root_sum * std::pow(static_cast<double>(b), -static_cast<double>(c_limit)) /
                        static_cast<double>(b - 1);
    const double inv_ba1 = std::pow(static_cast<double>(b), -static_cast<double>(a1));
    return {-sum.value * inv_ba1, (sum.abs_error + tail) * inv_ba1 * (1 + 4 * kUnitRoundoff)};
  }

  void clear_cache() {
    std::unique_lock lock(mutex_);
    pieces_.clear();
    rects_.clear();
    exponents_.clear();
    convolved_.clear();
  }

 private:
  struct Convolved {
    std::vector<Complex> values;
    double error = 0;  // bound on sum_i |error in values[i]| plus term rounding
  };

  std::uint64_t cells(unsigned res) const {
    if (res > max_resolution_) {
      throw GuardExceeded("Walsh grid resolution", res, max_resolution_);
    }
    std::uint64_t q = 1;
    for (unsigned i = 0; i < res; ++i) {
      q *= base_.value();
      if (q > kMaxGridCells) throw GuardExceeded("Walsh grid cells", static_cast<long double>(q), kMaxGridCells);
    }
    return q;
  }

  Complex root(std::uint32_t e) const { return root_of_unity(base_.value(), e); }

  template <class Key, class Value, class Make>
  const Value& memo(std::map<Key, std::unique_ptr<Value>>& cache, const Key& key, Make&& make) {
    {
      std::shared_lock lock(mutex_);
      auto it = cache.find(key);
      if (it != cache.end()) return *it->second;
    }
    auto fresh = std::make_unique<Value>(make());
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache.try_emplace(key, std::move(fresh));
    return *it->second;
  }

  // pieces[c] = int over [c/q, (c+1)/q) of B_r(x)/r!, q = b^res.
  const std::vector<double>& piece_table(unsigned r, unsigned res) {
    return memo(pieces_, std::pair{r, res}, [&] {
      const std::uint64_t q = cells(res);
      const ScaledBernoulli poly(r + 1, q);
      const BigInt den = poly.scale() * numerator(factorial(r + 1));
      std::vector<double> out(q);
      BigInt prev = poly.numerator_at(0);
      for (std::uint64_t c = 0; c < q; ++c) {
        BigInt next = poly.numerator_at(BigInt(c + 1));
        out[c] = detail::rational_to_double(next - prev, den);
        prev = std::move(next);
      }
      return out;
    });
  }

  // rect[delta] = int over x in [delta/q, (delta+1)/q), y in [0, b^{-d}) of
  // B~_r(x - y)/r!, via the periodic second antiderivative F = B~_{r+2}/(r+2)!.
  const std::vector<double>& rect_table(unsigned r, unsigned res, unsigned d) {
    return memo(rects_, std::tuple{r, res, d}, [&] {
      const std::uint64_t q = cells(res);
      std::uint64_t big_l = 1;
      for (unsigned i = d; i < res; ++i) big_l *= base_.value();
      const ScaledBernoulli poly(r + 2, q);
      std::vector<BigInt> f(q);
      for (std::uint64_t c = 0; c < q; ++c) f[c] = poly.numerator_at(BigInt(c));
      const BigInt den = poly.scale() * numerator(factorial(r + 2));
      auto at = [&](std::int64_t c) -> const BigInt& {
        const auto qi = static_cast<std::int64_t>(q);
        return f[static_cast<std::size_t>(((c % qi) + qi) % qi)];
      };
      std::vector<double> out(q);
      const auto li = static_cast<std::int64_t>(big_l);
      for (std::uint64_t delta = 0; delta < q; ++delta) {
        const auto di = static_cast<std::int64_t>(delta);
        BigInt v = at(di + 1) - at(di) - at(di + 1 - li) + at(di - li);
        out[delta] = detail::rational_to_double(v, den);
      }
      return out;
    });
  }

  // exps[i] = exponent of wal_k on cell i of the b^res grid.
  const std::vector<std::uint32_t>& exponents(std::uint64_t k, unsigned res) {
    return memo(exponents_, std::pair{k, res}, [&] {
      const std::uint64_t q = cells(res);
      const std::uint32_t b = base_.value();
      std::vector<Elem> kd;
      for (std::uint64_t t = k; t > 0; t /= b) kd.push_back(static_cast<Elem>(t % b));
      std::vector<std::uint32_t> out(q, 0);
      // xi_{t+1} is digit (res - 1 - t) of the cell number.
      std::vector<Elem> cell_digits(res, 0);
      for (std::uint64_t i = 0; i < q; ++i) {
        std::uint64_t e = 0;
        for (std::size_t t = 0; t < kd.size(); ++t) e += static_cast<std::uint64_t>(kd[t]) * cell_digits[res - 1 - t];
        out[i] = static_cast<std::uint32_t>(e % b);
        for (unsigned p = 0; p < res; ++p) {
          if (++cell_digits[p] < b) break;
          cell_digits[p] = 0;
        }
      }
      return out;
    });
  }

  // V_l[i] = sum_J wal_l(J) rect[(i - J L) mod q]: the y-integral against wal_l
  // on every x-cell, where l is constant on the b^{d_1} coarse y-cells.
  std::shared_ptr<const Convolved> convolved(unsigned r, std::uint64_t l, unsigned res) {
    const auto key = std::tuple{r, l, res};
    {
      std::shared_lock lock(mutex_);
      auto it = convolved_.find(key);
      if (it != convolved_.end()) return it->second;
    }
    const std::uint32_t b = base_.value();
    const unsigned d1 = digit_count(l, b);
    const std::uint64_t q = cells(res);
    const auto& rect = rect_table(r, res, d1);
    const auto& lex = exponents(l, d1);
    std::uint64_t big_l = 1;
    for (unsigned i = d1; i < res; ++i) big_l *= b;

    // With i = i_hi L + i_lo, (i - J L) mod q = ((i_hi - J) mod P) L + i_lo,
    // P = b^{d_1}: a cyclic convolution of length P for every i_lo.
    const std::uint64_t period = lex.size();
    std::vector<Complex> roots(period);
    for (std::uint64_t j = 0; j < period; ++j) roots[j] = root(lex[j]);
    std::vector<detail::ComplexAccumulator> acc(q);
    for (std::uint64_t hi = 0; hi < period; ++hi) {
      detail::ComplexAccumulator* out = &acc[hi * big_l];
      for (std::uint64_t j = 0; j < period; ++j) {
        const Complex w = roots[j];
        const double* row = &rect[((hi + period - j) % period) * big_l];
        for (std::uint64_t lo = 0; lo < big_l; ++lo) out[lo].add(w * row[lo]);
      }
    }
    auto conv = std::make_shared<Convolved>();
    conv->values.resize(q);
    double err = 0;
    for (std::uint64_t i = 0; i < q; ++i) {
      const Complex v = acc[i].value();
      conv->values[i] = v;
      err += 40 * kUnitRoundoff * acc[i].abs_sum() + acc[i].rounding_bound() + 40 * kUnitRoundoff * std::abs(v);
    }
    conv->error = err * (1 + 4 * kUnitRoundoff);

    std::unique_lock lock(mutex_);
    if (convolved_.size() > kMaxConvolvedEntries) convolved_.clear();
    auto [it, inserted] = convolved_.try_emplace(key, std::move(conv));
    return it->second;
  }

  static constexpr std::size_t kMaxConvolvedEntries = 1u << 14;

  PrimeBase base_;
  unsigned max_resolution_;
  std::shared_mutex mutex_;
  std::map<std::pair<unsigned, unsigned>, std::unique_ptr<std::vector<double>>> pieces_;
  std::map<std::tuple<unsigned, unsigned, unsigned>, std::unique_ptr<std::vector<double>>> rects_;
  std::map<std::pair<std::uint64_t, unsigned>, std::unique_ptr<std::vector<std::uint32_t>>> exponents_;
  std::map<std::tuple<unsigned, std::uint64_t, unsigned>, std::shared_ptr<const Convolved>> convolved_;
};

namespace detail {

inline std::uint64_t walsh_index_value(const DigitVector& k) {
  auto v = k.to_u64();
  if (!v) throw GuardExceeded("Walsh index digits", static_cast<long double>(k.size()), 64);
  return *v;
}

}  // namespace detail

inline WalshCoefficient walsh_coeff_bernoulli(unsigned r, const DigitVector& k) {
  WalshEngine engine(k.base());
  return engine.bernoulli_coeff(r, detail::walsh_index_value(k));
}

inline WalshCoefficient walsh_coeff_bernoulli_periodic(unsigned r, const DigitVector& k, const DigitVector& l) {
  require_same_base(k.base(), l.base());
  WalshEngine engine(k.base());
  return engine.bernoulli_periodic_coeff(r, detail::walsh_index_value(k), detail::walsh_index_value(l));
}

inline WalshCoefficient kernel_walsh_coeff_1d(unsigned alpha, const DigitVector& k, const DigitVector& l) {
  require_same_base(k.base(), l.base());
  WalshEngine engine(k.base());
  return engine.kernel_coeff(alpha, detail::walsh_index_value(k), detail::walsh_index_value(l));
}

inline WalshCoefficient kernel_walsh_coeff_sd(unsigned alpha, const MultiIndex& k, const MultiIndex& l) {
  if (k.dimension() != l.dimension()) {
    throw InvalidInput("kernel_walsh_coeff_sd: dimension mismatch " + std::to_string(k.dimension()) + " vs " +
                       std::to_string(l.dimension()));
  }
  if (k.dimension() == 0) return {{1.0, 0.0}, 0.0};
  require_same_base(k[0].base(), l[0].base());
  WalshEngine engine(k[0].base());
  std::vector<std::uint64_t> kv, lv;
  for (std::size_t j = 0; j < k.dimension(); ++j) {
    kv.push_back(detail::walsh_index_value(k[j]));
    lv.push_back(detail::walsh_index_value(l[j]));
  }
  return engine.kernel_coeff(alpha, kv, lv);
}

// Largest |K_hat(k, l)| + abs_error over pairs k, l < b^digits with
// kappa(k - l) > 2 alpha; such coefficients vanish identically.
struct SparsityAudit {
  std::uint64_t pairs_checked = 0;
  double max_magnitude = 0;
  std::uint64_t worst_k = 0, worst_l = 0;
};

inline SparsityAudit audit_kernel_sparsity(WalshEngine& engine, unsigned alpha, unsigned digits) {
  const std::uint32_t b = engine.base().value();
  std::uint64_t limit = 1;
  for (unsigned i = 0; i < digits; ++i) limit *= b;
  SparsityAudit audit;
  for (std::uint64_t k = 0; k < limit; ++k) {
    for (std::uint64_t l = 0; l < limit; ++l) {
      if (hamming_weight(digit_sub(k, l, b), b) <= 2 * alpha) continue;
      const auto c = engine.kernel_coeff(alpha, k, l);
      ++audit.pairs_checked;
      const double mag = std::abs(c.value);
      if (mag > audit.max_magnitude) {
        audit.max_magnitude = mag;
        audit.worst_k = k;
        audit.worst_l = l;
      }
    }
  }
  return audit;
}

// Diagonal decay |K_hat_alpha(k, k)| b^{2 mu_alpha(k)}, maximised per block of
// indices with a fixed number of digits.
struct DecayProfile {
  std::vector<double> block_max;  // index a_1 - 1 for a_1 = 1..digits
  double max_ratio = 0;           // empirical D_{alpha,b} over 0 < k < b^digits
};

inline DecayProfile diagonal_decay_profile(WalshEngine& engine, unsigned alpha, unsigned digits) {
  const std::uint32_t b = engine.base().value();
  DecayProfile profile;
  std::uint64_t lo = 1;
  for (unsigned a = 1; a <= digits; ++a) {
    const std::uint64_t hi = lo * b;
    double block = 0;
    for (std::uint64_t k = lo; k < hi; ++k) {
      const auto c = engine.kernel_coeff(alpha, k, k);
      const double ratio =
          (std::abs(c.value) + c.abs_error) * std::pow(static_cast<double>(b), 2.0 * mu_alpha(k, alpha, b));
      block = std::max(block, ratio);
    }
    profile.block_max.push_back(block);
    profile.max_ratio = std::max(profile.max_ratio, block);
    lo = hi;
  }
  return profile;
}

}  // namespace hoqmc
