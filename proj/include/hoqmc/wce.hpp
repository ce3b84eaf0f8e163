#pragma once

// The Sobolev kernel K_alpha and worst-case errors of QMC rules: exact kernel
// double sums (float and rational) and truncated dual-net Walsh sums.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "hoqmc/bernoulli.hpp"
#include "hoqmc/bounds.hpp"
#include "hoqmc/digits.hpp"
#include "hoqmc/dual.hpp"
#include "hoqmc/error.hpp"
#include "hoqmc/nets.hpp"
#include "hoqmc/walsh.hpp"

namespace hoqmc {

inline void check_alpha(unsigned alpha) {
  if (alpha < 2) throw InvalidInput("kernel smoothness alpha must be >= 2, got " + std::to_string(alpha));
  if (2 * alpha > kMaxBernoulliDegree) throw InvalidInput("alpha above 8 is not supported");
}

inline double kernel_1d(unsigned alpha, double x, double y) {
  check_alpha(alpha);
  if (!(x >= 0 && x <= 1 && y >= 0 && y <= 1)) throw InvalidInput("kernel arguments must lie in [0, 1]");
  double sum = 0;
  for (unsigned r = 0; r <= alpha; ++r) {
    const double f = factorial_double(r);
    sum += bernoulli(r, x) * bernoulli(r, y) / (f * f);
  }
  const double tail = bernoulli(2 * alpha, std::fabs(x - y)) / factorial_double(2 * alpha);
  return alpha % 2 == 1 ? sum + tail : sum - tail;
}

inline double kernel_sd(unsigned alpha, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvalidInput("kernel_sd: dimension mismatch " + std::to_string(x.size()) + " vs " +
                       std::to_string(y.size()));
  }
  double prod = 1;
  for (std::size_t j = 0; j < x.size(); ++j) prod *= kernel_1d(alpha, x[j], y[j]);
  return prod;
}

inline Rational kernel_1d_exact(unsigned alpha, const Rational& x, const Rational& y) {
  check_alpha(alpha);
  Rational sum = 0;
  for (unsigned r = 0; r <= alpha; ++r) {
    const Rational f = factorial(r);
    sum += bernoulli_exact(r, x) * bernoulli_exact(r, y) / (f * f);
  }
  const Rational d = x >= y ? Rational(x - y) : Rational(y - x);
  const Rational tail = bernoulli_exact(2 * alpha, d) / factorial(2 * alpha);
  return alpha % 2 == 1 ? Rational(sum + tail) : Rational(sum - tail);
}

// int_0^1 int_0^1 K_alpha(x, y) dx dy by exact polynomial integration.
inline Rational kernel_unit_integral(unsigned alpha) {
  check_alpha(alpha);
  Rational total = 0;
  for (unsigned r = 0; r <= alpha; ++r) {
    Rational mean = 0;
    const auto& c = bernoulli_coefficients(r);
    for (std::size_t i = 0; i < c.size(); ++i) mean += c[i] / Rational(i + 1);
    const Rational f = factorial(r);
    total += mean * mean / (f * f);
  }
  // int int B_{2 alpha}(|x - y|) = 2 int_0^1 (1 - t) B_{2 alpha}(t) dt
  Rational diag = 0;
  const auto& c = bernoulli_coefficients(2 * alpha);
  for (std::size_t i = 0; i < c.size(); ++i) diag += c[i] * (Rational(1, i + 1) - Rational(1, i + 2));
  diag = 2 * diag / factorial(2 * alpha);
  return alpha % 2 == 1 ? Rational(total + diag) : Rational(total - diag);
}

namespace detail {

inline void assert_unit_integral(unsigned alpha) {
  static std::mutex mutex;
  static std::map<unsigned, bool> verified;
  std::lock_guard lock(mutex);
  if (verified[alpha]) return;
  if (kernel_unit_integral(alpha) != 1) throw std::logic_error("kernel does not integrate to 1");
  verified[alpha] = true;
}

// Bound on the absolute error of one evaluation of kernel_1d, including the
// rounding of its inputs to binary64, and the bound on |K_alpha| itself.
struct KernelErrorModel {
  double eval_error = 0;
  double magnitude = 0;
};

inline KernelErrorModel kernel_error_model(unsigned alpha) {
  const double u = kUnitRoundoff;
  auto scaled = [](unsigned r) { return bernoulli_abs_coefficient_sum(r) / factorial_double(r); };
  double mag = 0, err = 0;
  for (unsigned r = 0; r <= alpha; ++r) {
    const double a = scaled(r);
    mag += a * a;
    err += (4.0 * r + 5) * a * a;
    if (r > 0) err += 2 * scaled(r - 1) * a;
  }
  const double top = scaled(2 * alpha);
  mag += top;
  err += (8.0 * alpha + 5) * top + 3 * scaled(2 * alpha - 1);
  err += (alpha + 2) * mag;
  return {2 * u * err, mag};
}

}  // namespace detail

enum class WceMethod { ExactKernelSum, TruncatedDualSum };

inline std::string to_string(WceMethod m) {
  return m == WceMethod::ExactKernelSum ? "ExactKernelSum" : "TruncatedDualSum";
}

struct WceReport {
  std::uint64_t N = 0;
  double e = 0;
  double e_squared = 0;
  WceMethod method = WceMethod::ExactKernelSum;
  double error_budget = 0;  // bound on |computed e^2 - true e^2|
  std::optional<unsigned> truncation_radius;
  unsigned workers = 1;
  bool rational = false;
  double main_part = 0;    // dual-sum method: the truncated sum itself
  double tail_budget = 0;  // dual-sum method: part of error_budget from k outside the box
};

inline constexpr std::uint64_t kDefaultMaxPoints = std::uint64_t{1} << 14;
inline constexpr std::uint64_t kHardMaxPoints = std::uint64_t{1} << 17;
inline constexpr std::uint64_t kMaxRationalPoints = 1024;
// Coefficient pairs visited by the truncated dual sum.
inline constexpr std::uint64_t kDefaultPairLimit = std::uint64_t{1} << 30;

struct WceOptions {
  unsigned workers = 1;
  bool rational = false;
  std::uint64_t max_points = kDefaultMaxPoints;
  bool allow_large = false;  // lifts max_points up to the hard cap
};

namespace detail {

inline void check_point_guard(std::uint64_t n, const WceOptions& opt) {
  if (n == 0) throw InvalidInput("point set is empty");
  const std::uint64_t cap = opt.allow_large ? std::max(opt.max_points, kHardMaxPoints) : opt.max_points;
  if (n > cap) throw GuardExceeded("points for the O(N^2) kernel sum", n, cap);
  if (opt.rational && n > kMaxRationalPoints) {
    throw GuardExceeded("points for the rational kernel sum", n, kMaxRationalPoints);
  }
}

inline WceReport finish_report(std::uint64_t n, double e2, double budget, unsigned workers) {
  WceReport rep;
  rep.N = n;
  rep.e_squared = e2;
  rep.e = std::sqrt(std::max(0.0, e2));
  rep.error_budget = budget;
  rep.workers = workers;
  return rep;
}

constexpr std::size_t kRowBlock = 64;

// sum_{h, h'} K_{alpha,s}(x_h, x_h') over points stored coordinate-major.
inline WceReport kernel_double_sum(unsigned alpha, std::size_t s, std::size_t n, const std::vector<double>& coords,
                                   unsigned workers) {
  // Per point and coordinate: B_r(x)/r! for r <= alpha.
  std::vector<double> scaled(n * s * (alpha + 1));
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t j = 0; j < s; ++j)
      for (unsigned r = 0; r <= alpha; ++r)
        scaled[(h * s + j) * (alpha + 1) + r] = bernoulli(r, coords[h * s + j]) / factorial_double(r);
  const double top_fact = factorial_double(2 * alpha);
  const double sign = alpha % 2 == 1 ? 1.0 : -1.0;

  auto pair_value = [&](std::size_t h, std::size_t g) {
    double prod = 1;
    for (std::size_t j = 0; j < s; ++j) {
      const double* a = &scaled[(h * s + j) * (alpha + 1)];
      const double* c = &scaled[(g * s + j) * (alpha + 1)];
      double v = 0;
      for (unsigned r = 0; r <= alpha; ++r) v += a[r] * c[r];
      v += sign * bernoulli(2 * alpha, std::fabs(coords[h * s + j] - coords[g * s + j])) / top_fact;
      prod *= v;
    }
    return prod;
  };

  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<ComplexAccumulator> partial(blocks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t blk; (blk = next.fetch_add(1)) < blocks;) {
      ComplexAccumulator acc;
      const std::size_t lo = blk * kRowBlock, hi = std::min(n, lo + kRowBlock);
      for (std::size_t h = lo; h < hi; ++h) {
        acc.add(pair_value(h, h));
        for (std::size_t g = h + 1; g < n; ++g) acc.add(2 * pair_value(h, g));
      }
      partial[blk] = acc;
    }
  };
  workers = std::max(1u, workers);
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  ComplexAccumulator total;
  double rounding = 0;
  for (const auto& p : partial) {
    total.add(p.value());
    rounding += p.rounding_bound();
  }
  rounding += total.rounding_bound();

  const auto model = kernel_error_model(alpha);
  const double sd = static_cast<double>(s);
  const double pair_error = sd * model.eval_error * std::pow(model.magnitude, sd - 1) +
                            (sd + 1) * kUnitRoundoff * std::pow(model.magnitude, sd);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double mean = total.value().real() / nn;
  const double budget = (pair_error + rounding / nn + 4 * kUnitRoundoff * (std::fabs(mean) + 1)) * 1.01;
  return finish_report(n, mean - 1, budget, workers);
}

}  // namespace detail

// e^2 = (1/N^2) sum_{h,h'} K_{alpha,s}(x_h, x_h') - 1 for arbitrary points in [0,1)^s.
inline WceReport wce_exact(std::span<const std::vector<double>> points, unsigned alpha, const WceOptions& opt = {}) {
  check_alpha(alpha);
  if (opt.rational) throw InvalidInput("rational mode needs exact net points");
  detail::check_point_guard(points.size(), opt);
  detail::assert_unit_integral(alpha);
  const std::size_t s = points.front().size();
  std::vector<double> coords;
  coords.reserve(points.size() * s);
  for (const auto& p : points) {
    if (p.size() != s) throw InvalidInput("points differ in dimension");
    for (double x : p) {
      if (!(x >= 0 && x < 1)) throw InvalidInput("point coordinates must lie in [0, 1)");
      coords.push_back(x);
    }
  }
  return detail::kernel_double_sum(alpha, s, points.size(), coords, opt.workers);
}

namespace detail {

// Exact rational double sum: every coordinate is c / b^n, so each kernel value
// is an integer over a common denominator.
inline WceReport kernel_double_sum_rational(unsigned alpha, std::span<const NetPoint> points) {
  const std::size_t n = points.size();
  const std::size_t s = points.front().coords.size();
  const std::uint32_t b = points.front().base.value();
  std::size_t digits = 0;
  for (const auto& p : points)
    for (const auto& c : p.coords) digits = std::max(digits, c.size());
  BigInt q = 1;
  for (std::size_t i = 0; i < digits; ++i) q *= b;
  if (q > BigInt(std::numeric_limits<std::int64_t>::max())) {
    throw GuardExceeded("digits for rational kernel sum", static_cast<long double>(digits), 62);
  }
  const auto qi = q.convert_to<std::uint64_t>();

  std::vector<ScaledBernoulli> polys;
  std::vector<BigInt> dens;  // B_r(c/q)/r! = N_r(c) / dens[r]
  for (unsigned r = 0; r <= 2 * alpha; ++r) {
    polys.emplace_back(r, qi);
    dens.push_back(polys.back().scale() * numerator(factorial(r)));
  }
  BigInt common = 1;
  for (unsigned r = 0; r <= alpha; ++r) common = boost::multiprecision::lcm(common, dens[r] * dens[r]);
  common = boost::multiprecision::lcm(common, dens[2 * alpha]);
  const BigInt top_mult = common / dens[2 * alpha];
  std::vector<BigInt> mult(alpha + 1);
  for (unsigned r = 0; r <= alpha; ++r) mult[r] = common / (dens[r] * dens[r]);

  std::vector<std::int64_t> c(n * s);
  std::vector<BigInt> vals(n * s * (alpha + 1));
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < s; ++j) {
      // numerator() is over b^{len}; rescale to the common denominator q.
      BigInt scale = 1;
      for (std::size_t i = points[h].coords[j].size(); i < digits; ++i) scale *= b;
      const BigInt ch = points[h].numerator(j) * scale;
      c[h * s + j] = ch.convert_to<std::int64_t>();
      for (unsigned r = 0; r <= alpha; ++r) vals[(h * s + j) * (alpha + 1) + r] = polys[r].numerator_at(ch);
    }
  }
  // B_{2 alpha}(|x - y|) values depend only on |c_h - c_g|; memoize them.
  std::unordered_map<std::int64_t, BigInt> top_cache;
  auto top = [&](std::int64_t d) -> const BigInt& {
    auto it = top_cache.find(d);
    if (it == top_cache.end()) it = top_cache.emplace(d, polys[2 * alpha].numerator_at(BigInt(d)) * top_mult).first;
    return it->second;
  };
  const bool odd = alpha % 2 == 1;
  BigInt total = 0;
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t g = h; g < n; ++g) {
      BigInt prod = 1;
      for (std::size_t j = 0; j < s; ++j) {
        BigInt v = 0;
        const BigInt* a = &vals[(h * s + j) * (alpha + 1)];
        const BigInt* e = &vals[(g * s + j) * (alpha + 1)];
        for (unsigned r = 0; r <= alpha; ++r) v += a[r] * e[r] * mult[r];
        const std::int64_t d = std::abs(c[h * s + j] - c[g * s + j]);
        if (odd) {
          v += top(d);
        } else {
          v -= top(d);
        }
        prod *= v;
      }
      total += g == h ? prod : 2 * prod;
    }
  }
  BigInt denom = 1;
  for (std::size_t j = 0; j < s; ++j) denom *= common;
  denom *= BigInt(n) * BigInt(n);
  const Rational e2 = Rational(total, denom) - 1;
  WceReport rep = finish_report(n, e2.convert_to<double>(), 0.0, 1);
  // Only the final conversion to binary64 is inexact.
  rep.error_budget = 2 * kUnitRoundoff * std::fabs(rep.e_squared);
  rep.rational = true;
  return rep;
}

}  // namespace detail

inline WceReport wce_exact(std::span<const NetPoint> points, unsigned alpha, const WceOptions& opt = {}) {
  check_alpha(alpha);
  detail::check_point_guard(points.size(), opt);
  detail::assert_unit_integral(alpha);
  const std::size_t s = points.front().coords.size();
  for (const auto& p : points) {
    if (p.coords.size() != s) throw InvalidInput("points differ in dimension");
    require_same_base(p.base, points.front().base);
  }
  if (opt.rational) return detail::kernel_double_sum_rational(alpha, points);
  std::vector<double> coords;
  coords.reserve(points.size() * s);
  for (const auto& p : points)
    for (std::size_t j = 0; j < s; ++j) coords.push_back(p.to_double(j));
  return detail::kernel_double_sum(alpha, s, points.size(), coords, opt.workers);
}

inline WceReport wce_exact(const DigitalNet& net, unsigned alpha, const WceOptions& opt = {}) {
  check_alpha(alpha);
  const long double size = std::pow(static_cast<long double>(net.base().value()), net.m());
  const std::uint64_t cap = opt.allow_large ? std::max(opt.max_points, kHardMaxPoints) : opt.max_points;
  if (size > static_cast<long double>(cap)) throw GuardExceeded("points for the O(N^2) kernel sum", size, cap);
  std::vector<NetPoint> pts;
  pts.reserve(net.size());
  for_each_point(net, [&](std::uint64_t, const NetPoint& p) { pts.push_back(p); });
  return wce_exact(std::span<const NetPoint>(pts), alpha, opt);
}

// Elements of {k : tr_n(k) in P^perp} with every component below b^radius,
// as integer components (s per element, row-major).
inline std::vector<std::uint64_t> dual_box(const DigitalNet& net, unsigned radius,
                                           std::uint64_t limit = kDefaultDualLimit) {
  const std::uint32_t b = net.base().value();
  const std::size_t s = net.s(), n = net.n();
  if (radius * std::log2(static_cast<double>(b)) > 62) {
    throw GuardExceeded("truncation radius digits", radius, 62 / std::log2(static_cast<double>(b)));
  }
  const unsigned extra = radius > n ? radius - static_cast<unsigned>(n) : 0;
  DualNet dual(net);
  const long double count = dual.cardinality() * std::pow(static_cast<long double>(b), extra * s);
  if (count > static_cast<long double>(limit)) throw GuardExceeded("truncated dual size", count, limit);

  std::uint64_t shift = 1;
  for (std::size_t i = 0; i < n; ++i) shift *= b;
  std::uint64_t high_count = 1;
  for (unsigned i = 0; i < extra; ++i) high_count *= b;

  std::vector<std::uint64_t> out;
  std::vector<std::uint64_t> low(s);
  dual.for_each(limit, [&](std::span<const Elem> k) {
    for (std::size_t j = 0; j < s; ++j) {
      std::uint64_t v = 0;
      for (std::size_t r = n; r-- > 0;) {
        if (r >= radius && k[j * n + r] != 0) return;  // outside the box
        v = v * b + k[j * n + r];
      }
      low[j] = v;
    }
    // Free digits above position n: odometer over high parts.
    std::vector<std::uint64_t> high(s, 0);
    while (true) {
      for (std::size_t j = 0; j < s; ++j) out.push_back(low[j] + high[j] * shift);
      std::size_t j = 0;
      for (; j < s; ++j) {
        if (++high[j] < high_count) break;
        high[j] = 0;
      }
      if (j == s) break;
    }
  });
  return out;
}

namespace detail {

// Weights of the high part H of k = L + b^n H over H >= b^c. Entry v-1
// (1 <= v < alpha) sums b^{-(sum of all positions of H)} over H with exactly v
// nonzero digits; entry alpha-1 sums b^{-mu_alpha(H)} over H with at least
// alpha nonzero digits. Exact rationals except the final S_1 tail.
inline std::vector<double> high_digit_weights(std::uint32_t b, unsigned alpha, unsigned c) {
  // Elementary symmetric sums of (b-1) b^{-i}, i = 1..c.
  std::vector<Rational> e(alpha, Rational(0));
  e[0] = 1;
  for (unsigned i = 1; i <= c; ++i) {
    const Rational x = Rational(b - 1) * rational_pow(b, -static_cast<int>(i));
    for (unsigned v = std::min(i, alpha - 1); v >= 1; --v) e[v] += e[v - 1] * x;
  }
  std::vector<double> out(alpha);
  Rational prod = 1, below = 0;
  for (unsigned v = 1; v < alpha; ++v) {
    prod *= Rational(b - 1) / (rational_pow(b, static_cast<int>(v)) - 1);
    const Rational gap = prod - e[v];
    out[v - 1] = gap.convert_to<double>();
    below += gap;
  }
  const unsigned K = std::max(64u, c);
  const Rational s_gap = dick_partial_sum(b, alpha, K) - dick_partial_sum(b, alpha, c);
  out[alpha - 1] = Rational(s_gap - below).convert_to<double>() + dick_tail_elementary(b, alpha, K);
  return out;
}

}  // namespace detail

// Upper bound on sum over k in the infinite dual net, outside the box of
// dual_box(net, radius), of prod_j b^{-mu_alpha(k_j)}. Every such k is
// L + b^n H with L in P^perp; the sum over H factorizes per coordinate.
inline double dual_tail_weight(const DigitalNet& net, unsigned alpha, unsigned radius,
                               std::uint64_t limit = kDefaultDualLimit) {
  check_alpha(alpha);
  const std::uint32_t b = net.base().value();
  const double bd = b;
  const std::size_t s = net.s(), n = net.n();
  const unsigned c = radius > n ? radius - static_cast<unsigned>(n) : 0;
  const auto full = detail::high_digit_weights(b, alpha, 0);
  const auto rest = c == 0 ? full : detail::high_digit_weights(b, alpha, c);

  auto high = [&](std::span<const Elem> low, const std::vector<double>& wts) {
    double f = 0;
    for (unsigned v = 1; v < alpha; ++v) {
      f += std::pow(bd, -static_cast<double>(v * n + mu_alpha(low, alpha - v))) * wts[v - 1];
    }
    return f + std::pow(bd, -static_cast<double>(alpha * n)) * wts[alpha - 1];
  };

  DualNet dual(net);
  std::vector<double> tot(s), out(s);
  double tail = 0;
  std::uint64_t count = 0;
  dual.for_each(limit, [&](std::span<const Elem> k) {
    ++count;
    bool in_box = true;
    for (std::size_t j = 0; j < s; ++j) {
      const auto low = k.subspan(j * n, n);
      tot[j] = std::pow(bd, -static_cast<double>(mu_alpha(low, alpha))) + high(low, full);
      out[j] = high(low, rest);
      for (std::size_t r = radius; r < n && in_box; ++r) in_box = low[r] == 0;
    }
    double contrib = 0;
    if (!in_box) {
      contrib = 1;
      for (double t : tot) contrib *= t;
    } else {
      // prod tot - prod in <= sum_j out_j prod_{i != j} tot_i
      for (std::size_t j = 0; j < s; ++j) {
        double term = out[j];
        for (std::size_t i = 0; i < s; ++i)
          if (i != j) term *= tot[i];
        contrib += term;
      }
    }
    tail += contrib;
  });
  return tail * (1 + 1e-12 + 8.0 * (static_cast<double>(count) + alpha + s) * kUnitRoundoff);
}

// e^2 ~ sum over k, l in the truncated dual (minus 0) of K_hat_{alpha,s}(k, l).
// The budget covers rounding of every coefficient plus the pairs with some
// component outside the box: with a_k = prod_j sqrt(K_hat(k_j, k_j)) and
// |K_hat(k, l)| <= a_k a_l (positive semidefiniteness), those pairs sum to at
// most T (2A + T), A over the box, T over the dual elements outside it; T is
// bounded through K_hat_alpha(k, k) <= D b^{-2 mu_alpha(k)} with the empirical D
// and dual_tail_weight.
inline WceReport wce_dual_truncated(const DigitalNet& net, unsigned alpha, unsigned radius,
                                    std::uint64_t limit = kDefaultDualLimit,
                                    std::optional<double> decay = std::nullopt) {
  check_alpha(alpha);
  const std::uint32_t b = net.base().value();
  const std::size_t s = net.s();
  const auto box = dual_box(net, radius, limit);
  const std::size_t count = box.size() / s;
  const long double pairs = static_cast<long double>(count) * count;
  if (pairs > static_cast<long double>(kDefaultPairLimit)) {
    throw GuardExceeded("coefficient pairs in the truncated dual sum", pairs, kDefaultPairLimit);
  }

  WalshEngine engine(net.base(), std::max(radius, 1u));
  std::map<std::pair<std::uint64_t, std::uint64_t>, WalshCoefficient> memo;
  auto coeff = [&](std::uint64_t k, std::uint64_t l) {
    auto it = memo.find({k, l});
    if (it != memo.end()) return it->second;
    const auto c = engine.kernel_coeff(alpha, k, l);
    memo.emplace(std::pair{k, l}, c);
    return c;
  };

  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < count; ++i) {
    bool zero = true;
    for (std::size_t j = 0; j < s; ++j) zero = zero && box[i * s + j] == 0;
    if (!zero) nonzero.push_back(i);
  }

  detail::ComplexAccumulator acc;
  double coeff_error = 0;
  double diag_root_sum = 0;  // A
  for (std::size_t ii : nonzero) {
    const std::uint64_t* k = &box[ii * s];
    double a = 1;
    for (std::size_t j = 0; j < s; ++j) {
      const auto c = coeff(k[j], k[j]);
      a *= std::sqrt(std::abs(c.value) + c.abs_error);
    }
    diag_root_sum += a;
    for (std::size_t jj : nonzero) {
      const std::uint64_t* l = &box[jj * s];
      bool sparse = false;
      for (std::size_t j = 0; j < s && !sparse; ++j) {
        sparse = hamming_weight(digit_sub(k[j], l[j], b), b) > 2 * alpha;
      }
      if (sparse) continue;
      WalshCoefficient prod{{1.0, 0.0}, 0.0};
      for (std::size_t j = 0; j < s; ++j) prod = prod * coeff(k[j], l[j]);
      acc.add(prod.value);
      coeff_error += prod.abs_error;
    }
  }

  const double d = decay ? *decay : empirical_decay_constant(b, alpha);
  const double sd = static_cast<double>(s);
  const double outside = dual_tail_weight(net, alpha, radius, limit);
  const double tail = std::pow(std::max(1.0, d), sd / 2) * outside;
  const double a_upper = diag_root_sum * (1 + 1e-12);
  const double tail_budget = tail * (2 * a_upper + tail);

  WceReport rep = detail::finish_report(net.size(), acc.value().real(), 0.0, 1);
  rep.method = WceMethod::TruncatedDualSum;
  rep.truncation_radius = radius;
  rep.main_part = rep.e_squared;
  rep.tail_budget = tail_budget;
  rep.error_budget = (coeff_error + acc.rounding_bound()) * 1.01 + tail_budget;
  return rep;
}

}  // namespace hoqmc
