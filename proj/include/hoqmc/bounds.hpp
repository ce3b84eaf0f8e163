#pragma once

// Explicit constants of the main-part and discretization-part bounds, the
// one-dimensional Dick weight sums S_1, S_{2,n} and their tail bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "hoqmc/bernoulli.hpp"
#include "hoqmc/dual.hpp"
#include "hoqmc/error.hpp"
#include "hoqmc/nets.hpp"
#include "hoqmc/walsh.hpp"

namespace hoqmc {

namespace detail {

inline Rational rational_pow(std::uint32_t b, int e) {
  BigInt p = 1;
  for (int i = 0; i < std::abs(e); ++i) p *= b;
  return e >= 0 ? Rational(p) : Rational(BigInt(1), p);
}

// f[j][p] = sum over digit strings of length p of b^-(sum of the j largest
// nonzero positions), positions counted 1..p from the least significant digit.
inline std::vector<std::vector<Rational>> top_position_sums(std::uint32_t b, unsigned alpha, unsigned len) {
  std::vector<std::vector<Rational>> f(alpha, std::vector<Rational>(len + 1));
  for (unsigned p = 0; p <= len; ++p) f[0][p] = rational_pow(b, static_cast<int>(p));
  for (unsigned j = 1; j < alpha; ++j) {
    f[j][0] = 1;
    for (unsigned p = 1; p <= len; ++p) {
      f[j][p] = f[j][p - 1] + Rational(b - 1) * rational_pow(b, -static_cast<int>(p)) * f[j - 1][p - 1];
    }
  }
  return f;
}

}  // namespace detail

// sum_{k with exactly a digits} b^{-mu_alpha(k)}.
inline std::vector<Rational> dick_block_sums(std::uint32_t b, unsigned alpha, unsigned max_digits) {
  if (alpha == 0) throw InvalidInput("alpha must be positive");
  const auto f = detail::top_position_sums(b, alpha, max_digits);
  std::vector<Rational> out(max_digits + 1);
  out[0] = 1;
  for (unsigned a = 1; a <= max_digits; ++a) {
    out[a] = Rational(b - 1) * detail::rational_pow(b, -static_cast<int>(a)) * f[alpha - 1][a - 1];
  }
  return out;
}

// S_{2,n} = sum_{k=0}^{b^n - 1} b^{-mu_alpha(k)}, exact.
inline Rational dick_partial_sum(std::uint32_t b, unsigned alpha, unsigned n) {
  Rational total = 0;
  for (const auto& v : dick_block_sums(b, alpha, n)) total += v;
  return total;
}

// Elementary bound on sum_{k >= b^K} b^{-mu_alpha(k)} for alpha >= 2: the block
// with a digits is at most (b-1) a b^{-a}.
inline double dick_tail_elementary(std::uint32_t b, unsigned alpha, unsigned K) {
  if (alpha < 2) throw InvalidInput("S_1 diverges for alpha < 2");
  const double x = 1.0 / b;
  return (b - 1) * std::pow(x, K + 1) * ((K + 1) - K * x) / ((1 - x) * (1 - x));
}

struct DickSum {
  double lower = 0;  // S_{2,K}
  double upper = 0;  // S_{2,K} + elementary tail
  unsigned digits = 0;
};

// S_1 = sum_{k >= 0} b^{-mu_alpha(k)} enclosed in [lower, upper].
inline DickSum dick_full_sum(std::uint32_t b, unsigned alpha, unsigned K = 64) {
  if (alpha < 2) throw InvalidInput("S_1 diverges for alpha < 2");
  DickSum out;
  out.digits = K;
  out.lower = dick_partial_sum(b, alpha, K).convert_to<double>();
  out.upper = out.lower * (1 + 4 * kUnitRoundoff) + dick_tail_elementary(b, alpha, K);
  return out;
}

// B_{alpha,b} for alpha >= 3.
inline Rational B_alpha_b(unsigned alpha, std::uint32_t b) {
  if (alpha < 3) throw InvalidInput("B_{alpha,b} is defined for alpha >= 3");
  auto prod = [&](unsigned upto) {
    Rational p = 1;
    for (unsigned i = 1; i <= upto; ++i) p *= Rational(b - 1) / (detail::rational_pow(b, static_cast<int>(i)) - 1);
    return p;
  };
  Rational sum = 0;
  for (unsigned v = 1; v <= alpha - 1; ++v) sum += prod(v - 1);
  const Rational bam1 = detail::rational_pow(b, static_cast<int>(alpha - 1));
  sum += (bam1 - 1) / (bam1 - b) * prod(alpha - 1);
  return sum;
}

// The tail bound on S_1 - S_{2,n}: B_{alpha,b}/b^n for alpha >= 3, 2n/b^n for alpha = 2.
inline double dick_tail_bound(std::uint32_t b, unsigned alpha, unsigned n) {
  if (alpha == 2) return 2.0 * n * std::pow(static_cast<double>(b), -static_cast<double>(n));
  return B_alpha_b(alpha, b).convert_to<double>() * std::pow(static_cast<double>(b), -static_cast<double>(n));
}

// Upper bounds on T_{v,n} (1 <= v < alpha) and U_{v,alpha,n} (v >= alpha).
inline double T_bound(unsigned v, unsigned n, std::uint32_t b) {
  if (v == 0) throw InvalidInput("T_{v,n} needs v >= 1");
  double p = 1.0 / (std::pow(static_cast<double>(b), n) * (b - 1));
  for (unsigned i = 1; i < v; ++i) p /= std::pow(static_cast<double>(b), i) - 1;
  return p;
}

inline double U_bound(unsigned v, unsigned alpha, unsigned n, std::uint32_t b) {
  if (v < alpha) throw InvalidInput("U_{v,alpha,n} needs v >= alpha");
  double p = T_bound(alpha, n, b);
  p *= std::pow(1.0 / (std::pow(static_cast<double>(b), alpha - 1) - 1), v - alpha);
  return p;
}

// Largest observed |K_hat_alpha(k, k)| b^{2 mu_alpha(k)} over 0 < k < b^K with
// b^K <= 256 (at least one digit), doubled as a safety margin; memoized per
// (b, alpha).
inline double empirical_decay_constant(std::uint32_t b, unsigned alpha) {
  static std::mutex mutex;
  static std::map<std::pair<std::uint32_t, unsigned>, double> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({b, alpha});
    if (it != cache.end()) return it->second;
  }
  unsigned digits = 1;
  for (std::uint64_t q = b; q * b <= 256; q *= b) ++digits;
  WalshEngine engine{PrimeBase(b), std::max(digits, 1u)};
  const double d = 2.0 * diagonal_decay_profile(engine, alpha, digits).max_ratio;
  std::lock_guard lock(mutex);
  cache[{b, alpha}] = d;
  return d;
}

struct BoundBreakdown {
  Rational A_interp = 0;
  Rational B_interp = 0;
  double G = 0;
  unsigned t = 0;              // order-beta t-value
  unsigned t_prime = 0;        // order-1 t-value
  unsigned t_prime_alpha = 0;  // order-alpha t-value
  double S1 = 0;               // upper enclosure of S_1
  double S1_tail_bound = 0;    // bound on S_1 - S_{2,n}
  double B_alpha_b = 0;        // B_{alpha,b} (alpha >= 3) or 2n/b^n (alpha = 2)
  bool B_alpha_b_is_surrogate = false;
  double decay_constant = 0;  // empirical D_{alpha,b}
  double main_part_explicit = 0;
  double main_part_bound = 0;
  double discretization_explicit = 0;
  double dual_factor_shape = 0;
  double discretization_bound = 0;
  bool within_hypotheses = true;
  std::vector<std::string> notes;
};

namespace detail {

inline void check_bound_params(const ConstructionParams& p, BoundBreakdown& out) {
  if (p.alpha < 2) throw InvalidInput("alpha must be >= 2");
  if (p.beta < 2) throw InvalidInput("interpolation constants need beta >= 2");
  if (p.alpha > p.beta) throw InvalidInput("interpolation constants need alpha <= beta");
  const auto v = p.theorem_violations();
  out.within_hypotheses = v.empty();
  if (!v.empty()) {
    out.notes.push_back("outside theorem hypotheses");
    for (const auto& s : v) out.notes.push_back(s);
  }
}

}  // namespace detail

// Explicit chain for sum_{k in P^perp \ 0} b^{-2 mu_alpha(k)}, times max{1, D^s}.
inline BoundBreakdown main_part_bound(const ConstructionParams& p, std::optional<double> decay = std::nullopt) {
  BoundBreakdown out;
  detail::check_bound_params(p, out);
  const unsigned gw = p.g * p.w;
  const unsigned half = p.s * (p.beta - 1) / 2;
  const double b = p.b.value();
  out.t = p.beta * std::min(gw, half);
  out.t_prime = std::min(gw, half);
  out.t_prime_alpha = (out.t * p.alpha + p.beta - 1) / p.beta;
  out.A_interp = Rational(p.alpha - 1, p.beta - 1);
  out.B_interp = Rational(p.beta - p.alpha, p.beta - 1);
  const double A = out.A_interp.convert_to<double>();
  const double B = out.B_interp.convert_to<double>();
  if (2 * B <= 1) out.notes.push_back("B_interp <= 1/2: geometric factor diverges");
  out.G = b * std::pow(1 - std::pow(b, -(2 * B - 1)), -static_cast<double>(p.s));
  out.main_part_explicit = out.G * std::pow(b, 2 * A * out.t + 2 * B * out.t_prime) *
                           std::pow(gw + 2.0, p.s - 1.0) / std::pow(b, 2.0 * p.alpha * gw);
  out.decay_constant = decay ? *decay : empirical_decay_constant(p.b.value(), p.alpha);
  out.main_part_bound = std::max(1.0, std::pow(out.decay_constant, p.s)) * out.main_part_explicit;
  out.notes.push_back("decay constant D is empirical");
  return out;
}

// Explicit part (S_1 - S_{2,n}) s S_1^{s-1} of the discretization bound and
// the shape sum_u (n alpha/beta - t' + 2)^{|u| alpha} / b^{n alpha/beta - t'}
// of the dual-net factor with its existence constants set to 1.
inline BoundBreakdown discretization_bound(const ConstructionParams& p, std::optional<double> decay = std::nullopt) {
  BoundBreakdown out = main_part_bound(p, decay);
  const unsigned n = p.n();
  const std::uint32_t b = p.b.value();
  const auto s1 = dick_full_sum(b, p.alpha);
  out.S1 = s1.upper;
  out.S1_tail_bound = dick_tail_bound(b, p.alpha, n);
  if (p.alpha == 2) {
    out.B_alpha_b = out.S1_tail_bound;
    out.B_alpha_b_is_surrogate = true;
  } else {
    out.B_alpha_b = B_alpha_b(p.alpha, b).convert_to<double>();
  }
  out.discretization_explicit = out.S1_tail_bound * p.s * std::pow(out.S1, p.s - 1.0);
  const double expo = static_cast<double>(n) * p.alpha / p.beta - out.t_prime_alpha;
  double shape = 0;
  double binom = 1;
  for (unsigned u = 1; u <= p.s; ++u) {
    binom = binom * (p.s - u + 1) / u;
    shape += binom * std::pow(expo + 2, static_cast<double>(u) * p.alpha);
  }
  out.dual_factor_shape = shape / std::pow(static_cast<double>(b), expo);
  out.discretization_bound =
      std::max(1.0, std::pow(out.decay_constant, p.s)) * out.discretization_explicit * out.dual_factor_shape;
  out.notes.push_back("dual-net factor constants H are existence-only; shape reported with H = 1");
  return out;
}

// sum_{k in P^perp \ 0} b^{-power * mu_alpha(k)} by exhaustive enumeration.
inline double dual_dick_weight_sum(const DigitalNet& net, unsigned alpha, double power = 2.0,
                                   std::uint64_t limit = kDefaultDualLimit) {
  DualNet dual(net);
  const double b = net.base().value();
  double total = 0;
  dual.for_each(limit, [&](std::span<const Elem> k) {
    const unsigned mu = block_metric(k, net.n(), Metric::dick(alpha));
    if (mu > 0) total += std::pow(b, -power * mu);
  });
  return total;
}

}  // namespace hoqmc
