#pragma once

// Dual nets P^perp, minimum metrics, order-alpha t-value checks and the
// t-value / metric bounds of the interlaced construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hoqmc/digits.hpp"
#include "hoqmc/error.hpp"
#include "hoqmc/ff.hpp"
#include "hoqmc/nets.hpp"

namespace hoqmc {

inline constexpr std::uint64_t kDefaultDualLimit = std::uint64_t{1} << 24;

// P^perp as the kernel of k -> C_1^T tr_n(k_1) + ... + C_s^T tr_n(k_s), with
// k laid out as s consecutive blocks of n digits (least significant first).
class DualNet {
 public:
  explicit DualNet(const DigitalNet& net) : base_(net.base()), s_(net.s()), n_(net.n()) {
    const std::size_t m = net.m();
    FieldMatrix stacked(base_, m, s_ * n_);
    for (std::size_t j = 0; j < s_; ++j)
      for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t c = 0; c < m; ++c) stacked.set(c, j * n_ + r, net.matrix(j).at(r, c));
    basis_ = kernel_basis(stacked);
  }

  const PrimeBase& base() const noexcept { return base_; }
  std::size_t s() const noexcept { return s_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return basis_.size(); }
  const std::vector<std::vector<Elem>>& basis() const noexcept { return basis_; }

  long double cardinality() const { return std::pow(static_cast<long double>(base_.value()), basis_.size()); }

  void check_limit(std::uint64_t limit) const {
    if (cardinality() > static_cast<long double>(limit)) {
      throw GuardExceeded("dual net too large to enumerate", cardinality(), static_cast<long double>(limit));
    }
  }

  // Visits every element exactly once, starting with 0. The coefficient vector
  // runs through F_b^d as an odometer; see for_each_point for the update rule.
  template <class Visitor>
  void for_each(std::uint64_t limit, Visitor&& visit) const {
    check_limit(limit);
    const PrimeBase f = base_;
    const std::size_t d = basis_.size(), len = s_ * n_;
    std::vector<Elem> k(len, 0), coeff(d, 0);
    while (true) {
      visit(std::span<const Elem>(k));
      std::size_t i = 0;
      for (; i < d; ++i) {
        const auto& v = basis_[i];
        for (std::size_t r = 0; r < len; ++r) k[r] = f.add(k[r], v[r]);
        if (++coeff[i] < f.value()) break;
        coeff[i] = 0;
      }
      if (i == d) break;
    }
  }

  std::vector<MultiIndex> enumerate(std::uint64_t limit = kDefaultDualLimit) const {
    std::vector<MultiIndex> out;
    for_each(limit, [&](std::span<const Elem> k) { out.push_back(MultiIndex::from_blocks(base_, k, n_)); });
    return out;
  }

 private:
  PrimeBase base_;
  std::size_t s_, n_;
  std::vector<std::vector<Elem>> basis_;
};

// Membership test straight from the defining equation.
inline bool in_dual(const DigitalNet& net, const MultiIndex& k) {
  if (k.dimension() != net.s()) throw InvalidInput("multi-index dimension does not match net");
  const PrimeBase f = net.base();
  std::vector<Elem> acc(net.m(), 0);
  for (std::size_t j = 0; j < net.s(); ++j) {
    if (k[j].size() > net.n()) return false;  // outside {0, ..., b^n - 1}
    const auto& c = net.matrix(j);
    for (std::size_t r = 0; r < k[j].size(); ++r) {
      const Elem kr = k[j].digit(r);
      if (kr == 0) continue;
      for (std::size_t col = 0; col < net.m(); ++col) acc[col] = f.add(acc[col], f.mul(kr, c.at(r, col)));
    }
  }
  return std::all_of(acc.begin(), acc.end(), [](Elem e) { return e == 0; });
}

// nullopt means P^perp = {0}: the minimum over an empty set.
using MinMetricValue = std::optional<unsigned>;

inline unsigned block_metric(std::span<const Elem> k, std::size_t n, const Metric& metric) {
  unsigned total = 0;
  for (std::size_t off = 0; off < k.size(); off += n) total += metric(k.subspan(off, n));
  return total;
}

inline MinMetricValue min_metric(const DigitalNet& net, const Metric& metric,
                                 std::uint64_t limit = kDefaultDualLimit) {
  DualNet dual(net);
  MinMetricValue best;
  dual.for_each(limit, [&](std::span<const Elem> k) {
    if (std::all_of(k.begin(), k.end(), [](Elem e) { return e == 0; })) return;
    const unsigned v = block_metric(k, net.n(), metric);
    if (!best || v < *best) best = v;
  });
  return best;
}

struct MetricSummary {
  MinMetricValue hamming;
  MinMetricValue nrt;
  std::map<unsigned, MinMetricValue> mu;  // alpha -> min mu_alpha
  std::uint64_t dual_size = 0;
};

// All minimum metrics in a single pass over P^perp.
inline MetricSummary measure_metrics(const DigitalNet& net, unsigned max_alpha,
                                     std::uint64_t limit = kDefaultDualLimit) {
  DualNet dual(net);
  MetricSummary out;
  std::vector<MinMetricValue> mu(max_alpha + 1);
  const std::size_t n = net.n();
  dual.for_each(limit, [&](std::span<const Elem> k) {
    ++out.dual_size;
    if (std::all_of(k.begin(), k.end(), [](Elem e) { return e == 0; })) return;
    const unsigned h = block_metric(k, n, Metric::hamming());
    if (!out.hamming || h < *out.hamming) out.hamming = h;
    for (unsigned a = 1; a <= max_alpha; ++a) {
      const unsigned v = block_metric(k, n, Metric::dick(a));
      if (!mu[a] || v < *mu[a]) mu[a] = v;
    }
  });
  out.nrt = max_alpha >= 1 ? mu[1] : min_metric(net, Metric::nrt(), limit);
  for (unsigned a = 1; a <= max_alpha; ++a) out.mu[a] = mu[a];
  return out;
}

namespace detail {

struct RowSelection {
  std::vector<std::size_t> rows;  // 0-based row indices
  unsigned weight;                // sum of the min(alpha, v) largest 1-based indices
};

// Per-coordinate selections that must be tested. With fewer than alpha rows
// the selection is taken as is. With alpha top rows i_1 > ... > i_alpha the
// remaining rows are unconstrained, so the maximal choice {1, ..., i_alpha - 1}
// covers every subset.
inline std::vector<RowSelection> coordinate_selections(std::size_t n, unsigned alpha, unsigned budget) {
  std::vector<RowSelection> out{{{}, 0}};
  std::vector<std::size_t> top;
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t below, unsigned weight) {
    // `top` holds chosen 1-based indices in decreasing order; next must be < below.
    for (std::size_t i = std::min(below - 1, n); i >= 1; --i) {
      if (weight + i > budget) continue;
      top.push_back(i);
      const unsigned w = weight + static_cast<unsigned>(i);
      RowSelection sel{{}, w};
      for (auto t : top) sel.rows.push_back(t - 1);
      if (top.size() == alpha) {
        for (std::size_t r = 1; r < i; ++r) sel.rows.push_back(r - 1);
        out.push_back(std::move(sel));
      } else {
        out.push_back(std::move(sel));
        rec(i, w);
      }
      top.pop_back();
    }
  };
  rec(n + 1, 0);
  return out;
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultOrderCheckLimit = 50'000'000;

// True iff the net is an order-alpha digital (t, m, s)-net: every admissible
// row selection is linearly independent.
inline bool verify_order_t(const DigitalNet& net, unsigned alpha, unsigned t,
                           std::uint64_t combination_limit = kDefaultOrderCheckLimit) {
  if (alpha == 0) throw InvalidInput("alpha must be positive");
  const std::size_t m = net.m(), n = net.n(), s = net.s();
  if (t > alpha * m) throw InvalidInput("t must lie in [0, alpha*m]");
  const unsigned budget = static_cast<unsigned>(alpha * m - t);
  if (budget == 0) return true;

  auto sels = detail::coordinate_selections(n, alpha, budget);
  std::sort(sels.begin(), sels.end(), [](const auto& a, const auto& b) { return a.weight < b.weight; });

  std::uint64_t visited = 0;
  std::vector<const detail::RowSelection*> chosen(s, nullptr);
  std::function<bool(std::size_t, unsigned)> rec = [&](std::size_t j, unsigned weight) -> bool {
    if (j == s) {
      if (++visited > combination_limit) {
        throw GuardExceeded("verify_order_t: too many row selections", static_cast<long double>(visited),
                            static_cast<long double>(combination_limit));
      }
      std::vector<std::vector<Elem>> rows;
      for (std::size_t c = 0; c < s; ++c)
        for (auto r : chosen[c]->rows) {
          auto row = net.matrix(c).row(r);
          rows.emplace_back(row.begin(), row.end());
        }
      return rows_independent(rows, net.base());
    }
    for (const auto& sel : sels) {
      if (weight + sel.weight > budget) break;
      chosen[j] = &sel;
      if (!rec(j + 1, weight + sel.weight)) return false;
    }
    return true;
  };
  return rec(0, 0);
}

// t of the interlaced net built from an order-1 (t', m, alpha*s)-net.
inline unsigned predicted_t_interlaced(unsigned t_prime, unsigned alpha, unsigned s, unsigned m) {
  if (t_prime > m) throw InvalidInput("t' must lie in [0, m]");
  return alpha * std::min(m, t_prime + s * (alpha - 1) / 2);
}

// t' = ceil(t * alpha' / alpha) for the order-alpha' view of an order-alpha net.
inline unsigned propagate_t(unsigned t, unsigned alpha, unsigned alpha_prime) {
  if (alpha_prime == 0 || alpha_prime >= alpha) throw InvalidInput("need 1 <= alpha' < alpha");
  return (t * alpha_prime + alpha - 1) / alpha;
}

struct MetricBounds {
  unsigned hamming = 0;  // kappa(P) >= hamming
  unsigned mu_beta = 0;  // mu_beta(P) >= mu_beta
  unsigned mu_1 = 0;     // mu_1(P) >= mu_1
  unsigned beta = 1;
  unsigned t = 0;        // order-beta t-value
  unsigned t_prime = 0;  // order-1 t-value
};

// Guaranteed lower bounds for the interlaced construction. With beta = 1 the
// net is a plain Chen-Skriganov net and these reduce to g+1 and gw+1.
inline MetricBounds metric_lower_bounds(const ConstructionParams& p) {
  const unsigned gw = p.g * p.w;
  const unsigned half = p.s * (p.beta - 1) / 2;
  MetricBounds out;
  out.beta = p.beta;
  out.hamming = p.g + 1;
  out.mu_beta = (gw > half ? p.beta * (gw - half) : 0) + 1;
  out.t = predicted_t_interlaced(0, p.beta, p.s, gw);
  out.t_prime = p.beta > 1 ? propagate_t(out.t, p.beta, 1) : out.t;
  out.mu_1 = gw - out.t_prime + 1;
  return out;
}

// True when every measured minimum meets its guaranteed lower bound; an
// empty minimum (P^perp = {0}) is infinite and always does.
inline bool bounds_satisfied(const MetricSummary& m, const MetricBounds& bounds) {
  auto meets = [](const MinMetricValue& v, unsigned lower) { return !v || *v >= lower; };
  if (!meets(m.hamming, bounds.hamming) || !meets(m.nrt, bounds.mu_1)) return false;
  auto it = m.mu.find(bounds.beta);
  if (it != m.mu.end() && !meets(it->second, bounds.mu_beta)) return false;
  return true;
}

struct CountingBoundReport {
  bool holds = true;
  std::size_t fibers = 0;
  double worst_ratio = 0.0;  // max count / bound over fibers
  MinMetricValue nrt;
};

// Checks #{k in P^perp \ {0} : mu_1(k_j) = l_j for all j} <= b^(|l|_1 - mu_1(P) + 1)
// for every fiber l that occurs.
inline CountingBoundReport check_counting_bound(const DigitalNet& net, std::uint64_t limit = kDefaultDualLimit) {
  DualNet dual(net);
  std::map<std::vector<unsigned>, std::uint64_t> fibers;
  MinMetricValue nrt;
  const std::size_t n = net.n(), s = net.s();
  dual.for_each(limit, [&](std::span<const Elem> k) {
    if (std::all_of(k.begin(), k.end(), [](Elem e) { return e == 0; })) return;
    std::vector<unsigned> key(s);
    unsigned z = 0;
    for (std::size_t j = 0; j < s; ++j) {
      key[j] = mu_alpha(k.subspan(j * n, n), 1);
      z += key[j];
    }
    if (!nrt || z < *nrt) nrt = z;
    ++fibers[key];
  });
  CountingBoundReport rep;
  rep.nrt = nrt;
  rep.fibers = fibers.size();
  for (const auto& [l, count] : fibers) {
    unsigned z = 0;
    for (auto v : l) z += v;
    const double bound = std::pow(static_cast<double>(net.base().value()), static_cast<double>(z) - *nrt + 1.0);
    const double ratio = static_cast<double>(count) / bound;
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (static_cast<double>(count) > bound) rep.holds = false;
  }
  return rep;
}

}  // namespace hoqmc
