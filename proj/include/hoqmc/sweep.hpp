#pragma once

// Convergence sweeps over the construction family N = b^{gw} and a seeded
// Monte Carlo baseline.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hoqmc/error.hpp"
#include "hoqmc/nets.hpp"
#include "hoqmc/wce.hpp"

namespace hoqmc {

// Counter-based generator: output i is the SplitMix64 finalizer applied to
// seed + (i + 1) * 0x9E3779B97F4A7C15, so any output can be recomputed alone.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t at(std::uint64_t i) const { return mix(seed_ + (i + 1) * 0x9E3779B97F4A7C15ULL); }
  std::uint64_t next() { return at(counter_++); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

enum class SweepMethod { Exact, Dual };

struct SweepConfig {
  ConstructionParams params;  // w is overridden per row
  unsigned w_min = 1;
  unsigned w_max = 1;
  SweepMethod method = SweepMethod::Exact;
  std::optional<unsigned> radius;  // dual method; defaults to n
  WceOptions wce;
  std::uint64_t dual_limit = kDefaultDualLimit;
};

struct SweepRow {
  unsigned w = 0;
  long double N = 0;
  double e = std::numeric_limits<double>::quiet_NaN();
  double log10_N = 0;
  double log10_e = std::numeric_limits<double>::quiet_NaN();
  double slope = std::numeric_limits<double>::quiet_NaN();  // fitted over rows so far
  std::string error;                                        // empty on success
  bool ok() const noexcept { return error.empty(); }
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();
};

// Least-squares slope of y against x; NaN for fewer than two points.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

// Slope of log10 e against log10 N over the last max(3, half) usable rows.
inline double tail_slope(const std::vector<SweepRow>& rows) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (r.ok() && r.e > 0) {
      x.push_back(r.log10_N);
      y.push_back(r.log10_e);
    }
  }
  const std::size_t keep = std::min(x.size(), std::max<std::size_t>(3, x.size() / 2));
  x.erase(x.begin(), x.end() - static_cast<std::ptrdiff_t>(keep));
  y.erase(y.begin(), y.end() - static_cast<std::ptrdiff_t>(keep));
  return least_squares_slope(x, y);
}

inline SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.w_min == 0 || cfg.w_max < cfg.w_min) {
    throw InvalidInput("w range must be nonempty with w >= 1");
  }
  SweepResult result;
  for (unsigned w = cfg.w_min; w <= cfg.w_max; ++w) {
    SweepRow row;
    row.w = w;
    ConstructionParams p = cfg.params;
    p.w = w;
    row.N = std::pow(static_cast<long double>(p.b.value()), static_cast<long double>(p.m()));
    row.log10_N = static_cast<double>(std::log10(row.N));
    try {
      const DigitalNet net = construct_optimal_net(p);
      const WceReport rep = cfg.method == SweepMethod::Exact
                                ? wce_exact(net, p.alpha, cfg.wce)
                                : wce_dual_truncated(net, p.alpha, cfg.radius.value_or(p.n()), cfg.dual_limit);
      row.e = rep.e;
      row.log10_e = std::log10(rep.e);
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
    result.rows.push_back(row);
    result.rows.back().slope = tail_slope(result.rows);
  }
  result.slope = tail_slope(result.rows);
  return result;
}

// Root mean square of e over independent uniformly random point sets.
inline double monte_carlo_wce(std::uint64_t n, unsigned s, unsigned alpha, std::uint64_t seed, unsigned replicas = 4,
                              const WceOptions& opt = {}) {
  double sum_e2 = 0;
  for (unsigned rep = 0; rep < replicas; ++rep) {
    SplitMix64 rng(SplitMix64::mix(seed) ^ (0xD1B54A32D192ED03ULL * (rep + 1)));
    std::vector<std::vector<double>> pts(n, std::vector<double>(s));
    for (auto& p : pts)
      for (auto& x : p) x = rng.uniform();
    sum_e2 += wce_exact(std::span<const std::vector<double>>(pts), alpha, opt).e_squared;
  }
  return std::sqrt(std::max(0.0, sum_e2 / replicas));
}

// Monte Carlo rows over the same point counts as a finished sweep.
inline SweepResult monte_carlo_sweep(const std::vector<std::uint64_t>& counts, unsigned s, unsigned alpha,
                                     std::uint64_t seed, unsigned replicas = 4, const WceOptions& opt = {}) {
  SweepResult result;
  unsigned idx = 0;
  for (std::uint64_t n : counts) {
    SweepRow row;
    row.w = idx++;
    row.N = static_cast<long double>(n);
    row.log10_N = std::log10(static_cast<double>(n));
    try {
      row.e = monte_carlo_wce(n, s, alpha, seed + n, replicas, opt);
      row.log10_e = std::log10(row.e);
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
    result.rows.push_back(row);
    result.rows.back().slope = tail_slope(result.rows);
  }
  result.slope = tail_slope(result.rows);
  return result;
}

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

inline std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "w,N,e,log10N,log10e,slope\n";
  for (const auto& r : result.rows) {
    std::ostringstream n;
    n.precision(21);
    n << r.N;
    os << r.w << ',' << n.str() << ',' << detail::csv_number(r.e) << ',' << detail::csv_number(r.log10_N) << ','
       << detail::csv_number(r.log10_e) << ',' << detail::csv_number(r.slope) << '\n';
  }
  return os.str();
}

}  // namespace hoqmc
