#pragma once

// Digital nets over F_b: generic point generation, Chen-Skriganov generating
// matrices, Dick's digit interlacing of matrices and the composite
// construction (interlaced Chen-Skriganov nets).

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hoqmc/digits.hpp"
#include "hoqmc/error.hpp"
#include "hoqmc/ff.hpp"

namespace hoqmc {

enum class Provenance { ChenSkriganov, Interlaced, Custom };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::ChenSkriganov: return "ChenSkriganov";
    case Provenance::Interlaced: return "Interlaced";
    case Provenance::Custom: return "Custom";
  }
  return "Custom";
}

inline Provenance provenance_from_string(const std::string& s) {
  if (s == "ChenSkriganov") return Provenance::ChenSkriganov;
  if (s == "Interlaced") return Provenance::Interlaced;
  if (s == "Custom") return Provenance::Custom;
  throw InvalidInput("unknown provenance '" + s + "'");
}

// Parameters of the interlaced construction. `betas` holds beta*g*s distinct
// field elements indexed lexicographically by (coordinate j, block l).
struct ConstructionParams {
  unsigned s = 1;
  unsigned alpha = 2;
  unsigned beta = 4;
  unsigned g = 1;
  unsigned w = 1;
  PrimeBase b{2};
  std::vector<Elem> betas;
  bool strict = true;

  unsigned base_dimension() const noexcept { return beta * s; }
  unsigned m() const noexcept { return g * w; }
  unsigned n() const noexcept { return beta * g * w; }

  // Default choice 0, 1, 2, ... in (j, l) order; only distinctness matters.
  static std::vector<Elem> default_betas(std::size_t count) {
    std::vector<Elem> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<Elem>(i);
    return out;
  }

  // The inequalities required for the optimal-order guarantee that fail.
  std::vector<std::string> theorem_violations() const {
    std::vector<std::string> v;
    const unsigned half = s * (beta - 1) / 2;
    auto fmt = [](const char* rule, unsigned lhs, unsigned rhs) {
      return std::string(rule) + " violated (" + std::to_string(lhs) + " < " + std::to_string(rhs) + ")";
    };
    if (alpha < 2) v.push_back(fmt("alpha >= 2", alpha, 2));
    if (beta < 2 * alpha) v.push_back(fmt("beta >= 2*alpha", beta, 2 * alpha));
    if (g < 2 * alpha * s) v.push_back(fmt("g >= 2*alpha*s", g, 2 * alpha * s));
    if (g < half) v.push_back(fmt("g >= floor(s*(beta-1)/2)", g, half));
    if (b.value() < beta * g * s) v.push_back(fmt("b >= beta*g*s", b.value(), beta * g * s));
    return v;
  }

  std::vector<Elem> effective_betas() const {
    return betas.empty() ? default_betas(static_cast<std::size_t>(beta) * g * s) : betas;
  }

  void validate() const {
    if (s == 0 || alpha == 0 || beta == 0 || g == 0 || w == 0) {
      throw InvalidInput("s, alpha, beta, g, w must all be positive");
    }
    if (strict) {
      auto v = theorem_violations();
      if (!v.empty()) {
        std::string msg = "parameters outside the optimal-order hypotheses:";
        for (const auto& s : v) msg += " " + s + ";";
        throw InvalidInput(msg);
      }
    }
  }
};

class DigitalNet {
 public:
  DigitalNet(PrimeBase base, std::vector<FieldMatrix> matrices, Provenance provenance = Provenance::Custom)
      : base_(base), matrices_(std::move(matrices)), provenance_(provenance) {
    if (matrices_.empty()) throw InvalidInput("digital net needs at least one generating matrix");
    n_ = matrices_.front().rows();
    m_ = matrices_.front().cols();
    if (n_ == 0 || m_ == 0) throw InvalidInput("generating matrices must be nonempty");
    for (const auto& c : matrices_) {
      require_same_base(base_, c.base());
      if (c.rows() != n_ || c.cols() != m_) throw InvalidInput("generating matrices differ in shape");
    }
  }

  const PrimeBase& base() const noexcept { return base_; }
  std::size_t s() const noexcept { return matrices_.size(); }
  std::size_t m() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }
  const std::vector<FieldMatrix>& matrices() const noexcept { return matrices_; }
  const FieldMatrix& matrix(std::size_t j) const { return matrices_.at(j); }
  Provenance provenance() const noexcept { return provenance_; }

  const std::optional<ConstructionParams>& params() const noexcept { return params_; }
  void set_params(ConstructionParams p) { params_ = std::move(p); }

  // Number of points b^m; throws when it does not fit in 64 bits.
  std::uint64_t size() const {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < m_; ++i) {
      if (n > UINT64_MAX / base_.value()) throw GuardExceeded("point count b^m overflows 64 bits", 0, 0);
      n *= base_.value();
    }
    return n;
  }

  // log10 of the point count, valid for any m.
  double log10_size() const { return static_cast<double>(m_) * std::log10(static_cast<double>(base_.value())); }

 private:
  PrimeBase base_;
  std::vector<FieldMatrix> matrices_;
  Provenance provenance_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::optional<ConstructionParams> params_;
};

// One point: coordinate j has digits xi_1..xi_n (index i holds the b^-(i+1) digit).
struct NetPoint {
  PrimeBase base;
  std::vector<std::vector<Elem>> coords;

  std::size_t dimension() const noexcept { return coords.size(); }

  // Nearest binary64 value; lossy when b^n is not a power of two or n is large.
  double to_double(std::size_t j) const {
    long double x = 0.0L;
    const auto& d = coords[j];
    for (std::size_t i = d.size(); i-- > 0;) x = (x + d[i]) / base.value();
    return static_cast<double>(x);
  }

  std::vector<double> to_doubles() const {
    std::vector<double> out(coords.size());
    for (std::size_t j = 0; j < coords.size(); ++j) out[j] = to_double(j);
    return out;
  }

  // Exact value numerator(j) / b^n.
  BigInt numerator(std::size_t j) const {
    BigInt v = 0;
    for (Elem d : coords[j]) v = v * base.value() + d;
    return v;
  }
};

inline NetPoint generate_point(const DigitalNet& net, std::uint64_t h) {
  if (h >= net.size()) {
    throw InvalidInput("point index " + std::to_string(h) + " out of range [0, " + std::to_string(net.size()) + ")");
  }
  std::vector<Elem> eta(net.m(), 0);
  for (std::size_t i = 0; i < net.m(); ++i, h /= net.base().value()) eta[i] = static_cast<Elem>(h % net.base().value());
  NetPoint p{net.base(), {}};
  for (const auto& c : net.matrices()) p.coords.push_back(mat_vec_mul(c, eta));
  return p;
}

// Visits every point in index order h = 0, 1, ..., b^m - 1. The digit vector
// of each coordinate is updated incrementally: advancing the odometer digit
// eta_i adds column i, and a digit that wraps from b-1 to 0 has accumulated
// b copies of its column, which vanish mod b.
template <class Visitor>
void for_each_point(const DigitalNet& net, Visitor&& visit) {
  const PrimeBase f = net.base();
  const std::size_t s = net.s(), n = net.n(), m = net.m();
  std::vector<std::vector<Elem>> columns(s * m);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      auto& col = columns[j * m + i];
      col.resize(n);
      for (std::size_t r = 0; r < n; ++r) col[r] = net.matrix(j).at(r, i);
    }

  NetPoint p{f, std::vector<std::vector<Elem>>(s, std::vector<Elem>(n, 0))};
  std::vector<Elem> eta(m, 0);
  const std::uint64_t total = net.size();
  for (std::uint64_t h = 0; h < total; ++h) {
    visit(h, std::as_const(p));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        auto& x = p.coords[j];
        const auto& col = columns[j * m + i];
        for (std::size_t r = 0; r < n; ++r) x[r] = f.add(x[r], col[r]);
      }
      if (++eta[i] < f.value()) break;
      eta[i] = 0;
    }
  }
}

// All points as binary64 coordinates (lossy, see NetPoint::to_double).
inline std::vector<std::vector<double>> points_as_doubles(const DigitalNet& net) {
  std::vector<std::vector<double>> out;
  out.reserve(net.size());
  for_each_point(net, [&](std::uint64_t, const NetPoint& p) { out.push_back(p.to_doubles()); });
  return out;
}

// Chen-Skriganov generating matrices, each (g*w) x (g*w):
//   c^(j)_{(l-1)w+i, v} = C(v-1, i-1) * beta_{j,l}^(v-i),
// with C(a, c) = 0 for a < c and 0^0 = 1. betas[j*g + l] is beta_{j+1,l+1}.
inline DigitalNet chen_skriganov(PrimeBase b, unsigned dims, unsigned g, unsigned w, std::span<const Elem> betas,
                                 bool strict = true) {
  if (dims == 0 || g == 0 || w == 0) throw InvalidInput("dims, g, w must be positive");
  if (strict && b.value() < static_cast<std::uint64_t>(g) * dims) {
    throw InvalidInput("b >= g*s violated (b=" + std::to_string(b.value()) + ", g*s=" + std::to_string(g * dims) + ")");
  }
  if (betas.size() != static_cast<std::size_t>(g) * dims) {
    throw InvalidInput("expected " + std::to_string(g * dims) + " beta values, got " + std::to_string(betas.size()));
  }
  std::set<Elem> seen;
  for (Elem e : betas) {
    if (e >= b.value()) throw InvalidInput("beta value " + std::to_string(e) + " is not an element of F_b");
    if (!seen.insert(e).second) {
      throw InvalidInput("duplicate beta value " + std::to_string(e) + "; the construction needs " +
                         std::to_string(g * dims) + " distinct elements of F_" + std::to_string(b.value()));
    }
  }

  const unsigned size = g * w;
  std::vector<FieldMatrix> mats;
  mats.reserve(dims);
  for (unsigned j = 0; j < dims; ++j) {
    FieldMatrix c(b, size, size);
    for (unsigned l = 0; l < g; ++l) {
      const Elem beta = betas[j * g + l];
      for (unsigned i = 1; i <= w; ++i) {
        for (unsigned v = 1; v <= size; ++v) {
          if (v < i) continue;  // C(v-1, i-1) = 0
          c.set(l * w + i - 1, v - 1, b.mul(binom_mod_p(v - 1, i - 1, b), b.pow(beta, v - i)));
        }
      }
    }
    mats.push_back(std::move(c));
  }
  return DigitalNet(b, std::move(mats), Provenance::ChenSkriganov);
}

// Row beta*(h-1)+i of D_j is row h of C_{beta*(j-1)+i} (1-based).
inline DigitalNet interlace_net(const DigitalNet& q, unsigned beta) {
  if (beta == 0 || q.s() % beta != 0) {
    throw InvalidInput("interlace_net: dimension " + std::to_string(q.s()) + " not divisible by beta " +
                       std::to_string(beta));
  }
  const std::size_t s = q.s() / beta, n = q.n(), m = q.m();
  std::vector<FieldMatrix> out;
  for (std::size_t j = 0; j < s; ++j) {
    FieldMatrix d(q.base(), beta * n, m);
    for (std::size_t h = 0; h < n; ++h)
      for (std::size_t i = 0; i < beta; ++i) {
        const auto& c = q.matrix(beta * j + i);
        for (std::size_t v = 0; v < m; ++v) d.set(beta * h + i, v, c.at(h, v));
      }
    out.push_back(std::move(d));
  }
  return DigitalNet(q.base(), std::move(out), Provenance::Interlaced);
}

inline DigitalNet construct_optimal_net(const ConstructionParams& p) {
  p.validate();
  auto betas = p.effective_betas();
  auto q = chen_skriganov(p.b, p.beta * p.s, p.g, p.w, betas, /*strict=*/false);
  auto net = interlace_net(q, p.beta);
  ConstructionParams recorded = p;
  recorded.betas = std::move(betas);
  net.set_params(std::move(recorded));
  return net;
}

}  // namespace hoqmc
