#pragma once

// Exact b-adic digit vectors: digitwise addition/subtraction, the Hamming
// weight, the Dick weights mu_alpha and the digit interlacing map.
//
// Digit positions follow the 1-based convention: the digit multiplying
// b^(a-1) sits at position a. Storage is 0-based and least significant first.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hoqmc/error.hpp"
#include "hoqmc/ff.hpp"

namespace hoqmc {

using BigInt = boost::multiprecision::cpp_int;

class DigitVector {
 public:
  explicit DigitVector(PrimeBase base) : base_(base) {}

  DigitVector(PrimeBase base, std::vector<Elem> digits) : base_(base), digits_(std::move(digits)) {
    for (Elem d : digits_) {
      if (d >= base.value()) throw InvalidInput("digit out of range for base");
    }
    trim();
  }

  static DigitVector from_integer(PrimeBase base, std::uint64_t k) {
    std::vector<Elem> d;
    while (k > 0) {
      d.push_back(static_cast<Elem>(k % base.value()));
      k /= base.value();
    }
    return DigitVector(base, std::move(d));
  }

  static DigitVector from_big(PrimeBase base, BigInt k) {
    if (k < 0) throw InvalidInput("negative index");
    std::vector<Elem> d;
    while (k > 0) {
      d.push_back(static_cast<Elem>(static_cast<std::uint32_t>(k % base.value())));
      k /= base.value();
    }
    return DigitVector(base, std::move(d));
  }

  static DigitVector from_decimal(PrimeBase base, std::string_view text) {
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw InvalidInput("not a nonnegative decimal integer: '" + std::string(text) + "'");
    }
    return from_big(base, BigInt(std::string(text)));
  }

  const PrimeBase& base() const noexcept { return base_; }
  std::span<const Elem> digits() const noexcept { return digits_; }
  // Number of stored digits; equals the position a_1 of the leading digit (0 for k = 0).
  std::size_t size() const noexcept { return digits_.size(); }
  bool is_zero() const noexcept { return digits_.empty(); }
  Elem digit(std::size_t i) const noexcept { return i < digits_.size() ? digits_[i] : 0; }

  std::optional<std::uint64_t> to_u64() const {
    std::uint64_t v = 0;
    for (std::size_t i = digits_.size(); i-- > 0;) {
      if (v > (UINT64_MAX - digits_[i]) / base_.value()) return std::nullopt;
      v = v * base_.value() + digits_[i];
    }
    return v;
  }

  BigInt to_big() const {
    BigInt v = 0;
    for (std::size_t i = digits_.size(); i-- > 0;) v = v * base_.value() + digits_[i];
    return v;
  }

  std::string to_decimal() const { return to_big().str(); }

  friend bool operator==(const DigitVector&, const DigitVector&) = default;

 private:
  void trim() {
    while (!digits_.empty() && digits_.back() == 0) digits_.pop_back();
  }

  PrimeBase base_;
  std::vector<Elem> digits_;
};

namespace detail {

template <class Op>
DigitVector digitwise(const DigitVector& k, const DigitVector& l, Op op) {
  require_same_base(k.base(), l.base());
  const std::size_t len = std::max(k.size(), l.size());
  std::vector<Elem> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = op(k.digit(i), l.digit(i));
  return DigitVector(k.base(), std::move(out));
}

}  // namespace detail

inline DigitVector digit_add(const DigitVector& k, const DigitVector& l) {
  const PrimeBase f = k.base();
  return detail::digitwise(k, l, [&](Elem a, Elem b) { return f.add(a, b); });
}

inline DigitVector digit_sub(const DigitVector& k, const DigitVector& l) {
  const PrimeBase f = k.base();
  return detail::digitwise(k, l, [&](Elem a, Elem b) { return f.sub(a, b); });
}

// Integer fast paths; both operands must be below 2^64 and so is the result.
inline std::uint64_t digit_add(std::uint64_t k, std::uint64_t l, std::uint32_t b) {
  std::uint64_t out = 0, scale = 1;
  while (k > 0 || l > 0) {
    out += ((k % b + l % b) % b) * scale;
    k /= b;
    l /= b;
    if (k > 0 || l > 0) scale *= b;
  }
  return out;
}

inline std::uint64_t digit_sub(std::uint64_t k, std::uint64_t l, std::uint32_t b) {
  std::uint64_t out = 0, scale = 1;
  while (k > 0 || l > 0) {
    out += ((k % b + b - l % b) % b) * scale;
    k /= b;
    l /= b;
    if (k > 0 || l > 0) scale *= b;
  }
  return out;
}

inline unsigned hamming_weight(std::span<const Elem> digits) noexcept {
  return static_cast<unsigned>(std::count_if(digits.begin(), digits.end(), [](Elem d) { return d != 0; }));
}

inline unsigned hamming_weight(const DigitVector& k) noexcept { return hamming_weight(k.digits()); }

inline unsigned hamming_weight(std::uint64_t k, std::uint32_t b) noexcept {
  unsigned v = 0;
  for (; k > 0; k /= b) v += (k % b) != 0;
  return v;
}

// Sum of the alpha largest positions of nonzero digits; mu_alpha(0) = 0.
inline unsigned mu_alpha(std::span<const Elem> digits, unsigned alpha) noexcept {
  unsigned sum = 0, taken = 0;
  for (std::size_t i = digits.size(); i-- > 0 && taken < alpha;) {
    if (digits[i] != 0) {
      sum += static_cast<unsigned>(i + 1);
      ++taken;
    }
  }
  return sum;
}

inline unsigned mu_alpha(const DigitVector& k, unsigned alpha) {
  if (alpha == 0) throw InvalidInput("mu_alpha requires alpha >= 1");
  return mu_alpha(k.digits(), alpha);
}

inline unsigned mu_alpha(std::uint64_t k, unsigned alpha, std::uint32_t b) noexcept {
  Elem buf[64];
  std::size_t len = 0;
  for (; k > 0; k /= b) buf[len++] = static_cast<Elem>(k % b);
  return mu_alpha(std::span<const Elem>(buf, len), alpha);
}

// Number of b-adic digits of k (position of the leading digit, 0 for k = 0).
inline unsigned digit_count(std::uint64_t k, std::uint32_t b) noexcept {
  unsigned a = 0;
  for (; k > 0; k /= b) ++a;
  return a;
}

struct Metric {
  enum class Kind { Hamming, Dick };
  Kind kind = Kind::Hamming;
  unsigned alpha = 1;

  static Metric hamming() { return {Kind::Hamming, 1}; }
  static Metric dick(unsigned alpha) {
    if (alpha == 0) throw InvalidInput("Dick metric requires alpha >= 1");
    return {Kind::Dick, alpha};
  }
  static Metric nrt() { return dick(1); }

  unsigned operator()(std::span<const Elem> digits) const noexcept {
    return kind == Kind::Hamming ? hamming_weight(digits) : mu_alpha(digits, alpha);
  }

  std::string name() const {
    return kind == Kind::Hamming ? std::string("hamming") : "mu_" + std::to_string(alpha);
  }
};

class MultiIndex {
 public:
  explicit MultiIndex(std::vector<DigitVector> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidInput("multi-index needs at least one component");
    for (const auto& c : components_) require_same_base(c.base(), components_.front().base());
  }

  static MultiIndex from_integers(PrimeBase base, std::span<const std::uint64_t> ks) {
    std::vector<DigitVector> comps;
    for (auto k : ks) comps.push_back(DigitVector::from_integer(base, k));
    return MultiIndex(std::move(comps));
  }

  // Components taken from consecutive blocks of `stride` digits.
  static MultiIndex from_blocks(PrimeBase base, std::span<const Elem> digits, std::size_t stride) {
    std::vector<DigitVector> comps;
    for (std::size_t off = 0; off < digits.size(); off += stride) {
      auto blk = digits.subspan(off, stride);
      comps.emplace_back(base, std::vector<Elem>(blk.begin(), blk.end()));
    }
    return MultiIndex(std::move(comps));
  }

  const PrimeBase& base() const noexcept { return components_.front().base(); }
  std::size_t dimension() const noexcept { return components_.size(); }
  const DigitVector& operator[](std::size_t j) const { return components_[j]; }
  const std::vector<DigitVector>& components() const noexcept { return components_; }
  bool is_zero() const noexcept {
    return std::all_of(components_.begin(), components_.end(), [](const auto& c) { return c.is_zero(); });
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    return std::lexicographical_compare(
        a.components_.begin(), a.components_.end(), b.components_.begin(), b.components_.end(),
        [](const DigitVector& x, const DigitVector& y) {
          if (x.size() != y.size()) return x.size() < y.size();
          return std::lexicographical_compare(x.digits().rbegin(), x.digits().rend(), y.digits().rbegin(),
                                              y.digits().rend());
        });
  }

 private:
  std::vector<DigitVector> components_;
};

inline unsigned metric_of(const MultiIndex& k, const Metric& metric) {
  unsigned total = 0;
  for (const auto& c : k.components()) total += metric(c.digits());
  return total;
}

inline MultiIndex digit_sub(const MultiIndex& k, const MultiIndex& l) {
  if (k.dimension() != l.dimension()) throw InvalidInput("multi-index dimension mismatch");
  std::vector<DigitVector> out;
  for (std::size_t j = 0; j < k.dimension(); ++j) out.push_back(digit_sub(k[j], l[j]));
  return MultiIndex(std::move(out));
}

inline MultiIndex digit_add(const MultiIndex& k, const MultiIndex& l) {
  if (k.dimension() != l.dimension()) throw InvalidInput("multi-index dimension mismatch");
  std::vector<DigitVector> out;
  for (std::size_t j = 0; j < k.dimension(); ++j) out.push_back(digit_add(k[j], l[j]));
  return MultiIndex(std::move(out));
}

// E_beta: digit a (0-based) of component j (0-based) lands at digit a*beta + j.
inline DigitVector interlace(std::span<const DigitVector> ks) {
  if (ks.empty()) throw InvalidInput("interlace needs at least one component");
  const PrimeBase base = ks.front().base();
  const std::size_t beta = ks.size();
  std::size_t len = 0;
  for (const auto& k : ks) {
    require_same_base(base, k.base());
    len = std::max(len, k.size());
  }
  std::vector<Elem> out(len * beta, 0);
  for (std::size_t j = 0; j < beta; ++j)
    for (std::size_t a = 0; a < ks[j].size(); ++a) out[a * beta + j] = ks[j].digit(a);
  return DigitVector(base, std::move(out));
}

inline std::vector<DigitVector> deinterlace(const DigitVector& k, unsigned beta) {
  if (beta == 0) throw InvalidInput("deinterlace requires beta >= 1");
  std::vector<std::vector<Elem>> parts(beta);
  for (std::size_t i = 0; i < k.size(); ++i) {
    auto& p = parts[i % beta];
    p.resize(i / beta + 1, 0);
    p[i / beta] = k.digit(i);
  }
  std::vector<DigitVector> out;
  for (auto& p : parts) out.emplace_back(k.base(), std::move(p));
  return out;
}

inline MultiIndex interlace_multiindex(const MultiIndex& k, unsigned beta) {
  if (beta == 0 || k.dimension() % beta != 0) {
    throw InvalidInput("interlace_multiindex: component count " + std::to_string(k.dimension()) +
                       " not divisible by beta " + std::to_string(beta));
  }
  std::vector<DigitVector> out;
  for (std::size_t blk = 0; blk < k.dimension(); blk += beta) {
    out.push_back(interlace(std::span<const DigitVector>(k.components()).subspan(blk, beta)));
  }
  return MultiIndex(std::move(out));
}

inline MultiIndex deinterlace_multiindex(const MultiIndex& k, unsigned beta) {
  std::vector<DigitVector> out;
  for (const auto& c : k.components()) {
    auto parts = deinterlace(c, beta);
    out.insert(out.end(), parts.begin(), parts.end());
  }
  return MultiIndex(std::move(out));
}

}  // namespace hoqmc
