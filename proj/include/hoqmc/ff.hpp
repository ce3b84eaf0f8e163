#pragma once

// Arithmetic and linear algebra over a prime field F_b.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hoqmc/error.hpp"

namespace hoqmc {

// Field elements are stored reduced in {0, ..., b-1}.
using Elem = std::uint32_t;

class PrimeBase {
 public:
  static constexpr std::uint32_t kMaxBase = 1u << 16;

  explicit PrimeBase(std::uint32_t b) : b_(b) {
    if (b < 2 || b >= kMaxBase || !is_prime(b)) {
      throw InvalidInput("base must be a prime in [2, 65536), got " + std::to_string(b));
    }
  }

  static constexpr bool is_prime(std::uint32_t v) {
    if (v < 2) return false;
    for (std::uint32_t d = 2; d * d <= v; ++d) {
      if (v % d == 0) return false;
    }
    return true;
  }

  std::uint32_t value() const noexcept { return b_; }

  Elem add(Elem x, Elem y) const noexcept {
    Elem s = x + y;
    return s >= b_ ? s - b_ : s;
  }
  Elem sub(Elem x, Elem y) const noexcept { return x >= y ? x - y : x + b_ - y; }
  Elem neg(Elem x) const noexcept { return x == 0 ? 0 : b_ - x; }
  // (b-1)^2 < 2^32 because b < 2^16.
  Elem mul(Elem x, Elem y) const noexcept { return (x * y) % b_; }

  // x^e with the convention 0^0 = 1.
  Elem pow(Elem x, std::uint64_t e) const noexcept {
    Elem result = 1 % b_;
    Elem base = x % b_;
    while (e > 0) {
      if (e & 1u) result = mul(result, base);
      base = mul(base, base);
      e >>= 1;
    }
    return result;
  }

  Elem inv(Elem x) const {
    if (x % b_ == 0) throw InvalidInput("zero has no inverse in F_b");
    return pow(x, b_ - 2);
  }

  Elem reduce(std::int64_t v) const noexcept {
    std::int64_t r = v % static_cast<std::int64_t>(b_);
    return static_cast<Elem>(r < 0 ? r + b_ : r);
  }

  friend bool operator==(const PrimeBase&, const PrimeBase&) = default;

 private:
  std::uint32_t b_;
};

inline void require_same_base(const PrimeBase& a, const PrimeBase& b) {
  if (a != b) {
    throw InvalidInput("base mismatch: " + std::to_string(a.value()) + " vs " +
                       std::to_string(b.value()));
  }
}

// Binomial coefficient C(v, i) mod b via Lucas' theorem; C(v, i) = 0 when i > v.
inline Elem binom_mod_p(std::uint64_t v, std::uint64_t i, const PrimeBase& base) {
  const std::uint32_t b = base.value();
  Elem result = 1 % b;
  while (v > 0 || i > 0) {
    const auto vd = static_cast<Elem>(v % b);
    const auto id = static_cast<Elem>(i % b);
    if (id > vd) return 0;
    Elem num = 1, den = 1;
    for (Elem t = 0; t < id; ++t) {
      num = base.mul(num, vd - t);
      den = base.mul(den, t + 1);
    }
    result = base.mul(result, base.mul(num, base.inv(den)));
    v /= b;
    i /= b;
  }
  return result;
}

class FieldMatrix {
 public:
  FieldMatrix(PrimeBase base, std::size_t rows, std::size_t cols)
      : base_(base), rows_(rows), cols_(cols), entries_(rows * cols, 0) {}

  FieldMatrix(PrimeBase base, std::size_t rows, std::size_t cols, std::vector<Elem> entries)
      : base_(base), rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows * cols) {
      throw InvalidInput("matrix entry count does not match shape");
    }
    for (Elem e : entries_) {
      if (e >= base.value()) throw InvalidInput("matrix entry not reduced mod b");
    }
  }

  static FieldMatrix identity(PrimeBase base, std::size_t size) {
    FieldMatrix m(base, size, size);
    for (std::size_t i = 0; i < size; ++i) m.set(i, i, 1);
    return m;
  }

  const PrimeBase& base() const noexcept { return base_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const Elem> entries() const noexcept { return entries_; }

  Elem at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, Elem v) { entries_[r * cols_ + c] = v % base_.value(); }

  std::span<const Elem> row(std::size_t r) const {
    return std::span<const Elem>(entries_).subspan(r * cols_, cols_);
  }

  FieldMatrix transpose() const {
    FieldMatrix t(base_, cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t.entries_[c * rows_ + r] = at(r, c);
    return t;
  }

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  PrimeBase base_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Elem> entries_;
};

inline std::vector<Elem> mat_vec_mul(const FieldMatrix& m, std::span<const Elem> v) {
  if (v.size() != m.cols()) {
    throw InvalidInput("mat_vec_mul: vector length " + std::to_string(v.size()) +
                       " != column count " + std::to_string(m.cols()));
  }
  const PrimeBase& f = m.base();
  std::vector<Elem> out(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::uint64_t acc = 0;
    auto row = m.row(r);
    for (std::size_t c = 0; c < v.size(); ++c) {
      acc += static_cast<std::uint64_t>(row[c]) * v[c];
      // Keep the accumulator bounded; each product is < 2^32.
      if ((c & 0xFFF) == 0xFFF) acc %= f.value();
    }
    out[r] = static_cast<Elem>(acc % f.value());
  }
  return out;
}

namespace detail {

struct Echelon {
  FieldMatrix reduced;
  std::vector<std::size_t> pivot_cols;  // pivot column of row i
};

// Reduced row echelon form. Pivot policy: columns left to right, and within a
// column the smallest remaining row index with a nonzero entry.
inline Echelon row_reduce(FieldMatrix m) {
  const PrimeBase f = m.base();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t p = r;
    while (p < m.rows() && m.at(p, c) == 0) ++p;
    if (p == m.rows()) continue;
    if (p != r) {
      for (std::size_t k = 0; k < m.cols(); ++k) {
        Elem tmp = m.at(p, k);
        m.set(p, k, m.at(r, k));
        m.set(r, k, tmp);
      }
    }
    const Elem scale = f.inv(m.at(r, c));
    for (std::size_t k = 0; k < m.cols(); ++k) m.set(r, k, f.mul(m.at(r, k), scale));
    for (std::size_t q = 0; q < m.rows(); ++q) {
      if (q == r) continue;
      const Elem factor = m.at(q, c);
      if (factor == 0) continue;
      for (std::size_t k = c; k < m.cols(); ++k) {
        m.set(q, k, f.sub(m.at(q, k), f.mul(factor, m.at(r, k))));
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return {std::move(m), std::move(pivots)};
}

}  // namespace detail

inline std::size_t rank(const FieldMatrix& m) { return detail::row_reduce(m).pivot_cols.size(); }

// Basis of {v : M v = 0}, one vector per free column in ascending column order.
inline std::vector<std::vector<Elem>> kernel_basis(const FieldMatrix& m) {
  const PrimeBase f = m.base();
  auto ech = detail::row_reduce(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : ech.pivot_cols) is_pivot[c] = true;

  std::vector<std::vector<Elem>> basis;
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<Elem> v(m.cols(), 0);
    v[free] = 1;
    for (std::size_t i = 0; i < ech.pivot_cols.size(); ++i) {
      v[ech.pivot_cols[i]] = f.neg(ech.reduced.at(i, free));
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

inline bool rows_independent(const std::vector<std::vector<Elem>>& rows, const PrimeBase& base) {
  if (rows.empty()) return true;
  const std::size_t len = rows.front().size();
  if (rows.size() > len) return false;
  std::vector<Elem> flat;
  flat.reserve(rows.size() * len);
  for (const auto& r : rows) {
    if (r.size() != len) throw InvalidInput("rows_independent: rows differ in length");
    for (Elem e : r) flat.push_back(e % base.value());
  }
  return rank(FieldMatrix(base, rows.size(), len, std::move(flat))) == rows.size();
}

}  // namespace hoqmc
