#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace negpell {

// Dense GF(2) vector, bit-packed into 64-bit words.
class F2Vec {
public:
  F2Vec() = default;
  explicit F2Vec(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }

  bool get(std::size_t i) const {
    assert(i < n_);
    return (w_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i, bool v) {
    assert(i < n_);
    uint64_t m = uint64_t(1) << (i & 63);
    if (v)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) {
    assert(i < n_);
    w_[i >> 6] ^= uint64_t(1) << (i & 63);
  }

  F2Vec &operator^=(const F2Vec &o) {
    assert(n_ == o.n_);
    for (std::size_t k = 0; k < w_.size(); ++k)
      w_[k] ^= o.w_[k];
    return *this;
  }

  bool is_zero() const {
    for (uint64_t w : w_)
      if (w)
        return false;
    return true;
  }

  bool dot(const F2Vec &o) const {
    assert(n_ == o.n_);
    uint64_t acc = 0;
    for (std::size_t k = 0; k < w_.size(); ++k)
      acc ^= w_[k] & o.w_[k];
    return __builtin_parityll(acc);
  }

  bool operator==(const F2Vec &o) const { return n_ == o.n_ && w_ == o.w_; }

  std::string to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
      if (get(i))
        s[i] = '1';
    return s;
  }

  static F2Vec ones(std::size_t n) {
    F2Vec v(n);
    for (std::size_t i = 0; i < n; ++i)
      v.set(i, true);
    return v;
  }
  static F2Vec unit(std::size_t n, std::size_t i) {
    F2Vec v(n);
    v.set(i, true);
    return v;
  }

  const std::vector<uint64_t> &words() const { return w_; }

private:
  std::size_t n_ = 0;
  std::vector<uint64_t> w_;
};

// Dense GF(2) matrix, rows bit-packed. Elimination always scans columns left
// to right and picks the topmost available pivot row, so echelon forms (and
// hence kernel bases) are deterministic functions of the input.
class F2Matrix {
public:
  F2Matrix() = default;
  F2Matrix(std::size_t rows, std::size_t cols)
      : r_(rows), c_(cols), wpr_((cols + 63) / 64 == 0 ? 1 : (cols + 63) / 64),
        w_(r_ * wpr_, 0) {}

  static F2Matrix identity(std::size_t n) {
    F2Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      m.set(i, i, true);
    return m;
  }

  static F2Matrix from_rows(const std::vector<F2Vec> &rows, std::size_t cols) {
    F2Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      assert(rows[i].size() == cols);
      for (std::size_t j = 0; j < cols; ++j)
        if (rows[i].get(j))
          m.set(i, j, true);
    }
    return m;
  }

  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }

  bool get(std::size_t i, std::size_t j) const {
    assert(i < r_ && j < c_);
    return (w_[i * wpr_ + (j >> 6)] >> (j & 63)) & 1u;
  }
  void set(std::size_t i, std::size_t j, bool v) {
    assert(i < r_ && j < c_);
    uint64_t m = uint64_t(1) << (j & 63);
    if (v)
      w_[i * wpr_ + (j >> 6)] |= m;
    else
      w_[i * wpr_ + (j >> 6)] &= ~m;
  }
  void flip(std::size_t i, std::size_t j) {
    assert(i < r_ && j < c_);
    w_[i * wpr_ + (j >> 6)] ^= uint64_t(1) << (j & 63);
  }

  F2Vec row(std::size_t i) const {
    F2Vec v(c_);
    for (std::size_t j = 0; j < c_; ++j)
      if (get(i, j))
        v.set(j, true);
    return v;
  }
  void set_row(std::size_t i, const F2Vec &v) {
    assert(v.size() == c_);
    for (std::size_t j = 0; j < c_; ++j)
      set(i, j, v.get(j));
  }

  void xor_row_into(std::size_t src, std::size_t dst) {
    uint64_t *d = &w_[dst * wpr_];
    const uint64_t *s = &w_[src * wpr_];
    for (std::size_t k = 0; k < wpr_; ++k)
      d[k] ^= s[k];
  }
  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b)
      return;
    for (std::size_t k = 0; k < wpr_; ++k)
      std::swap(w_[a * wpr_ + k], w_[b * wpr_ + k]);
  }

  F2Matrix transposed() const {
    F2Matrix t(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j)
        if (get(i, j))
          t.set(j, i, true);
    return t;
  }

  F2Vec mul_vec(const F2Vec &v) const {
    assert(v.size() == c_);
    F2Vec out(r_);
    for (std::size_t i = 0; i < r_; ++i) {
      uint64_t acc = 0;
      const uint64_t *rw = &w_[i * wpr_];
      for (std::size_t k = 0; k < wpr_; ++k)
        acc ^= rw[k] & v.words()[k];
      if (__builtin_parityll(acc))
        out.set(i, true);
    }
    return out;
  }

  F2Matrix operator*(const F2Matrix &o) const {
    assert(c_ == o.r_);
    F2Matrix out(r_, o.c_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t k = 0; k < c_; ++k)
        if (get(i, k))
          out.xor_row_from(i, o, k);
    return out;
  }

  bool operator==(const F2Matrix &o) const {
    return r_ == o.r_ && c_ == o.c_ && w_ == o.w_;
  }

  // Reduced row echelon form; returns pivot column indices (ascending).
  std::vector<std::size_t> rref_in_place() {
    std::vector<std::size_t> pivots;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < c_ && rank < r_; ++col) {
      std::size_t sel = r_;
      for (std::size_t i = rank; i < r_; ++i)
        if (get(i, col)) {
          sel = i;
          break;
        }
      if (sel == r_)
        continue;
      swap_rows(sel, rank);
      for (std::size_t i = 0; i < r_; ++i)
        if (i != rank && get(i, col))
          xor_row_into(rank, i);
      pivots.push_back(col);
      ++rank;
    }
    return pivots;
  }

  std::size_t rank() const {
    F2Matrix tmp = *this;
    return tmp.rref_in_place().size();
  }

  // Basis of {v : M v = 0}, one row per basis vector, in the canonical order
  // induced by ascending free-column index. Rows of the result have c_ bits.
  F2Matrix kernel_basis() const {
    F2Matrix tmp = *this;
    std::vector<std::size_t> pivots = tmp.rref_in_place();
    std::vector<bool> is_pivot(c_, false);
    for (std::size_t p : pivots)
      is_pivot[p] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t j = 0; j < c_; ++j)
      if (!is_pivot[j])
        free_cols.push_back(j);
    F2Matrix ker(free_cols.size(), c_);
    for (std::size_t b = 0; b < free_cols.size(); ++b) {
      std::size_t f = free_cols[b];
      ker.set(b, f, true);
      for (std::size_t pi = 0; pi < pivots.size(); ++pi)
        if (tmp.get(pi, f))
          ker.set(b, pivots[pi], true);
    }
    return ker;
  }

  // Basis of {v : vᵀ M = 0}.
  F2Matrix left_kernel_basis() const { return transposed().kernel_basis(); }

  // Rows echelonized (RREF) with zero rows dropped: a canonical basis of the
  // row space.
  F2Matrix row_space_basis() const {
    F2Matrix tmp = *this;
    std::vector<std::size_t> pivots = tmp.rref_in_place();
    F2Matrix out(pivots.size(), c_);
    for (std::size_t i = 0; i < pivots.size(); ++i)
      for (std::size_t j = 0; j < c_; ++j)
        if (tmp.get(i, j))
          out.set(i, j, true);
    return out;
  }

  bool row_space_contains(const F2Vec &v) const {
    assert(v.size() == c_);
    F2Matrix aug(r_ + 1, c_);
    for (std::size_t i = 0; i < r_; ++i)
      aug.set_row(i, row(i));
    aug.set_row(r_, v);
    return aug.rank() == rank();
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < r_; ++i) {
      s += row(i).to_string();
      if (i + 1 < r_)
        s += '\n';
    }
    return s;
  }

private:
  void xor_row_from(std::size_t dst, const F2Matrix &o, std::size_t src) {
    uint64_t *d = &w_[dst * wpr_];
    const uint64_t *s = &o.w_[src * o.wpr_];
    for (std::size_t k = 0; k < wpr_ && k < o.wpr_; ++k)
      d[k] ^= s[k];
  }

  std::size_t r_ = 0, c_ = 0, wpr_ = 1;
  std::vector<uint64_t> w_;
};

} // namespace negpell
