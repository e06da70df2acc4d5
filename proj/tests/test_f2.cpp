#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <negpell/f2.hpp>

#include <cstdint>
#include <random>
#include <vector>

using namespace negpell;

namespace {

F2Matrix random_matrix(std::mt19937_64 &rng, std::size_t rows, std::size_t cols) {
  F2Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (rng() & 1) m.set(i, j, 1);
  return m;
}

} // namespace

TEST_CASE("vector basics") {
  F2Vec v(70);
  CHECK(v.size == 70);
  CHECK(v.is_zero());
  v.set(0, 1);
  v.set(64, 1);
  v.flip(69);
  CHECK(v.get(0) == 1);
  CHECK(v.get(1) == 0);
  CHECK(v.get(64) == 1);
  CHECK(v.get(69) == 1);
  CHECK(!v.is_zero());

  F2Vec w = F2Vec::unit(70, 64);
  CHECK(w.get(64) == 1);
  v ^= w;
  CHECK(v.get(64) == 0);
  CHECK(v.get(0) == 1);

  F2Vec ones = F2Vec::ones(70);
  for (std::size_t i = 0; i < 70; ++i) CHECK(ones.get(i) == 1);
  CHECK(ones.dot(ones) == (70 & 1));
  CHECK(ones.dot(v) == (v.get(0) ^ v.get(69)) % 2);
  CHECK(F2Vec::ones(3).to_string() == "111");
}

TEST_CASE("rank plus nullity is the column count") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t rows = 1 + rng() % 9;
    std::size_t cols = 1 + rng() % 9;
    F2Matrix m = random_matrix(rng, rows, cols);
    F2Matrix k = m.kernel_basis();
    CHECK(m.rank() + k.rows() == cols);
    for (std::size_t i = 0; i < k.rows(); ++i)
      CHECK(m.mul_vec(k.row(i)).is_zero());
    F2Matrix lk = m.left_kernel_basis();
    CHECK(lk.rows() + m.rank() == rows);
    F2Matrix mt = m.transposed();
    for (std::size_t i = 0; i < lk.rows(); ++i)
      CHECK(mt.mul_vec(lk.row(i)).is_zero());
    CHECK(mt.rank() == m.rank());
  }
}

TEST_CASE("kernel bases are linearly independent and complete") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + rng() % 7;
    F2Matrix m = random_matrix(rng, n, n);
    F2Matrix k = m.kernel_basis();
    CHECK(k.row_space_basis().rows() == k.rows()); // independent rows
    // every kernel vector lies in the span: enumerate when small
    if (m.cols() <= 6) {
      std::size_t dim = 0;
      for (uint64_t bits = 0; bits < (1ull << m.cols()); ++bits) {
        F2Vec v(m.cols());
        for (std::size_t j = 0; j < m.cols(); ++j)
          if (bits >> j & 1) v.set(j, 1);
        if (m.mul_vec(v).is_zero()) {
          CHECK(k.row_space_contains(v));
          ++dim;
        }
      }
      CHECK(dim == (1ull << k.rows()));
    }
  }
}

TEST_CASE("rref pivots and determinism of elimination") {
  F2Matrix m = F2Matrix::from_rows(
      {F2Vec::unit(4, 1), F2Vec::unit(4, 1), F2Vec::ones(4)}, 4);
  F2Matrix copy = m;
  std::vector<std::size_t> piv = m.rref_in_place();
  CHECK(piv == std::vector<std::size_t>{0, 1});
  CHECK(m.get(0, 0) == 1);
  // second run from the same start gives bitwise the same result
  F2Matrix again = copy;
  again.rref_in_place();
  CHECK(again == m);
}

TEST_CASE("identity and multiplication") {
  F2Matrix id = F2Matrix::identity(5);
  std::mt19937_64 rng(99);
  F2Matrix a = random_matrix(rng, 5, 5);
  CHECK(id * a == a);
  CHECK(a * id == a);
  F2Matrix b = random_matrix(rng, 5, 5);
  F2Matrix c = random_matrix(rng, 5, 5);
  CHECK((a * b) * c == a * (b * c));
  // multiplication agrees with mul_vec column by column
  F2Matrix ab = a * b;
  for (std::size_t j = 0; j < 5; ++j) {
    F2Vec col(5);
    for (std::size_t i = 0; i < 5; ++i) col.set(i, b.get(i, j));
    F2Vec want = a.mul_vec(col);
    for (std::size_t i = 0; i < 5; ++i) CHECK(ab.get(i, j) == want.get(i));
  }
}

TEST_CASE("row space membership") {
  F2Matrix m(3, 5);
  m.set_row(0, F2Vec::unit(5, 0));
  m.set_row(1, F2Vec::unit(5, 2));
  F2Vec both = F2Vec::unit(5, 0);
  both ^= F2Vec::unit(5, 2);
  m.set_row(2, both);
  F2Matrix basis = m.row_space_basis();
  CHECK(basis.rows() == 2);
  CHECK(m.row_space_contains(both));
  CHECK(m.row_space_contains(F2Vec(5)));
  CHECK(!m.row_space_contains(F2Vec::unit(5, 1)));
  CHECK(!m.row_space_contains(F2Vec::ones(5)));
}

TEST_CASE("wide matrices cross word boundaries cleanly") {
  std::mt19937_64 rng(2024);
  F2Matrix m = random_matrix(rng, 4, 130);
  F2Matrix k = m.kernel_basis();
  CHECK(m.rank() + k.rows() == 130);
  for (std::size_t i = 0; i < k.rows(); ++i)
    CHECK(m.mul_vec(k.row(i)).is_zero());
  CHECK(m.rank() <= 4);
}
