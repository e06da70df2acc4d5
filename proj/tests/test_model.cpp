#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <negpell/model.hpp>

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <vector>

using namespace negpell;

namespace {

// independent rank counter over all matrices, bit rows, plain elimination
int rank_bits(std::vector<uint32_t> rows, int cols) {
  int r = 0;
  for (int c = 0; c < cols; ++c) {
    std::size_t piv = SIZE_MAX;
    for (std::size_t i = r; i < rows.size(); ++i)
      if (rows[i] >> c & 1) { piv = i; break; }
    if (piv == SIZE_MAX) continue;
    std::swap(rows[r], rows[piv]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != (std::size_t)r && (rows[i] >> c & 1)) rows[i] ^= rows[r];
    ++r;
  }
  return r;
}

mpz_class brute_rect_count(int m, int n, int k) {
  mpz_class total = 0;
  uint64_t cells = (uint64_t)m * n;
  for (uint64_t bits = 0; bits < (1ull << cells); ++bits) {
    std::vector<uint32_t> rows(m, 0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (bits >> (i * n + j) & 1) rows[i] |= 1u << j;
    if (rank_bits(rows, n) == k) ++total;
  }
  return total;
}

mpz_class brute_sym_count(int r, int k) {
  mpz_class total = 0;
  int cells = r * (r + 1) / 2;
  for (uint64_t bits = 0; bits < (1ull << cells); ++bits) {
    std::vector<uint32_t> rows(r, 0);
    int t = 0;
    for (int i = 0; i < r; ++i)
      for (int j = i; j < r; ++j) {
        if (bits >> t & 1) {
          rows[i] |= 1u << j;
          rows[j] |= 1u << i;
        }
        ++t;
      }
    if (rank_bits(rows, r) == k) ++total;
  }
  return total;
}

} // namespace

TEST_CASE("rectangular rank counts match brute force") {
  for (int m = 0; m <= 4; ++m)
    for (int n = 0; n <= 4; ++n) {
      if (m * n > 16) continue;
      mpz_class all = 0;
      for (int k = 0; k <= std::min(m, n); ++k) {
        mpz_class fast = count_rect_rank(m, n, k);
        CHECK(fast == brute_rect_count(m, n, k));
        all += fast;
      }
      mpz_class want = 1;
      for (int i = 0; i < m * n; ++i) want *= 2;
      CHECK(all == want);
    }
  CHECK(count_rect_rank(2, 2, 2) == 6); // |GL(2, F2)|
}

TEST_CASE("symmetric rank counts match brute force") {
  for (int r = 0; r <= 5; ++r) {
    mpz_class all = 0;
    for (int k = 0; k <= r; ++k) {
      mpz_class fast = count_sym_rank(r, k);
      CHECK(fast == brute_sym_count(r, k));
      all += fast;
    }
    mpz_class want = 1;
    for (int i = 0; i < r * (r + 1) / 2; ++i) want *= 2;
    CHECK(all == want);
  }
}

TEST_CASE("kernel dimension law for square matrices") {
  CHECK(p_rect(2, 2, 0) == mpq_class(3, 8));
  CHECK(p_rect(2, 2, 1) == mpq_class(9, 16));
  CHECK(p_rect(2, 2, 2) == mpq_class(1, 16));
  for (int n = 0; n <= 6; ++n) {
    mpq_class sum = 0;
    for (int j = 0; j <= n; ++j) sum += p_rect(n, n, j);
    CHECK(sum == 1);
  }
}

TEST_CASE("symmetric corank distribution sums to one and matches counts") {
  for (int r = 0; r <= 8; ++r) {
    mpq_class sum = 0;
    for (int n = 0; n <= r; ++n) {
      mpq_class p = p_sym(r, n);
      mpz_class denom = 1;
      for (int i = 0; i < r * (r + 1) / 2; ++i) denom *= 2;
      CHECK(p == mpq_class(count_sym_rank(r, r - n), denom));
      sum += p;
    }
    CHECK(sum == 1);
  }
}

TEST_CASE("limits of corank probabilities carry certified error bounds") {
  for (int n = 0; n <= 3; ++n) {
    CertifiedProb lim = p_sym_limit(n);
    CHECK(lim.error_bound > 0);
    CHECK(lim.error_bound < 1e-12);
    // the certified bound really contains later terms
    mpq_class far = p_sym(n + 64, n);
    double gap = std::abs(mpq_class(lim.value - far).get_d());
    CHECK(gap <= lim.error_bound * 4 + 1e-15);
  }
  // known limit values; coranks 0 and 1 share the same limit
  CertifiedProb l0 = p_sym_limit(0);
  CHECK(l0.value.get_d() == doctest::Approx(0.4194224418).epsilon(1e-6));
  CertifiedProb l1 = p_sym_limit(1);
  CHECK(l1.value.get_d() == doctest::Approx(0.4194224418).epsilon(1e-6));
  CertifiedProb l2 = p_sym_limit(2);
  CHECK(l2.value.get_d() == doctest::Approx(0.1398074806).epsilon(1e-6));
}

TEST_CASE("alpha constant") {
  CertifiedReal a = alpha(1e-13);
  CHECK(a.error_bound <= 1e-13);
  CHECK(a.value == doctest::Approx(0.419422).epsilon(1e-5));
  // tighter tolerance nests inside looser one
  CertifiedReal b = alpha(1e-9);
  CHECK(std::abs(a.value - b.value) <= a.error_bound + b.error_bound);
}

TEST_CASE("density constant is one minus alpha") {
  CertifiedReal s = stevenhagen_density();
  CertifiedReal a = alpha(1e-13);
  CHECK(std::abs(s.value - (1.0 - a.value)) <= s.error_bound + a.error_bound + 1e-15);
  CHECK(s.value == doctest::Approx(0.580577).epsilon(1e-5));
}

TEST_CASE("markov kernel rows") {
  MarkovKernel k = markov_kernel(6);
  CHECK(k.n_max == 6);
  // raw row n sums to 2^-n, normalized rows sum to 1
  for (int i = 0; i <= 6; ++i) {
    mpq_class raw_sum = 0, norm_sum = 0;
    for (int j = 0; j <= 6; ++j) {
      raw_sum += k.raw[i][j];
      norm_sum += k.normalized[i][j];
    }
    mpq_class want(1);
    for (int t = 0; t < i; ++t) want /= 2;
    CHECK(raw_sum == want);
    CHECK(norm_sum == 1);
    CHECK(k.row_sums[i] == want);
  }
  CHECK(k.raw[1][0] == mpq_class(1, 4));
  CHECK(k.raw[1][1] == mpq_class(1, 4));
  CHECK(k.normalized[1][0] == mpq_class(1, 2));
}

TEST_CASE("pellian probability recursion") {
  CHECK(pell_probability(0) == 1);
  for (int m = 1; m <= 20; ++m) {
    mpq_class p = pell_probability(m);
    mpz_class denom = (mpz_class(1) << (m + 1)) - 1;
    CHECK(p == mpq_class(1, denom));
  }
}

TEST_CASE("automorphism counts of abelian two groups") {
  CHECK(abelian_2group_aut_order({}) == 1);
  CHECK(abelian_2group_aut_order({1}) == 1);
  CHECK(abelian_2group_aut_order({1, 1}) == 6);   // GL(2, F2)
  CHECK(abelian_2group_aut_order({1, 1, 1}) == 168); // GL(3, F2)
  CHECK(abelian_2group_aut_order({2}) == 2);      // Z/4
  CHECK(abelian_2group_aut_order({3}) == 4);      // Z/8
  CHECK(abelian_2group_aut_order({2, 1}) == 8);   // Z/4 x Z/2
}

TEST_CASE("mass of a class group scales inversely with automorphisms") {
  CertifiedReal m0 = cl_mass({});
  CHECK(m0.value == doctest::Approx(0.2887880951).epsilon(1e-8));
  CHECK(m0.error_bound < 1e-12);
  CertifiedReal m11 = cl_mass({1, 1});
  CHECK(m11.value == doctest::Approx(m0.value / 6).epsilon(1e-10));
  CertifiedReal m2 = cl_mass({2});
  CHECK(m2.value == doctest::Approx(m0.value / 2).epsilon(1e-10));
}
