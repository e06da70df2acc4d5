#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <negpell/arith.hpp>

#include <gmpxx.h>

#include <cstdint>
#include <set>
#include <vector>

using namespace negpell;

TEST_CASE("primality on small and structured inputs") {
  CHECK(!is_prime(0));
  CHECK(!is_prime(1));
  CHECK(is_prime(2));
  CHECK(is_prime(3));
  CHECK(!is_prime(4));
  CHECK(is_prime(97));
  CHECK(!is_prime(561));          // Carmichael
  CHECK(!is_prime(3215031751ull)); // strong pseudoprime to first four bases
  CHECK(is_prime(4294967291ull));
  CHECK(is_prime(1000000007ull));
  CHECK(!is_prime(1000000007ull * 1000000007ull));
}

TEST_CASE("factorization recovers the input and sorts primes") {
  Factorization f = factor(2 * 2 * 3 * 5 * 5 * 13);
  CHECK(f.n == 3900);
  std::vector<std::pair<uint64_t, int>> want = {{2, 2}, {3, 1}, {5, 2}, {13, 1}};
  CHECK(f.factors == want);
  CHECK(!f.squarefree());
  CHECK(factor(1).factors.empty());
  CHECK(factor(1000000007ull).factors.size() == 1); // prime
  CHECK(factor(614889782588491410ull).factors.size() == 15); // primorial of 47

  // product check on a window
  for (uint64_t n = 2; n < 2000; ++n) {
    Factorization g = factor(n);
    uint64_t prod = 1;
    for (auto &[p, e] : g.factors) {
      CHECK(is_prime(p));
      for (int i = 0; i < e; ++i) prod *= p;
    }
    CHECK(prod == n);
  }
}

TEST_CASE("jacobi and kronecker agree with gmp") {
  for (int64_t a = -30; a <= 30; ++a) {
    for (uint64_t n = 1; n <= 61; n += 2) {
      mpz_class za(static_cast<long>(a)), zn(static_cast<unsigned long>(n));
      CHECK(jacobi(a, n) == mpz_jacobi(za.get_mpz_t(), zn.get_mpz_t()));
    }
    for (int64_t n = -20; n <= 20; ++n) {
      mpz_class za(static_cast<long>(a)), zn(static_cast<long>(n));
      CHECK(kronecker(a, n) == mpz_kronecker(za.get_mpz_t(), zn.get_mpz_t()));
    }
  }
  CHECK_THROWS(jacobi(3, 4));
  CHECK_THROWS(jacobi(3, 0));
}

TEST_CASE("additive and multiplicative sign encodings invert each other") {
  CHECK(iota_sign(0) == 1);
  CHECK(iota_sign(1) == -1);
  CHECK(iota_inv(1) == 0);
  CHECK(iota_inv(-1) == 1);
  CHECK(iota_inv(iota_sign(0)) == 0);
  CHECK(iota_inv(iota_sign(1)) == 1);
}

TEST_CASE("integer square roots and square detection") {
  CHECK(isqrt_u64(0) == 0);
  CHECK(isqrt_u64(1) == 1);
  CHECK(isqrt_u64(35) == 5);
  CHECK(isqrt_u64(36) == 6);
  CHECK(isqrt_u64(18446744073709551615ull) == 4294967295ull);
  for (uint64_t n = 0; n < 5000; ++n) {
    uint64_t r = isqrt_u64(n);
    CHECK(r * r <= n);
    CHECK((r + 1) * (r + 1) > n);
    CHECK(is_perfect_square(n) == (r * r == n));
  }
}

TEST_CASE("modular square roots") {
  for (uint64_t p : {3ull, 5ull, 13ull, 17ull, 97ull, 193ull}) {
    for (uint64_t a = 1; a < std::min<uint64_t>(p, 60); ++a) {
      auto r = sqrt_mod(a % p, p);
      bool square = false;
      for (uint64_t x = 0; x < p && !square; ++x)
        if (x * x % p == a % p) square = true;
      CHECK(r.has_value() == square);
      if (r) {
        CHECK((*r) * (*r) % p == a % p);
        CHECK(*r <= p - *r); // smaller of the pair
      }
    }
  }
  for (uint64_t a : {2ull, 3ull, 5ull, 1234567ull}) {
    auto r = sqrt_mod(a, 1000003);
    if (r) {
      CHECK((*r) * (*r) % 1000003 == a % 1000003);
      CHECK(*r <= 1000003 - *r);
    }
  }
}

TEST_CASE("family membership requires squarefree and primes 1 or 2 mod 4") {
  CHECK(family_d_element(2).has_value());
  CHECK(family_d_element(5).has_value());
  CHECK(family_d_element(10).has_value());
  CHECK(!family_d_element(1).has_value());
  CHECK(!family_d_element(3).has_value());   // 3 mod 4 prime
  CHECK(!family_d_element(4).has_value());   // not squarefree
  CHECK(!family_d_element(15).has_value());  // 3 | 15
  CHECK(!family_d_element(34 * 2).has_value());
  auto e = family_d_element(130);
  REQUIRE(e.has_value());
  CHECK(e->d == 130);
  CHECK(e->primes == std::vector<uint64_t>{2, 5, 13});
  CHECK(e->omega() == 3);
}

TEST_CASE("family sieve matches elementwise membership") {
  std::vector<FamilyDElement> got = sieve_family_D(20);
  std::vector<uint64_t> ds;
  for (auto &e : got) ds.push_back(e.d);
  CHECK(ds == std::vector<uint64_t>{2, 5, 10, 13, 17});

  std::vector<FamilyDElement> wide = sieve_family_D(30);
  ds.clear();
  for (auto &e : wide) ds.push_back(e.d);
  CHECK(ds == std::vector<uint64_t>{2, 5, 10, 13, 17, 26, 29});

  // sieve vs direct test, and the callback walks the same set in order
  std::vector<FamilyDElement> sieved = sieve_family_D(3000);
  std::set<uint64_t> from_sieve;
  for (auto &e : sieved) {
    from_sieve.insert(e.d);
    auto direct = family_d_element(e.d);
    REQUIRE(direct.has_value());
    CHECK(direct->primes == e.primes);
  }
  for (uint64_t d = 2; d <= 3000; ++d)
    CHECK(from_sieve.count(d) == (family_d_element(d).has_value() ? 1u : 0u));

  std::vector<uint64_t> walked;
  for_each_family_D(2, 3000, [&](const FamilyDElement &e) { walked.push_back(e.d); });
  std::vector<uint64_t> expect(from_sieve.begin(), from_sieve.end());
  CHECK(walked == expect);
}

TEST_CASE("gap conditions and the deep regime flag") {
  double deep = 1000.0 * 2.302585092994046 + 1.0;
  auto any = sieve_family_D(300);
  int nice = 0;
  for (auto &e : any) {
    NNiceReport rep = is_N_nice(e, deep);
    CHECK(rep.in_regime);
    CHECK(rep.d1 > 1.0);
    CHECK(rep.c0 > 0.0);
    CHECK(rep.nice == (rep.gap_ok && rep.spacing_ok && rep.large_gap_ok));
    if (rep.nice) ++nice;
  }
  CHECK(nice > 0);
  NNiceReport shallow = is_N_nice(any[0], 40.0);
  CHECK(!shallow.in_regime);
  CHECK_THROWS(is_N_nice(any[0], 2.0)); // below e^e
}
