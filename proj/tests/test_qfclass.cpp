#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <negpell/arith.hpp>
#include <negpell/pell.hpp>
#include <negpell/qfclass.hpp>

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>

using namespace negpell;

TEST_CASE("reduced form enumeration is sorted, reduced, and closed under rho") {
  for (uint64_t d : {5ull, 13ull, 34ull, 65ull, 85ull, 145ull, 221ull}) {
    int64_t delta = discriminant_of(*family_d_element(d));
    std::vector<QuadForm> forms = reduced_forms(delta);
    CHECK(!forms.empty());
    CHECK(std::is_sorted(forms.begin(), forms.end()));
    std::set<QuadForm> pool(forms.begin(), forms.end());
    CHECK(pool.size() == forms.size());
    for (const QuadForm &f : forms) {
      CHECK(f.disc() == delta);
      CHECK(is_reduced(f, delta));
      QuadForm g = rho(f);
      CHECK(g.disc() == delta);
      CHECK(pool.count(g) == 1);
    }
    // rho orbits partition the set: walking from any form returns to it
    for (const QuadForm &f : forms) {
      QuadForm g = rho(f);
      std::size_t steps = 1;
      while (!(g == f)) {
        g = rho(g);
        ++steps;
        REQUIRE(steps <= forms.size());
      }
    }
  }
}

TEST_CASE("reduce_form lands in the reduced set") {
  int64_t delta = discriminant_of(*family_d_element(34));
  std::vector<QuadForm> forms = reduced_forms(delta);
  std::set<QuadForm> pool(forms.begin(), forms.end());
  // translation keeps the discriminant but usually breaks reducedness
  for (const QuadForm &f : forms) {
    QuadForm shifted{f.a, f.b + 2 * f.a, f.a + f.b + f.c};
    CHECK(shifted.disc() == delta);
    QuadForm back = reduce_form(shifted);
    CHECK(pool.count(back) == 1);
  }
  CHECK_THROWS(reduced_forms(14)); // 2 mod 4
  CHECK_THROWS(reduced_forms(9));  // square
  CHECK_THROWS(reduced_forms(-4)); // definite
}

TEST_CASE("discriminant selection by residue class") {
  CHECK(discriminant_of(*family_d_element(5)) == 5);
  CHECK(discriminant_of(*family_d_element(13)) == 13);
  CHECK(discriminant_of(*family_d_element(2)) == 8);
  CHECK(discriminant_of(*family_d_element(10)) == 40);
  CHECK(discriminant_of(*family_d_element(34)) == 136);
}

TEST_CASE("narrow class numbers on small discriminants") {
  NarrowClassData d5 = narrow_class_group(*family_d_element(5));
  CHECK(d5.h_plus == 1);
  CHECK(d5.exponents.empty());
  CHECK(d5.sylow_rank() == 0);
  CHECK(d5.r_class_trivial());
  CHECK(d5.rk4() == 0);

  NarrowClassData d10 = narrow_class_group(*family_d_element(10));
  CHECK(d10.h_plus == 2);
  CHECK(d10.exponents == std::vector<int>{1});
  CHECK(d10.sylow_rank() == 1);
  CHECK(d10.r_class_trivial()); // 3^2 - 10 = -1

  NarrowClassData d34 = narrow_class_group(*family_d_element(34));
  CHECK(d34.h_plus == 4);
  CHECK(d34.exponents == std::vector<int>{2});
  CHECK(d34.rk4() == 1);
  CHECK(!d34.r_class_trivial());

  NarrowClassData d65 = narrow_class_group(*family_d_element(65));
  CHECK(d65.h_plus == 2);
  CHECK(d65.exponents == std::vector<int>{1});
  CHECK(d65.rk4() == 0);
  CHECK(d65.r_class_trivial()); // 8^2 - 65 = -1

  NarrowClassData d229 = narrow_class_group(*family_d_element(229));
  CHECK(d229.h_plus == 3);
  CHECK(d229.exponents.empty());
  CHECK(d229.r_class_trivial());
}

TEST_CASE("solubility equals triviality of the distinguished class") {
  for_each_family_D(2, 1500, [&](const FamilyDElement &e) {
    bool cf = neg_pell_soluble(e.d);
    CHECK(cf == sqrt_d_class_trivial(e));
    NarrowClassData data = narrow_class_group(e);
    CHECK(cf == data.r_class_trivial());
    // soluble iff narrow and ordinary class groups share their 2-part
    uint64_t narrow_two = 1;
    for (int ex : data.exponents) narrow_two <<= ex;
    uint64_t ordinary = ordinary_sylow_order(data);
    if (cf)
      CHECK(ordinary == narrow_two);
    else
      CHECK(2 * ordinary == narrow_two);
  });
}

TEST_CASE("pairing sequence ranks descend and settle the distinguished class") {
  ArtinSequence s34 = artin_sequence(*family_d_element(34));
  CHECK(!s34.pellian);
  CHECK(s34.r_in_b);

  ArtinSequence s229 = artin_sequence(*family_d_element(229));
  CHECK(s229.pellian);

  ArtinSequence s65 = artin_sequence(*family_d_element(65));
  CHECK(s65.pellian);

  for_each_family_D(2, 1200, [&](const FamilyDElement &e) {
    ArtinSequence seq = artin_sequence(e);
    CHECK(seq.r_in_b);
    CHECK(seq.pellian == neg_pell_soluble(e.d));
    std::size_t prev = SIZE_MAX;
    for (const F2Matrix &m : seq.matrices) {
      std::size_t r = m.rows();
      CHECK(r <= prev);
      prev = r;
    }
  });
}

TEST_CASE("pairing rejects arguments outside the required subgroups") {
  // d = 34 has 4-Sylow Z/4. Level 3 needs the class inside 4*A[8] = {0},
  // but ramified prime classes only reach the 2-torsion {0, 2}. They
  // generate the 2-torsion, so some indicator vector lands on 2 and must
  // be rejected.
  FamilyDElement e34 = *family_d_element(34);
  int rejected = 0;
  for (F2Vec v : {F2Vec::unit(2, 0), F2Vec::unit(2, 1), F2Vec::ones(2)}) {
    try {
      artin_pairing(e34, v, v, 3);
    } catch (const std::logic_error &) {
      ++rejected;
    }
  }
  CHECK(rejected >= 1);
}

TEST_CASE("class data serialization round-trips") {
  NarrowClassData d65 = narrow_class_group(*family_d_element(65));
  std::string line = serialize_class_data(d65);
  NarrowClassData back = parse_class_data(line, 65);
  CHECK(back.d == d65.d);
  CHECK(back.delta == d65.delta);
  CHECK(back.h_plus == d65.h_plus);
  CHECK(back.exponents == d65.exponents);
  CHECK(back.r_class == d65.r_class);
  CHECK(back.from_cache);
  CHECK(!back.has_tau);

  // full snapshot through a stream
  std::vector<NarrowClassData> entries;
  for (uint64_t d : {5ull, 10ull, 34ull, 65ull})
    entries.push_back(narrow_class_group(*family_d_element(d)));
  std::ostringstream os;
  save_class_cache(os, entries);
  std::istringstream is(os.str());
  class_cache_clear();
  std::size_t n = load_class_cache(is);
  CHECK(n == entries.size());
  CHECK(class_cache_size() >= entries.size());
  class_cache_clear();
  CHECK(class_cache_size() == 0);
}

TEST_CASE("cached recomputation is consistent") {
  class_cache_clear();
  NarrowClassData first = narrow_class_group(*family_d_element(145));
  NarrowClassData second = narrow_class_group(*family_d_element(145));
  CHECK(second.h_plus == first.h_plus);
  CHECK(second.exponents == first.exponents);
  CHECK(second.from_cache);
}
