#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <negpell/combi.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

using namespace negpell;

TEST_CASE("product space validation and normalization") {
  ProductSpace sp = product_space({{2, 1}, {3, 4, 5}}, 0b01);
  CHECK(sp.r() == 2);
  CHECK(sp.sets[0] == std::vector<int>{1, 2});
  CHECK(sp.doubled(0));
  CHECK(!sp.doubled(1));

  CHECK_THROWS(product_space({{1}, {}}, 0));        // empty set
  CHECK_THROWS(product_space({{1, 1}}, 0));         // duplicate label
  CHECK_THROWS(product_space({{1, 2}, {2, 3}}, 0)); // overlap
  CHECK_THROWS(product_space({{1, 2}}, 0b10));      // mask past r
}

TEST_CASE("cube enumeration order and indexing") {
  ProductSpace sp = product_space({{1, 2}, {3, 4, 5}}, 0b01);
  CHECK(cube_size(sp, 0b01) == 12);
  CHECK(cube_size(sp, 0b00) == 6);
  CHECK(cube_size(sp, 0b11) == 36);

  std::vector<CubePoint> pts = cube_points(sp, 0b01);
  REQUIRE(pts.size() == 12);
  // odometer: last coordinate fastest, pairs first-component-major
  CHECK(pts[0].slot == std::vector<std::pair<int, int>>{{1, 1}, {3, 3}});
  CHECK(pts[1].slot == std::vector<std::pair<int, int>>{{1, 1}, {4, 4}});
  CHECK(pts[3].slot == std::vector<std::pair<int, int>>{{1, 2}, {3, 3}});
  CHECK(pts[0].degenerate());
  CHECK(!pts[3].degenerate());
  for (std::size_t k = 0; k < pts.size(); ++k)
    CHECK(cube_index(sp, pts[k]) == k);

  // doubled sets of a thousand labels overflow the size guard
  std::vector<std::vector<int>> big(4);
  for (int s = 0; s < 4; ++s)
    for (int v = 0; v < 1024; ++v) big[s].push_back(s * 2000 + v);
  ProductSpace huge = product_space(big, 0b1111);
  CHECK_THROWS_AS((void)cube_size(huge, 0b1111), std::overflow_error);
}

TEST_CASE("subcube selection") {
  ProductSpace sp = product_space({{1, 2}, {3, 4, 5}}, 0b11);
  CubePoint x{{{1, 2}, {3, 4}}, 0b11};

  std::vector<CubePoint> sub = subcube(sp, x, 0b10);
  REQUIRE(sub.size() == 2);
  CHECK(sub[0].slot == std::vector<std::pair<int, int>>{{1, 1}, {3, 4}});
  CHECK(sub[1].slot == std::vector<std::pair<int, int>>{{2, 2}, {3, 4}});
  CHECK(sub[0].mask == 0b10);

  std::vector<CubePoint> corners = subcube(sp, x, 0);
  REQUIRE(corners.size() == 4);
  CHECK(plain_labels(corners[0]) == std::vector<int>{1, 3});
  CHECK(plain_labels(corners[3]) == std::vector<int>{2, 4});

  // degenerate pair collapses
  CubePoint deg{{{1, 1}, {3, 4}}, 0b11};
  CHECK(subcube(sp, deg, 0).size() == 2);

  CHECK_THROWS(subcube(sp, sub[0], 0b01)); // T' not inside the point's mask
}

TEST_CASE("plain point round trip") {
  std::vector<int> labels = {7, -2, 9};
  CubePoint p = plain_point(labels);
  CHECK(p.mask == 0);
  CHECK(plain_labels(p) == labels);
}

TEST_CASE("sigma sums function values over corners") {
  ProductSpace sp = product_space({{0, 1}}, 0b1);
  std::map<std::vector<int>, int> f = {{{0}, 1}, {{1}, 0}};
  // cube order: (0,0) (0,1) (1,0) (1,1); degenerate points map to zero
  CHECK(sigma(sp, f) == std::vector<int>{0, 1, 1, 0});

  // points outside the domain kill the sum
  std::map<std::vector<int>, int> partial = {{{0}, 1}};
  CHECK(sigma(sp, partial) == std::vector<int>{0, 0, 0, 0});

  // additivity of sigma in the function argument
  ProductSpace sp2 = product_space({{0, 1}, {2, 3, 4}}, 0b11);
  std::map<std::vector<int>, int> g1, g2, gx;
  int t = 0;
  for (int a : {0, 1})
    for (int b : {2, 3, 4}) {
      int v1 = (t * 37 + 11) % 2, v2 = (t * 53 + 7) % 3 % 2;
      g1[{a, b}] = v1;
      g2[{a, b}] = v2;
      gx[{a, b}] = v1 ^ v2;
      ++t;
    }
  std::vector<int> s1 = sigma(sp2, g1), s2 = sigma(sp2, g2), sx = sigma(sp2, gx);
  REQUIRE(s1.size() == sx.size());
  for (std::size_t i = 0; i < sx.size(); ++i)
    CHECK(sx[i] == (s1[i] ^ s2[i]));
}

TEST_CASE("additive dimension formula matches elimination") {
  CHECK(add_dim_formula(product_space({{1, 2}, {3, 4, 5}}, 0b01)) == 3);
  CHECK(add_dim_formula(product_space({{1, 2}, {3, 4, 5}}, 0b11)) == 2);
  CHECK(add_dim_formula(product_space({{1, 2}, {3, 4, 5}}, 0)) == 6);
  for (uint32_t mask = 0; mask < 8; ++mask) {
    ProductSpace sp = product_space({{1, 2, 3}, {4, 5}, {6, 7, 8}}, mask);
    CHECK(add_dim(sp) == add_dim_formula(sp));
  }
}

TEST_CASE("random additive systems validate and meet the density bound") {
  ProductSpace sp = product_space({{1, 2, 3}, {4, 5}}, 0b11);
  for (uint64_t seed : {1ull, 2ull, 3ull, 99ull, 12345ull}) {
    AdditiveSystem sys = random_additive_system(sp, 2, seed);
    CHECK(sys.levels.size() == 4); // subsets of S
    ValidationReport rep = validate_additive_system(sys);
    CHECK(rep.valid);
    CHECK(rep.witness.empty());
    DensityReport dr = acceptance_density_check(sys);
    CHECK(dr.pass);
    CHECK(dr.lhs >= dr.rhs);
    CHECK(dr.delta >= 0.0);
    CHECK(dr.delta <= 1.0);
    CHECK(dr.a >= 1);
  }

  // same seed reproduces the same system
  AdditiveSystem a = random_additive_system(sp, 2, 42);
  AdditiveSystem b = random_additive_system(sp, 2, 42);
  REQUIRE(a.levels.size() == b.levels.size());
  for (std::size_t i = 0; i < a.levels.size(); ++i) {
    CHECK(a.levels[i].t_mask == b.levels[i].t_mask);
    CHECK(a.levels[i].a_dim == b.levels[i].a_dim);
    CHECK(a.levels[i].in_c == b.levels[i].in_c);
    CHECK(a.levels[i].f == b.levels[i].f);
  }
}

TEST_CASE("level lookup finds each subset") {
  ProductSpace sp = product_space({{1, 2}, {3, 4}, {5, 6}}, 0b101);
  AdditiveSystem sys = random_additive_system(sp, 1, 7);
  for (uint32_t t : {0u, 1u, 4u, 5u}) CHECK(sys.level(t).t_mask == t);
  CHECK_THROWS(sys.level(2)); // not a subset of S
}

TEST_CASE("tampered systems are rejected") {
  ProductSpace sp = product_space({{1, 2, 3}, {4, 5}}, 0b11);
  bool saw_invalid = false;
  for (uint64_t seed = 1; seed <= 30 && !saw_invalid; ++seed) {
    AdditiveSystem sys = random_additive_system(sp, 2, seed);
    for (auto &lvl : sys.levels) {
      if (lvl.t_mask == 0 || lvl.a_dim == 0) continue;
      for (std::size_t k = 0; k < lvl.f.size(); ++k) {
        if (!lvl.in_c[k]) continue;
        AdditiveSystem copy = sys;
        copy.level(lvl.t_mask).f[k] ^= 1;
        ValidationReport rep = validate_additive_system(copy);
        if (!rep.valid) {
          CHECK(!rep.witness.empty());
          CHECK_THROWS_AS((void)acceptance_density_check(copy),
                          std::invalid_argument);
          saw_invalid = true;
          break;
        }
      }
      if (saw_invalid) break;
    }
  }
  CHECK(saw_invalid);
}

TEST_CASE("box finding is exhaustive and lexicographically first") {
  ProductSpace sp = product_space({{1, 2, 3}, {4, 5, 6}}, 0);
  std::vector<std::vector<int>> all;
  for (int a : {1, 2, 3})
    for (int b : {4, 5, 6}) all.push_back({a, b});

  auto full = find_box(sp, all, 2);
  REQUIRE(full.has_value());
  CHECK(*full == std::vector<std::vector<int>>{{1, 2}, {4, 5}});
  auto whole = find_box(sp, all, 3);
  REQUIRE(whole.has_value());
  CHECK(*whole == std::vector<std::vector<int>>{{1, 2, 3}, {4, 5, 6}});

  std::vector<std::vector<int>> holed;
  for (auto &p : all)
    if (!(p[0] == 1 && p[1] == 4)) holed.push_back(p);
  auto dodged = find_box(sp, holed, 2);
  REQUIRE(dodged.has_value());
  CHECK(*dodged == std::vector<std::vector<int>>{{1, 2}, {5, 6}});
  CHECK(!find_box(sp, holed, 3).has_value());

  CHECK(!find_box(sp, {}, 1).has_value());
}

TEST_CASE("second moment inequality on admissible parameters") {
  SecondMomentParams p;
  p.r = 7;
  p.k0 = 0;
  p.k1 = 1;
  p.k2 = 7;
  p.p_count = 0;
  std::vector<std::vector<int>> beta_pair(7, std::vector<int>(7, 0));
  std::vector<std::vector<int>> beta_aux(7);
  SecondMomentReport rep = permutation_second_moment(p, beta_pair, beta_aux);
  CHECK(rep.pass);
  CHECK(rep.lhs <= rep.rhs);

  // alternating symbol bits
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      if (i != j) beta_pair[i][j] = beta_pair[j][i] = (i ^ j) & 1;
  SecondMomentReport rep2 = permutation_second_moment(p, beta_pair, beta_aux);
  CHECK(rep2.pass);

  // deterministic across calls
  SecondMomentReport rep3 = permutation_second_moment(p, beta_pair, beta_aux);
  CHECK(rep3.lhs == rep2.lhs);
  CHECK(rep3.rhs == rep2.rhs);
}

TEST_CASE("second moment rejects out-of-range parameters") {
  std::vector<std::vector<int>> bp(8, std::vector<int>(8, 0));
  std::vector<std::vector<int>> ba(8);
  SecondMomentParams bad;
  bad.r = 7;
  bad.k0 = 0;
  bad.k1 = 2;
  bad.k2 = 7;
  bad.p_count = 0; // 2^1 * 4 = 8 >= 7
  CHECK_THROWS_AS((void)permutation_second_moment(bad, bp, ba),
                  std::invalid_argument);

  SecondMomentParams past;
  past.r = 3;
  past.k0 = 0;
  past.k1 = 1;
  past.k2 = 5; // k2 > min(r, 7)
  past.p_count = 0;
  CHECK_THROWS_AS((void)permutation_second_moment(past, bp, ba),
                  std::invalid_argument);

  SecondMomentParams order;
  order.r = 7;
  order.k0 = 2;
  order.k1 = 1;
  order.k2 = 5; // k0 > k1
  order.p_count = 0;
  CHECK_THROWS_AS((void)permutation_second_moment(order, bp, ba),
                  std::invalid_argument);
}
