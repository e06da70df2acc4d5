#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace negpell {

// Product space X_1 x ... x X_r of opaque integer labels with a designated
// set S of doubled coordinates (bit i of s_mask set means coordinate i is
// doubled). Coordinate sets are sorted ascending and pairwise disjoint.
struct ProductSpace {
  std::vector<std::vector<int>> sets;
  uint32_t s_mask = 0;

  std::size_t r() const { return sets.size(); }
  bool doubled(std::size_t i) const { return (s_mask >> i) & 1u; }
};

// Validates and normalizes: sorts each set, rejects empty sets, duplicate
// labels, overlapping sets, and s_mask bits outside [0, r).
ProductSpace product_space(std::vector<std::vector<int>> sets, uint32_t s_mask);

// A point of Cube(X, T). Every coordinate carries a (lo, hi) slot; slots at
// coordinates outside the mask hold the same label twice, so lexicographic
// comparison needs no mask logic.
struct CubePoint {
  std::vector<std::pair<int, int>> slot;
  uint32_t mask = 0;

  bool degenerate() const {
    for (std::size_t i = 0; i < slot.size(); ++i)
      if (((mask >> i) & 1u) && slot[i].first == slot[i].second)
        return true;
    return false;
  }

  auto operator<=>(const CubePoint &) const = default;
};

// |Cube(X, T)|; throws std::overflow_error if it exceeds 2^40.
uint64_t cube_size(const ProductSpace &sp, uint32_t t_mask);

// All points of Cube(X, T) in canonical order: mixed-radix odometer, last
// coordinate fastest, pair slots enumerated first-component-major.
std::vector<CubePoint> cube_points(const ProductSpace &sp, uint32_t t_mask);

// Rank of a point in the cube_points order.
uint64_t cube_index(const ProductSpace &sp, const CubePoint &x);

// Subcube selector x(T'): the points of Cube(X, T') whose coordinates in
// x.mask - T' take values from x's pairs and that agree with x elsewhere.
// Sorted and deduplicated. Throws when T' is not a subset of x's mask.
std::vector<CubePoint> subcube(const ProductSpace &sp, const CubePoint &x,
                               uint32_t t_mask);

// Plain points (mask 0) bridge to label vectors.
std::vector<int> plain_labels(const CubePoint &x);
CubePoint plain_point(const std::vector<int> &labels);

// The Sigma map for F: Y -> GF(2), Y = keys of f, a subset of X. Returns one
// bit per point of Cube(X, S) in cube_points(sp, sp.s_mask) order:
// Sigma F(x) = sum over x(empty) of F when x is nondegenerate and
// x(empty) lies inside Y, and 0 otherwise.
std::vector<int> sigma(const ProductSpace &sp,
                       const std::map<std::vector<int>, int> &f);

// dim Add(X, S): the rank of the Sigma image over all F: X -> GF(2), found
// by elimination, cross-checked against the closed formula
// prod_{i in S}(|X_i| - 1) * prod_{i not in S}|X_i| (throws std::logic_error
// on disagreement). Throws std::length_error past the size bounds
// (2^20 cube points, 2^28 matrix bits).
uint64_t add_dim_formula(const ProductSpace &sp);
uint64_t add_dim(const ProductSpace &sp);

// One level (a subset T of S) of an additive system. in_c and f are indexed
// by cube_points(space, t_mask) order; f values are vectors in A_T encoded
// as a_dim-bit integers. f is stored on all of Cube(X, T) but only its
// restriction to C_T is part of the system. C_T^acc is derived:
// in_c[k] && f[k] == 0.
struct SystemLevel {
  uint32_t t_mask = 0;
  int a_dim = 0;
  std::vector<char> in_c;
  std::vector<uint32_t> f;
};

struct AdditiveSystem {
  ProductSpace space;
  std::vector<SystemLevel> levels; // every subset of s_mask, by (popcount, mask)

  const SystemLevel &level(uint32_t t_mask) const;
  SystemLevel &level(uint32_t t_mask);
};

struct ValidationReport {
  bool valid = true;
  std::string witness; // empty when valid; first violation otherwise
};

// Exhaustively checks the three additive-system axioms: the derived
// acceptance sets, the membership recursion C_T = {x : x(T - {i}) inside
// C_{T-{i}}^acc for all i in T}, and the three-point law
// F(x1) + F(x2) = F(x3) on every aligned triple in C_T.
ValidationReport validate_additive_system(const AdditiveSystem &sys);

struct DensityReport {
  double lhs = 0.0;    // |C_S^acc| / |Cube(X, S)|
  double rhs = 0.0;    // delta^(2^|S|) * a^(-3^|S|)
  double delta = 0.0;  // density of C_empty^acc in X
  uint64_t a = 1;      // max |A_T|
  bool pass = false;
};

// The acceptance-density lower bound, compared exactly in rational
// arithmetic. Rejects (std::invalid_argument) systems that fail validation.
DensityReport acceptance_density_check(const AdditiveSystem &sys);

// Seeded generator of valid additive systems: per level T it samples a
// potential G_T: X -> A_T and sets F_T = Sigma G_T (zero on degenerate
// points), which satisfies the three-point law in every coordinate; C_empty
// is a fair coin per point and the higher C_T follow the membership
// recursion. a_dim per level is drawn from [0, max_a_dim].
AdditiveSystem random_additive_system(const ProductSpace &sp, int max_a_dim,
                                      uint64_t seed);

// Finds Z_1, ..., Z_r with |Z_i| = b and prod Z_i inside Y, by exhaustive
// branch-and-prune over label combinations in lexicographic order (so the
// returned box is the lexicographically first one). nullopt means no box
// exists. y lists the member points of Y as label vectors.
std::optional<std::vector<std::vector<int>>>
find_box(const ProductSpace &sp, const std::vector<std::vector<int>> &y,
         int b);

// Second-moment inequality for truncated symbol conditions, evaluated
// exactly. The sum over all maps a: M_r u M_{r,P} -> GF(2) of
//   (k2!/2^(C(k0,k1)+k1|P|) - |{sigma in P_r(k2) : x in X^trun(sigma, a)}|)^2
// is compared against
//   2^(k0+|P|+1) k1^2 / k2 * 2^(-2C(k0,k1) - 2 k1 |P| + |M_r u M_{r,P}|) (k2!)^2.
// Both sides are reported normalized by 2^|M_r u M_{r,P}|. The role of the
// point x is abstracted to its symbol bits: beta_pair[i][j] (symmetric,
// diagonal ignored) and beta_aux[i][p].
struct SecondMomentParams {
  int r = 0;
  int k0 = 0;
  int k1 = 0;
  int k2 = 0;
  int p_count = 0;
};

struct SecondMomentReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

// Throws std::invalid_argument unless 0 <= k0 <= k1 <= k2 <= min(r, 7) and
// the precondition 2^(k0+|P|+1) k1^2 < k2 holds.
SecondMomentReport
permutation_second_moment(const SecondMomentParams &params,
                          const std::vector<std::vector<int>> &beta_pair,
                          const std::vector<std::vector<int>> &beta_aux);

} // namespace negpell
