#pragma once

#include "negpell/arith.hpp"
#include "negpell/f2.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace negpell {

// Integral binary quadratic form a x^2 + b xy + c y^2 of positive nonsquare
// discriminant b^2 - 4ac.
struct QuadForm {
  int64_t a = 0, b = 0, c = 0;

  int64_t disc() const { return b * b - 4 * a * c; }
  bool operator==(const QuadForm &o) const {
    return a == o.a && b == o.b && c == o.c;
  }
  bool operator<(const QuadForm &o) const {
    if (a != o.a)
      return a < o.a;
    if (b != o.b)
      return b < o.b;
    return c < o.c;
  }
};

bool is_reduced(const QuadForm &f, int64_t delta);

// One step of the reduction walk rho; maps reduced forms to the next form
// of their cycle.
QuadForm rho(const QuadForm &f, int64_t delta);

QuadForm reduce_form(QuadForm f, int64_t delta);

// All reduced forms of discriminant delta (> 0, nonsquare, 0 or 1 mod 4),
// sorted. Throws on invalid delta.
std::vector<QuadForm> reduced_forms(int64_t delta);

int64_t discriminant_of(const FamilyDElement &d); // d or 4d

struct NarrowClassData {
  FamilyDElement d;
  int64_t delta = 0;
  uint64_t h_plus = 0;

  // 2-Sylow: cyclic factors of order 2^exponents[l], descending, with a
  // reduced representative form for each generator.
  std::vector<int> exponents;
  std::vector<QuadForm> generators;

  // Genus character table: chi_bits[l][j] = iota_inv(chi_{p_j}(generator l)).
  // Empty when the data was loaded from the on-disk cache.
  std::vector<std::vector<int>> chi_bits;

  // ramified_coords[i][l]: coordinate of the class of the ambiguous form
  // above p_i in the cyclic factor l (an integer mod 2^exponents[l]).
  std::vector<std::vector<uint64_t>> ramified_coords;
  std::vector<uint64_t> r_class; // coordinates of the product class

  // Coordinates of the class of (-1, b, c); quotienting by it yields the
  // ordinary class group. Not serialized, so absent on cache-loaded data.
  std::vector<uint64_t> tau_coords;
  bool has_tau = false;

  bool from_cache = false;

  std::size_t sylow_rank() const { return exponents.size(); }
  bool r_class_trivial() const {
    for (uint64_t c : r_class)
      if (c)
        return false;
    return true;
  }
  // dim 2Cl[4] = number of cyclic factors of order >= 4.
  int rk4() const {
    int n = 0;
    for (int e : exponents)
      if (e >= 2)
        ++n;
    return n;
  }
};

struct ArtinSequence {
  // matrices[t] is Art_{t+2}, pairing A_{t+2} x B_{t+2} in the stored bases.
  std::vector<F2Matrix> matrices;
  // a_basis[t], b_basis[t]: rows are basis vectors of A_{t+2}, B_{t+2} as
  // subspaces of V = F_2^r (ascending-prime coordinates), echelonized.
  std::vector<F2Matrix> a_basis;
  std::vector<F2Matrix> b_basis;
  // The all-ones vector R written in each b_basis (validity: R lies in
  // every B_k).
  std::vector<F2Vec> r_in_b;
  // Bases of A_{last_k+1}, B_{last_k+1}: the state after the last computed
  // pairing (equal to A_2, B_2 when none was).
  F2Matrix a_final;
  F2Matrix b_final;
  bool pellian = false;
  int last_k = 1; // largest k whose pairing was computed; 1 when none
};

// Full class-group oracle for d in the family; delta capped (default 4*10^6).
NarrowClassData narrow_class_group(const FamilyDElement &d,
                                   int64_t delta_bound = 4000000);

ArtinSequence artin_sequence(const FamilyDElement &d,
                             int64_t delta_bound = 4000000);

bool sqrt_d_class_trivial(const FamilyDElement &d,
                          int64_t delta_bound = 4000000);

// Level-k Artin pairing <Up(v), psi-lift of chi_w> for v, w in F_2^r
// (coordinates index the ascending prime divisors of d). Throws
// std::logic_error when the arguments violate the level-k membership
// conditions, so a returned bit is always a well-defined pairing value.
int artin_pairing(const FamilyDElement &d, const F2Vec &v, const F2Vec &w,
                  int k, int64_t delta_bound = 4000000);

// Order of the 2-Sylow of the ordinary class group, obtained from the
// narrow one by quotienting by the class of a form of leading coefficient
// -1. Pellian d are exactly those where this equals the narrow order.
uint64_t ordinary_sylow_order(const NarrowClassData &data);

// Process-wide memo cache, keyed by delta. Thread-safe; results of repeated
// computations are identical so insertion is idempotent.
void class_cache_clear();
std::size_t class_cache_size();

// Line-oriented text cache: one record per line,
//   delta;h_plus;e_1,...,e_g;row|row|...
// with each row the comma-separated ramified coordinates of one prime.
std::string serialize_class_data(const NarrowClassData &data);
NarrowClassData parse_class_data(const std::string &line,
                                 const FamilyDElement &d);
void save_class_cache(std::ostream &os,
                      const std::vector<NarrowClassData> &entries);
// Loads records into the process cache; returns number of records.
std::size_t load_class_cache(std::istream &is);

} // namespace negpell
