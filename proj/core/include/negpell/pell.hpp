#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <vector>

namespace negpell {

struct CFExpansion {
  uint64_t d = 0;
  uint64_t a0 = 0;
  std::vector<uint64_t> period; // a_1 .. a_l, minimal

  std::size_t period_length() const { return period.size(); }
};

// Continued fraction of sqrt(d). Throws on d < 2 or perfect squares.
CFExpansion cf_sqrt(uint64_t d);

// Period length alone, no allocation; the workhorse for density scans.
std::size_t cf_period_length(uint64_t d);

struct PellSolution {
  mpz_class x, y;
  int sign = 1; // x^2 - d y^2 = sign

  bool operator==(const PellSolution &o) const {
    return x == o.x && y == o.y && sign == o.sign;
  }
};

// Solution from the convergent at index l-1: minimal positive solution of
// x^2 - d y^2 = sign where sign = -1 exactly when the period length is odd.
PellSolution fundamental_solution(uint64_t d);

// Minimal solution of x^2 - d y^2 = +1 (the fundamental solution, squared in
// Z[sqrt(d)] when its norm is -1).
PellSolution plus_one_fundamental(uint64_t d);

// Integer solubility of x^2 - d y^2 = -1, by period parity.
bool neg_pell_soluble(uint64_t d);

// Rational solubility (Hasse-Minkowski): for squarefree d >= 2 this is
// exactly membership in the family (all prime divisors 1 or 2 mod 4).
// Throws on non-squarefree d.
bool rationally_soluble(uint64_t d);

} // namespace negpell
