#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <optional>
#include <utility>
#include <vector>

#include "negpell/arith.hpp"
#include "negpell/f2.hpp"

namespace negpell {

// Symmetric GF(2) matrix of Legendre data between the prime divisors of d,
// with the diagonal fixed by the zero-row-sum convention.
struct SymbolAssignment {
  std::size_t r = 0;
  F2Matrix matrix{0, 0};
};

SymbolAssignment redei_assignment(const FamilyDElement &d);

// 4-rank of the narrow class group from the assignment matrix: the kernel
// dimension after dropping the last row and column.
int rk4(const FamilyDElement &d);

// Right kernel: (dimension, echelonized basis rows).
std::pair<std::size_t, F2Matrix> f2_kernel(const F2Matrix &m);

struct ConicSolution {
  mpz_class x, y, z; // x^2 = a y^2 + b z^2, gcd(x, y, z) = 1
};

// Descent solver for x^2 = a y^2 + b z^2 with a, b squarefree positive.
// nullopt means the conic has no rational point; bound exhaustion and
// malformed inputs throw instead.
std::optional<ConicSolution> solve_conic(uint64_t a, uint64_t b);

struct RedeiTriple {
  uint64_t a = 1, b = 1, c = 1;
};

// Pairwise coprime squarefree members, each 1 mod 4, every cross Legendre
// symbol +1.
bool redei_admissible(const RedeiTriple &t);

// Classical Redei symbol [a, b, c] in GF(2); throws on inadmissible triples
// and when no acceptably normalized conic solution is found.
int redei_symbol(const RedeiTriple &t);

// The symbol evaluated from up to `count` distinct acceptably normalized
// solutions, in orbit order. All entries must agree for the symbol to be
// well defined; tests check that independence directly.
std::vector<int> redei_symbol_samples(const RedeiTriple &t, std::size_t count);

// Diagonal symbol [a, c, c]: third argument equal to the conic's second
// coefficient, so every p | c ramifies there and the component is read off
// the unique p-unit embedding of alpha. Needs (a, c, 1) admissible. This is
// the correction term linking the plain symbol to the level-2 class group
// pairing: <Up(c), chi_a> on d = abc equals [a, b, c] + [a, c, c].
int redei_symbol_diagonal(uint64_t a, uint64_t c);

} // namespace negpell
