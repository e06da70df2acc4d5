#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace negpell {

// Coordinate prime sets X_1, ..., X_r inside disjoint ordered intervals
// (s_i, t_i] with 2 < s_1, plus an auxiliary prime set P inside (1, s_1].
// Every member is a prime congruent to 1 or 2 mod 4; since s_1 > 2 the
// coordinate sets contain only primes = 1 mod 4, while P may contain 2.
struct Prebox {
  std::vector<std::pair<uint64_t, uint64_t>> intervals;
  std::vector<std::vector<uint64_t>> x;
  std::vector<uint64_t> p;

  std::size_t r() const { return x.size(); }
};

// Builds the prebox from interval bounds, filling each X_i with every
// admissible prime in its interval. Throws std::invalid_argument on
// misordered or overlapping intervals, s_1 <= 2, an empty coordinate set,
// or an invalid auxiliary prime.
Prebox build_prebox(const std::vector<std::pair<uint64_t, uint64_t>> &intervals,
                    const std::vector<uint64_t> &aux);

// target is the GF(2) value a(...): 0 demands symbol +1, 1 demands -1.
struct PairConstraint {
  int i = 0, j = 0; // 0-based coordinates, i < j; condition on (x_i / x_j)
  int target = 0;
};

struct AuxConstraint {
  int i = 0;       // coordinate
  int p_index = 0; // index into Prebox::p; condition on (x_i / p)
  int target = 0;
};

// Entries may repeat (a deliberately contradictory duplicate is legal and
// simply drives the count to 0); the expected value always uses the raw
// entry count.
struct SymbolConstraint {
  std::vector<PairConstraint> pairs;
  std::vector<AuxConstraint> aux;
};

struct CountResult {
  uint64_t count = 0;   // |X(a)|
  uint64_t total = 0;   // |X|
  double expected = 0;  // |X| / 2^(#entries)
  double deviation = 0; // |count - expected| / |X|
};

// Exact count of the tuples satisfying every constraint, by depth-first
// iteration with per-coordinate pruning; Jacobi/Kronecker symbols are
// precomputed per constraint. Throws std::length_error when |X| > 10^7.
CountResult count_X_a(const Prebox &box, const SymbolConstraint &constraint);

struct ScanResult {
  int trials = 0;
  double mean_deviation = 0;
  double max_deviation = 0;
};

// Draws `trials` random target maps on the full constraint set (every pair
// i < j and every (i, p)) and reports the deviation statistics. Deterministic
// under the seed.
ScanResult scan_deviation(const Prebox &box, int trials, uint64_t seed);

} // namespace negpell
