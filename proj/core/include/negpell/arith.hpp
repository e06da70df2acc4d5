#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace negpell {

struct Factorization {
  uint64_t n = 1;
  std::vector<std::pair<uint64_t, int>> factors; // ascending primes

  bool squarefree() const {
    for (auto &[p, e] : factors)
      if (e > 1)
        return false;
    return true;
  }
};

bool is_prime(uint64_t n);
Factorization factor(uint64_t n);

// Jacobi symbol (a/n) for odd positive n; throws on even or nonpositive n.
int jacobi(long long a, long long n);

// Kronecker symbol, defined for every n (used for denominators equal to 2).
int kronecker(long long a, long long n);

// The isomorphism F_2 -> {+-1}: 0 -> +1, 1 -> -1.
inline int iota_sign(int bit) { return bit ? -1 : +1; }
inline int iota_inv(int sign) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("iota_inv: sign must be +-1");
  return sign == 1 ? 0 : 1;
}

uint64_t isqrt_u64(uint64_t n);
bool is_perfect_square(uint64_t n);

// Square root of a mod an odd prime p (Tonelli-Shanks); nullopt when a is a
// nonresidue. The returned root is the smaller of the pair.
std::optional<uint64_t> sqrt_mod(uint64_t a, uint64_t p);

// Squarefree d >= 2 all of whose prime divisors are 1 or 2 mod 4.
struct FamilyDElement {
  uint64_t d = 0;
  std::vector<uint64_t> primes; // ascending

  std::size_t omega() const { return primes.size(); }
};

// Classify a single integer; nullopt when d is not in the family.
std::optional<FamilyDElement> family_d_element(uint64_t d);

std::vector<FamilyDElement> sieve_family_D(uint64_t limit);

// Segmented streaming enumeration of the family over [lo, hi), ascending.
void for_each_family_D(uint64_t lo, uint64_t hi,
                       const std::function<void(const FamilyDElement &)> &fn);

struct NNiceReport {
  bool nice = false;
  bool gap_ok = false;       // p_i > D_1 implies 2 p_i < p_{i+1}
  bool spacing_ok = false;   // |(1/2) log log p_i - i| bound for i < r/3
  bool large_gap_ok = false; // some i in (sqrt(r)/2, r/2) with the log p_i bound
  bool in_regime = false;    // log N >= 1000 log 10
  double d1 = 0.0;
  double c0 = 0.0;
};

// log_n is the natural logarithm of N. Requires log N > e^e so that
// log log log N is defined and positive.
NNiceReport is_N_nice(const FamilyDElement &d, double log_n);

} // namespace negpell
