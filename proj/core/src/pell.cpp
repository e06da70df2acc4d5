#include "negpell/pell.hpp"

#include "negpell/arith.hpp"

#include <cassert>
#include <stdexcept>

namespace negpell {

namespace {

// CF state for sqrt(d): x_k = (P_k + sqrt(d))/Q_k, a_k = floor(x_k).
// P, Q stay below 2*sqrt(d) + 1 after the first step, so 64-bit words are
// exact for every d < 2^62.
struct CFState {
  uint64_t d, a0, p, q;

  explicit CFState(uint64_t dd) : d(dd) {
    if (d < 2)
      throw std::invalid_argument("cf_sqrt: d must be >= 2");
    a0 = isqrt_u64(d);
    if (a0 * a0 == d)
      throw std::invalid_argument("cf_sqrt: d must not be a perfect square");
    if (d >= (uint64_t(1) << 62))
      throw std::invalid_argument("cf_sqrt: d too large for word state");
    p = a0;
    q = d - a0 * a0;
  }

  // Advance one step, returning a_k (k >= 1). Period ends when q == 1 has
  // just been consumed, i.e. when after the step q == d - a0^2 again and
  // p == a0; callers instead watch for q == 1 before stepping from it.
  uint64_t step() {
    uint64_t a = (a0 + p) / q;
    p = a * q - p;
    q = (d - p * p) / q;
    return a;
  }
};

} // namespace

std::size_t cf_period_length(uint64_t d) {
  CFState st(d);
  std::size_t len = 1;
  // After construction the state describes x_1; the period is the number of
  // steps until Q returns to 1 (each step emits one partial quotient).
  while (st.q != 1) {
    st.step();
    ++len;
  }
  return len;
}

CFExpansion cf_sqrt(uint64_t d) {
  CFExpansion cf;
  cf.d = d;
  CFState st(d);
  cf.a0 = st.a0;
  for (;;) {
    bool last = (st.q == 1);
    cf.period.push_back(st.step());
    if (last)
      break;
  }
  assert(cf.period.back() == 2 * cf.a0);
  return cf;
}

PellSolution fundamental_solution(uint64_t d) {
  CFExpansion cf = cf_sqrt(d);
  std::size_t l = cf.period_length();
  // Convergent h_k / k_k for k = l - 1 (indexing a_0 = cf.a0 as term 0).
  mpz_class h_prev = 1, h = cf.a0;
  mpz_class k_prev = 0, k = 1;
  for (std::size_t i = 0; i + 1 < l; ++i) {
    mpz_class a = (unsigned long)cf.period[i];
    mpz_class h_next = a * h + h_prev;
    mpz_class k_next = a * k + k_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  PellSolution sol;
  sol.x = h;
  sol.y = k;
  sol.sign = (l % 2 == 1) ? -1 : +1;
  mpz_class check = sol.x * sol.x - mpz_class((unsigned long)d) * sol.y * sol.y;
  if (check != sol.sign)
    throw std::logic_error("fundamental_solution: convergent check failed");
  return sol;
}

PellSolution plus_one_fundamental(uint64_t d) {
  PellSolution f = fundamental_solution(d);
  if (f.sign == 1)
    return f;
  PellSolution sq;
  sq.x = f.x * f.x + mpz_class((unsigned long)d) * f.y * f.y;
  sq.y = 2 * f.x * f.y;
  sq.sign = 1;
  mpz_class check = sq.x * sq.x - mpz_class((unsigned long)d) * sq.y * sq.y;
  if (check != 1)
    throw std::logic_error("plus_one_fundamental: squaring check failed");
  return sq;
}

bool neg_pell_soluble(uint64_t d) { return cf_period_length(d) % 2 == 1; }

bool rationally_soluble(uint64_t d) {
  if (d < 2)
    throw std::invalid_argument("rationally_soluble: d must be >= 2");
  Factorization f = factor(d);
  if (!f.squarefree())
    throw std::invalid_argument("rationally_soluble: d must be squarefree");
  for (auto &[p, e] : f.factors)
    if (p % 4 == 3)
      return false;
  return true;
}

} // namespace negpell
