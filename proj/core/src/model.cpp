#include "negpell/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace negpell {

namespace {

mpz_class pow2(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

} // namespace

CertifiedReal alpha(double tolerance) {
  if (tolerance < 1e-30)
    throw std::invalid_argument("alpha: tolerance below supported range");
  // Tail over odd j > J is 2^-(J') * 4/3 with J' the first odd index beyond
  // J; picking J = 120 makes it ~ 2^-121, far below any allowed tolerance.
  int J = 3;
  auto tail = [](int j) {
    int next_odd = (j % 2 == 0) ? j + 1 : j + 2;
    return std::ldexp(4.0 / 3.0, -next_odd);
  };
  while (tail(J) >= tolerance && J < 200)
    J += 2;
  mpq_class prod = 1;
  for (int j = 1; j <= J; j += 2) {
    mpq_class term(pow2(j) - 1, pow2(j));
    prod *= term;
  }
  CertifiedReal out;
  out.value = prod.get_d();
  out.error_bound = tail(J) + std::abs(out.value) *
                                  std::numeric_limits<double>::epsilon() * 4;
  return out;
}

mpz_class count_rect_rank(int m, int n, int k) {
  if (k < 0 || k > std::min(m, n))
    return 0;
  // [n choose k]_2 * prod_{i<k} (2^m - 2^i)
  mpq_class gauss = 1;
  for (int i = 0; i < k; ++i) {
    // gcd(2^a - 1, 2^b - 1) = 2^gcd(a,b) - 1 can exceed 1, and gmp rational
    // arithmetic requires canonical operands
    mpq_class term(pow2(n - i) - 1, pow2(i + 1) - 1);
    term.canonicalize();
    gauss *= term;
  }
  mpz_class cnt;
  assert(gauss.get_den() == 1);
  cnt = gauss.get_num();
  for (int i = 0; i < k; ++i)
    cnt *= pow2(m) - pow2(i);
  return cnt;
}

mpz_class count_sym_rank(int n, int k) {
  if (k < 0 || k > n)
    return 0;
  // Rank 2s:   prod_{i=1}^{s} 2^{2i}/(2^{2i}-1) * prod_{i=0}^{2s-1} (2^{n-i}-1)
  // Rank 2s+1: prod_{i=1}^{s} 2^{2i}/(2^{2i}-1) * prod_{i=0}^{2s}   (2^{n-i}-1)
  // Both cases share the second product over i = 0..k-1.
  int s = k / 2;
  mpq_class cnt = 1;
  for (int i = 1; i <= s; ++i)
    cnt *= mpq_class(pow2(2 * i), pow2(2 * i) - 1);
  for (int i = 0; i < k; ++i)
    cnt *= pow2(n - i) - 1;
  assert(cnt.get_den() == 1);
  return cnt.get_num();
}

ExactProb p_rect(int m, int n, int j) {
  if (j < 0 || j > n)
    throw std::invalid_argument("p_rect: need 0 <= j <= n");
  int k = n - j; // kernel rank j means matrix rank n - j
  mpq_class p(count_rect_rank(m, n, k), pow2((unsigned long)m * n));
  p.canonicalize();
  return p;
}

ExactProb p_sym(int r, int n) {
  if (n < 0 || n > r)
    throw std::invalid_argument("p_sym: need 0 <= n <= r");
  mpq_class p(count_sym_rank(r, r - n),
              pow2((unsigned long)r * (r + 1) / 2));
  p.canonicalize();
  return p;
}

CertifiedProb p_sym_limit(int n) {
  if (n < 0)
    throw std::invalid_argument("p_sym_limit: n must be >= 0");
  const int r_final = n + 60;
  CertifiedProb out;
  out.value = p_sym(r_final, n);
  // P_Sym(r, n) oscillates with the parity of r - n, so one-step differences
  // do not decay. Within each parity class the two-step differences halve;
  // that is verified on the computed window, and summing the certified
  // geometric tail along r_final's parity bounds the distance to the limit
  // by the last two-step difference.
  mpq_class prev2[2] = {p_sym(n + 2, n), n + 3 <= r_final ? p_sym(n + 3, n)
                                                          : mpq_class(0)};
  mpq_class prev_diff[2] = {-1, -1};
  mpq_class last_diff = 0;
  for (int r = n + 4; r <= r_final; ++r) {
    int par = (r - n) & 1;
    mpq_class cur = p_sym(r, n);
    mpq_class d = abs(cur - prev2[par]);
    if (prev_diff[par] >= 0 && d > prev_diff[par] / 2 && d > 0)
      throw std::logic_error("p_sym_limit: decay certificate failed");
    prev_diff[par] = d;
    prev2[par] = cur;
    if (r == r_final)
      last_diff = d;
  }
  out.error_bound = mpq_class(last_diff).get_d() +
                    std::numeric_limits<double>::denorm_min();
  return out;
}

MarkovKernel markov_kernel(int n_max) {
  if (n_max < 0)
    throw std::invalid_argument("markov_kernel: n_max must be >= 0");
  MarkovKernel k;
  k.n_max = n_max;
  k.raw.resize(n_max + 1);
  k.normalized.resize(n_max + 1);
  k.row_sums.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    k.raw[n].assign(n_max + 1, 0);
    k.normalized[n].assign(n_max + 1, 0);
    mpq_class sum = 0;
    for (int j = 0; j <= n; ++j) {
      mpq_class p = p_rect(n, n, j);
      k.normalized[n][j] = p;
      k.raw[n][j] = p / pow2(n);
      sum += k.raw[n][j];
    }
    k.row_sums[n] = sum;
    if (sum != mpq_class(1, pow2(n)))
      throw std::logic_error("markov_kernel: row sum is not 2^-n");
  }
  return k;
}

ExactProb pell_probability(int m) {
  if (m < 0)
    throw std::invalid_argument("pell_probability: m must be >= 0");
  mpq_class val(1, pow2(m + 1) - 1);
  mpq_class rhs = 0;
  for (int n = 0; n <= m; ++n)
    rhs += mpq_class(1, pow2(n + 1) - 1) * p_rect(m, m, n) / pow2(m);
  if (rhs != val)
    throw std::logic_error("pell_probability: kernel recursion failed");
  return val;
}

CertifiedReal stevenhagen_density() {
  const int M = 20;
  const int r_star = M + 60;
  mpq_class partial = 0;
  mpq_class head_mass = 0; // sum of P_Sym(r*, m) for m <= M
  double lift_error = 0.0; // finite-r replacement error, per term
  for (int m = 0; m <= M; ++m) {
    CertifiedProb lim = p_sym_limit(m);
    mpq_class at_r = p_sym(r_star, m);
    partial += at_r / (pow2(m + 1) - 1);
    head_mass += at_r;
    lift_error += lim.error_bound +
                  std::abs(mpq_class(at_r - lim.value).get_d());
  }
  // Tail: sum_{m>M} lim(m)/(2^{m+1}-1) <= (1 - head_mass + lift slack),
  // since the full symmetric rank distribution at r* sums to exactly 1.
  mpq_class tail_mass = 1 - head_mass;
  assert(tail_mass >= 0);
  CertifiedReal out;
  out.value = partial.get_d();
  out.error_bound = tail_mass.get_d() + lift_error +
                    std::abs(out.value) *
                        std::numeric_limits<double>::epsilon() * 8;
  return out;
}

mpz_class abelian_2group_aut_order(std::vector<int> exponents) {
  for (int e : exponents)
    if (e < 1)
      throw std::invalid_argument("abelian_2group_aut_order: exponents >= 1");
  std::sort(exponents.begin(), exponents.end());
  int n = (int)exponents.size();
  if (n == 0)
    return 1;
  // Hillar-Rhea count for A = directsum Z/p^{e_k}, ascending e_1 <= ... <= e_n:
  //   d_k = max { l : e_l = e_k },  c_k = min { l : e_l = e_k }  (1-based)
  //   |Aut| = prod_k (p^{d_k} - p^{k-1})
  //         * prod_j (p^{e_j})^{n - d_j}
  //         * prod_i (p^{e_i - 1})^{n - c_i + 1}
  std::vector<int> dk(n), ck(n);
  for (int k = 0; k < n; ++k) {
    int d = k, c = k;
    while (d + 1 < n && exponents[d + 1] == exponents[k])
      ++d;
    while (c - 1 >= 0 && exponents[c - 1] == exponents[k])
      --c;
    dk[k] = d + 1; // 1-based
    ck[k] = c + 1;
  }
  mpz_class aut = 1;
  for (int k = 0; k < n; ++k)
    aut *= pow2(dk[k]) - pow2(k);
  for (int j = 0; j < n; ++j)
    aut *= pow2((unsigned long)exponents[j] * (n - dk[j]));
  for (int i = 0; i < n; ++i)
    aut *= pow2((unsigned long)(exponents[i] - 1) * (n - ck[i] + 1));
  return aut;
}

CertifiedReal cl_mass(const std::vector<int> &exponents) {
  mpz_class aut = abelian_2group_aut_order(exponents);
  const int J = 120;
  mpq_class prod = 1;
  for (int i = 1; i <= J; ++i)
    prod *= mpq_class(pow2(i) - 1, pow2(i));
  mpq_class mass = prod / aut;
  CertifiedReal out;
  out.value = mass.get_d();
  out.error_bound = std::ldexp(2.0, -J) +
                    std::abs(out.value) *
                        std::numeric_limits<double>::epsilon() * 4;
  return out;
}

} // namespace negpell
