#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <vector>

namespace negpell {

using ExactProb = mpq_class;

struct CertifiedReal {
  double value = 0.0;
  double error_bound = 0.0; // |value - true| <= error_bound
};

struct CertifiedProb {
  ExactProb value;          // exact rational stand-in for the limit
  double error_bound = 0.0; // |value - limit| <= error_bound
};

// alpha = prod over odd j of (1 - 2^-j); the certificate bound is the tail
// sum over odd j beyond the truncation point plus rounding slack.
CertifiedReal alpha(double tolerance);

// Number of m x n matrices over F_2 of rank k, exact.
mpz_class count_rect_rank(int m, int n, int k);

// Number of symmetric n x n matrices over F_2 of rank k, exact.
mpz_class count_sym_rank(int n, int k);

// P(m,n,j): uniform m x n matrix over F_2 has right kernel of rank j.
ExactProb p_rect(int m, int n, int j);

// P_Sym(r,n): uniform symmetric r x r matrix over F_2 has kernel rank n.
ExactProb p_sym(int r, int n);

// lim_r P_Sym(r,n), evaluated at r = n + 60 with a decay certificate.
CertifiedProb p_sym_limit(int n);

struct MarkovKernel {
  int n_max = 0;
  // raw[n][j] = P(n,n,j) / 2^n; rows sum to exactly 2^-n.
  std::vector<std::vector<ExactProb>> raw;
  // normalized[n][j] = P(n,n,j); rows sum to exactly 1.
  std::vector<std::vector<ExactProb>> normalized;
  std::vector<ExactProb> row_sums; // of raw
};

MarkovKernel markov_kernel(int n_max);

// 1/(2^{m+1} - 1); verifies the kernel recursion
//   1/(2^{m+1}-1) = sum_{n=0}^{m} 1/(2^{n+1}-1) * P(m,m,n)/2^m
// exactly and throws if it fails.
ExactProb pell_probability(int m);

// sum_m (lim_r P_Sym(r,m)) / (2^{m+1}-1), with certificate; checked against
// 1 - alpha inside the acceptance suite.
CertifiedReal stevenhagen_density();

// |Aut(A)| for A = directsum Z/2^{e_i}; exponents in any order.
mpz_class abelian_2group_aut_order(std::vector<int> exponents);

// Cohen-Lenstra style mass prod_{i>=1}(1 - 2^-i) / |Aut(A)|.
CertifiedReal cl_mass(const std::vector<int> &exponents);

} // namespace negpell
