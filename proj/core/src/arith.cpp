#include "negpell/arith.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <numeric>

namespace negpell {

namespace {

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return (uint64_t)((__uint128_t)a * b % m);
}

uint64_t powmod(uint64_t a, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1)
      r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

// Strong pseudoprime test to the first twelve prime bases; this set is known
// to be deterministic below 3.3 * 10^24, far beyond any input here.
constexpr std::array<uint64_t, 12> kMRBases = {2,  3,  5,  7,  11, 13,
                                               17, 19, 23, 29, 31, 37};

uint64_t pollard_rho(uint64_t n) {
  if (n % 2 == 0)
    return 2;
  for (uint64_t c = 1;; ++c) {
    uint64_t x = 2, y = 2, d = 1;
    while (d == 1) {
      x = (mulmod(x, x, n) + c) % n;
      y = (mulmod(y, y, n) + c) % n;
      y = (mulmod(y, y, n) + c) % n;
      uint64_t diff = x > y ? x - y : y - x;
      if (diff == 0) {
        d = n; // cycle collapsed, retry with another constant
        break;
      }
      d = std::gcd(diff, n);
    }
    if (d != n)
      return d;
  }
}

void factor_rec(uint64_t n, std::vector<uint64_t> &out) {
  if (n == 1)
    return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  uint64_t d = pollard_rho(n);
  factor_rec(d, out);
  factor_rec(n / d, out);
}

} // namespace

bool is_prime(uint64_t n) {
  if (n < 2)
    return false;
  for (uint64_t p : kMRBases) {
    if (n == p)
      return true;
    if (n % p == 0)
      return false;
  }
  uint64_t d = n - 1;
  int s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  for (uint64_t a : kMRBases) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1)
      continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite)
      return false;
  }
  return true;
}

Factorization factor(uint64_t n) {
  if (n == 0)
    throw std::invalid_argument("factor: n must be positive");
  Factorization f;
  f.n = n;
  std::vector<uint64_t> primes;
  uint64_t m = n;
  for (uint64_t p : {uint64_t(2), uint64_t(3), uint64_t(5)}) {
    while (m % p == 0) {
      primes.push_back(p);
      m /= p;
    }
  }
  // 6k +- 1 wheel up to 10^6, then rho for whatever survives.
  for (uint64_t p = 7; p <= 1000000 && p * p <= m; p += 6) {
    for (uint64_t q : {p, p + 4}) {
      while (m % q == 0) {
        primes.push_back(q);
        m /= q;
      }
    }
  }
  if (m > 1)
    factor_rec(m, primes);
  std::sort(primes.begin(), primes.end());
  for (uint64_t p : primes) {
    if (!f.factors.empty() && f.factors.back().first == p)
      ++f.factors.back().second;
    else
      f.factors.emplace_back(p, 1);
  }
  return f;
}

int jacobi(long long a, long long n) {
  if (n <= 0 || n % 2 == 0)
    throw std::invalid_argument("jacobi: n must be odd and positive");
  long long aa = a % n;
  if (aa < 0)
    aa += n;
  unsigned long long u = (unsigned long long)aa, v = (unsigned long long)n;
  int t = 1;
  while (u != 0) {
    while (u % 2 == 0) {
      u /= 2;
      unsigned long long r = v % 8;
      if (r == 3 || r == 5)
        t = -t;
    }
    std::swap(u, v);
    if (u % 4 == 3 && v % 4 == 3)
      t = -t;
    u %= v;
  }
  return v == 1 ? t : 0;
}

int kronecker(long long a, long long n) {
  if (n == 0)
    return (a == 1 || a == -1) ? 1 : 0;
  int t = 1;
  if (n < 0) {
    n = -n;
    if (a < 0)
      t = -t;
  }
  int v2 = 0;
  while (n % 2 == 0) {
    n /= 2;
    ++v2;
  }
  if (v2 > 0) {
    if (a % 2 == 0)
      return 0;
    long long r = ((a % 8) + 8) % 8;
    if ((v2 & 1) && (r == 3 || r == 5))
      t = -t;
  }
  return t * jacobi(a, n);
}

uint64_t isqrt_u64(uint64_t n) {
  if (n == 0)
    return 0;
  uint64_t r = (uint64_t)std::sqrt((double)n);
  while (r > 0 && r > n / r)
    --r;
  while ((r + 1) <= n / (r + 1))
    ++r;
  return r;
}

bool is_perfect_square(uint64_t n) {
  uint64_t r = isqrt_u64(n);
  return r * r == n;
}

std::optional<uint64_t> sqrt_mod(uint64_t a, uint64_t p) {
  if (p < 3 || p % 2 == 0 || !is_prime(p))
    throw std::invalid_argument("sqrt_mod: modulus must be an odd prime");
  a %= p;
  if (a == 0)
    return 0;
  if (powmod(a, (p - 1) / 2, p) != 1)
    return std::nullopt;
  uint64_t root;
  if (p % 4 == 3) {
    root = powmod(a, (p + 1) / 4, p);
  } else {
    // Tonelli-Shanks
    uint64_t q = p - 1;
    int s = 0;
    while (q % 2 == 0) {
      q /= 2;
      ++s;
    }
    uint64_t z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1)
      ++z;
    uint64_t m = s;
    uint64_t c = powmod(z, q, p);
    uint64_t t = powmod(a, q, p);
    uint64_t r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
      uint64_t i = 0, tt = t;
      while (tt != 1) {
        tt = mulmod(tt, tt, p);
        ++i;
        if (i == m)
          throw std::logic_error("sqrt_mod: order walk escaped");
      }
      uint64_t b = c;
      for (uint64_t j = 0; j + i + 1 < m; ++j)
        b = mulmod(b, b, p);
      m = i;
      c = mulmod(b, b, p);
      t = mulmod(t, c, p);
      r = mulmod(r, b, p);
    }
    root = r;
  }
  return std::min(root, p - root);
}

std::optional<FamilyDElement> family_d_element(uint64_t d) {
  if (d < 2)
    return std::nullopt;
  Factorization f = factor(d);
  FamilyDElement e;
  e.d = d;
  for (auto &[p, exp] : f.factors) {
    if (exp > 1)
      return std::nullopt;
    if (p % 4 == 3)
      return std::nullopt;
    e.primes.push_back(p);
  }
  return e;
}

namespace {

std::vector<uint64_t> small_primes_upto(uint64_t n) {
  std::vector<uint64_t> primes;
  if (n < 2)
    return primes;
  std::vector<bool> comp(n + 1, false);
  for (uint64_t i = 2; i <= n; ++i) {
    if (!comp[i]) {
      primes.push_back(i);
      for (uint64_t j = i * i; j <= n; j += i)
        comp[j] = true;
    }
  }
  return primes;
}

constexpr std::size_t kSegSize = 1 << 16;
constexpr int kMaxOmega = 12; // enough for any n < 2^40

} // namespace

void for_each_family_D(uint64_t lo, uint64_t hi,
                       const std::function<void(const FamilyDElement &)> &fn) {
  lo = std::max<uint64_t>(lo, 2);
  if (hi <= lo)
    return;
  if (hi > (uint64_t(1) << 40))
    throw std::invalid_argument("for_each_family_D: limit too large");
  std::vector<uint64_t> base = small_primes_upto(isqrt_u64(hi - 1));

  std::vector<uint64_t> cof(kSegSize);
  std::vector<uint8_t> bad(kSegSize);
  std::vector<uint8_t> cnt(kSegSize);
  std::vector<std::array<uint64_t, kMaxOmega>> plist(kSegSize);

  FamilyDElement elem;
  for (uint64_t seg_lo = lo; seg_lo < hi; seg_lo += kSegSize) {
    uint64_t seg_hi = std::min(hi, seg_lo + kSegSize);
    std::size_t len = seg_hi - seg_lo;
    for (std::size_t i = 0; i < len; ++i) {
      cof[i] = seg_lo + i;
      bad[i] = 0;
      cnt[i] = 0;
    }
    for (uint64_t p : base) {
      uint64_t start = ((seg_lo + p - 1) / p) * p;
      if (p % 4 == 3) {
        for (uint64_t m = start; m < seg_hi; m += p)
          bad[m - seg_lo] = 1;
        continue;
      }
      for (uint64_t m = start; m < seg_hi; m += p) {
        std::size_t i = m - seg_lo;
        if (bad[i])
          continue;
        int e = 0;
        while (cof[i] % p == 0) {
          cof[i] /= p;
          ++e;
        }
        if (e >= 2) {
          bad[i] = 1;
        } else {
          plist[i][cnt[i]++] = p;
        }
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      if (bad[i])
        continue;
      uint64_t rest = cof[i];
      if (rest > 1) {
        if (rest % 4 == 3)
          continue;
        assert(rest == 2 || rest % 4 == 1);
        plist[i][cnt[i]++] = rest;
      }
      elem.d = seg_lo + i;
      elem.primes.assign(plist[i].begin(), plist[i].begin() + cnt[i]);
      fn(elem);
    }
  }
}

std::vector<FamilyDElement> sieve_family_D(uint64_t limit) {
  if (limit < 2)
    throw std::invalid_argument("sieve_family_D: limit must be >= 2");
  std::vector<FamilyDElement> out;
  for_each_family_D(2, limit,
                    [&](const FamilyDElement &e) { out.push_back(e); });
  return out;
}

NNiceReport is_N_nice(const FamilyDElement &d, double log_n) {
  const double e_to_e = std::exp(std::exp(1.0));
  if (!(log_n > e_to_e))
    throw std::invalid_argument("is_N_nice: need log N > e^e");

  NNiceReport rep;
  rep.in_regime = log_n >= 1000.0 * std::log(10.0);
  double loglog = std::log(log_n);
  double logloglog = std::log(loglog);
  rep.d1 = std::exp(std::pow(loglog, 0.1));
  rep.c0 = std::sqrt(logloglog);

  const auto &ps = d.primes;
  std::size_t r = ps.size();

  rep.gap_ok = true;
  for (std::size_t i = 0; i + 1 < r; ++i) {
    if ((double)ps[i] > rep.d1 && 2.0 * (double)ps[i] >= (double)ps[i + 1]) {
      rep.gap_ok = false;
      break;
    }
  }

  rep.spacing_ok = true;
  for (std::size_t i1 = 1; (double)i1 < (double)r / 3.0; ++i1) {
    double lhs = std::abs(0.5 * std::log(std::log((double)ps[i1 - 1])) -
                          (double)i1);
    double rhs = std::pow(rep.c0, 0.2) *
                 std::pow(std::max((double)i1, rep.c0), 0.8);
    if (!(lhs < rhs)) {
      rep.spacing_ok = false;
      break;
    }
  }

  rep.large_gap_ok = false;
  double prefix = 0.0; // sum of log p_j for j < i
  for (std::size_t i1 = 1; i1 <= r; ++i1) {
    double logp = std::log((double)ps[i1 - 1]);
    if ((double)i1 > std::sqrt((double)r) / 2.0 &&
        (double)i1 < (double)r / 2.0) {
      double loglogp = std::log(logp);
      if (logp >= loglogp * loglogp * logloglog * prefix) {
        rep.large_gap_ok = true;
        break;
      }
    }
    prefix += logp;
  }

  rep.nice = rep.gap_ok && rep.spacing_ok && rep.large_gap_ok;
  return rep;
}

} // namespace negpell
