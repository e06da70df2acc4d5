#include "negpell/redei.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace negpell {

namespace {

using i128 = __int128;

int symbol_bit(uint64_t top, uint64_t p) {
  if (p == 2)
    return iota_inv(kronecker(2, (long long)top));
  return iota_inv(jacobi((long long)(top % p), (long long)p));
}

} // namespace

SymbolAssignment redei_assignment(const FamilyDElement &d) {
  std::size_t r = d.primes.size();
  F2Matrix m(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i + 1; j < r; ++j) {
      uint64_t pi = d.primes[i], pj = d.primes[j];
      int bit;
      if (pi == 2)
        bit = symbol_bit(2, pj);
      else if (pj == 2)
        bit = symbol_bit(2, pi);
      else
        bit = symbol_bit(pi, pj);
      m.set(i, j, bit);
      m.set(j, i, bit);
    }
  // diagonal from the zero-row-sum convention
  for (std::size_t i = 0; i < r; ++i) {
    int s = 0;
    for (std::size_t j = 0; j < r; ++j)
      if (j != i)
        s ^= (int)m.get(i, j);
    m.set(i, i, s);
  }
  return SymbolAssignment{r, m};
}

int rk4(const FamilyDElement &d) {
  SymbolAssignment a = redei_assignment(d);
  std::size_t r = a.r;
  F2Matrix trimmed(r ? r - 1 : 0, r ? r - 1 : 0);
  for (std::size_t i = 0; i + 1 < r; ++i)
    for (std::size_t j = 0; j + 1 < r; ++j)
      trimmed.set(i, j, a.matrix.get(i, j));
  std::size_t k_trim = f2_kernel(trimmed).first;
  std::size_t k_full = f2_kernel(a.matrix).first;
  if (k_full != k_trim + 1)
    throw std::logic_error("rk4: trimmed and full kernels disagree");
  return (int)k_trim;
}

std::pair<std::size_t, F2Matrix> f2_kernel(const F2Matrix &m) {
  F2Matrix basis = m.kernel_basis().row_space_basis();
  return {basis.rows(), basis};
}

namespace {

struct Triple {
  mpz_class x, y, z;
};

void primitivize(Triple &t) {
  mpz_class g = gcd(gcd(t.x, t.y), t.z);
  if (g > 1) {
    t.x /= g;
    t.y /= g;
    t.z /= g;
  }
}

// Signed square root of a modulo |b| (smallest absolute representative),
// or nullopt when some odd prime divisor of b rules it out.
std::optional<int64_t> sqrt_mod_composite(int64_t a, int64_t b) {
  uint64_t m = (uint64_t)(b < 0 ? -b : b);
  Factorization fb = factor(m);
  uint64_t r = 0, mod = 1;
  for (auto &[p, e] : fb.factors) {
    assert(e == 1);
    uint64_t rp;
    if (p == 2) {
      rp = (uint64_t)(((a % 2) + 2) % 2); // a odd -> 1, a even -> 0
    } else {
      uint64_t ap = (uint64_t)(((a % (int64_t)p) + (int64_t)p) % (int64_t)p);
      auto root = sqrt_mod(ap, p);
      if (!root)
        return std::nullopt;
      rp = *root;
    }
    // CRT: r mod mod, rp mod p
    uint64_t inv = 1;
    {
      // inverse of mod modulo p by Fermat
      uint64_t base = mod % p, acc = 1, e2 = p - 2;
      while (e2) {
        if (e2 & 1)
          acc = acc * base % p;
        base = base * base % p;
        e2 >>= 1;
      }
      inv = acc;
    }
    uint64_t diff = (rp + p - r % p) % p;
    r = r + mod * ((diff * inv) % p);
    mod *= p;
  }
  int64_t rs = (int64_t)r;
  if (rs > (int64_t)(m / 2))
    rs -= (int64_t)m;
  return rs;
}

std::optional<Triple> descend(int64_t a, int64_t b, int depth) {
  if (depth > 300)
    throw std::runtime_error("solve_conic: descent depth exceeded");
  if (a == 1)
    return Triple{1, 1, 0};
  if (b == 1)
    return Triple{1, 0, 1};
  if (a < 0 && b < 0)
    return std::nullopt;
  if (std::llabs(a) > std::llabs(b)) {
    auto sub = descend(b, a, depth + 1);
    if (!sub)
      return std::nullopt;
    return Triple{sub->x, sub->z, sub->y};
  }
  auto r_opt = sqrt_mod_composite(a, b);
  if (!r_opt)
    return std::nullopt;
  int64_t r = *r_opt;
  i128 tw = ((i128)r * r - a) / b;
  assert(((i128)r * r - a) % b == 0);
  if (tw == 0)
    throw std::logic_error("solve_conic: square survived squarefree input");
  int64_t t = (int64_t)tw;
  Factorization ft = factor((uint64_t)std::llabs(t));
  int64_t t_sf = t < 0 ? -1 : 1;
  int64_t u = 1;
  for (auto &[p, e] : ft.factors) {
    if (e & 1)
      t_sf *= (int64_t)p;
    for (int k = 0; k < e / 2; ++k)
      u *= (int64_t)p;
  }
  auto sub = descend(a, t_sf, depth + 1);
  if (!sub)
    return std::nullopt;
  Triple out;
  out.x = sub->x * r + a * sub->y;
  out.y = sub->x + sub->y * r;
  out.z = sub->z * t_sf * u;
  primitivize(out);
  mpz_class check = out.x * out.x - a * out.y * out.y - b * out.z * out.z;
  if (check != 0)
    throw std::logic_error("solve_conic: combination identity failed");
  if (out.x == 0 && out.y == 0 && out.z == 0)
    throw std::logic_error("solve_conic: trivial combination");
  return out;
}

} // namespace

std::optional<ConicSolution> solve_conic(uint64_t a, uint64_t b) {
  if (a == 0 || b == 0)
    throw std::invalid_argument("solve_conic: coefficients must be positive");
  // strip square parts; solutions scale back
  auto split = [](uint64_t n, uint64_t &sf, uint64_t &sq) {
    Factorization f = factor(n);
    sf = 1;
    sq = 1;
    for (auto &[p, e] : f.factors) {
      if (e & 1)
        sf *= p;
      for (int k = 0; k < e / 2; ++k)
        sq *= p;
    }
  };
  uint64_t asf, au, bsf, bu;
  split(a, asf, au);
  split(b, bsf, bu);

  std::optional<Triple> got;
  try {
    got = descend((int64_t)asf, (int64_t)bsf, 0);
  } catch (const std::runtime_error &) {
    // bounded exhaustive fallback on small instances
    for (int64_t x = 0; x <= 10000 && !got; ++x)
      for (int64_t y = 0; (uint64_t)y * y * a <= (uint64_t)x * x && !got; ++y) {
        i128 rem = (i128)x * x - (i128)a * y * y;
        if (rem < 0)
          continue;
        uint64_t zz = isqrt_u64((uint64_t)(rem / b));
        if ((i128)b * zz * zz == rem && (x || y || zz))
          got = Triple{x, y, (int64_t)zz};
      }
    if (!got)
      throw;
    primitivize(*got);
    return ConicSolution{got->x, got->y, got->z};
  }
  if (!got)
    return std::nullopt;
  // scale from the squarefree-part conic back to (a, b)
  Triple t;
  t.x = got->x * au * bu;
  t.y = got->y * bu;
  t.z = got->z * au;
  primitivize(t);
  mpz_class check = t.x * t.x - mpz_class(a) * t.y * t.y -
                    mpz_class(b) * t.z * t.z;
  if (check != 0)
    throw std::logic_error("solve_conic: scaling broke the identity");
  return ConicSolution{t.x, t.y, t.z};
}

bool redei_admissible(const RedeiTriple &t) {
  uint64_t mem[3] = {t.a, t.b, t.c};
  for (uint64_t m : mem) {
    if (m == 0 || m % 4 != 1)
      return false;
    if (!factor(m).squarefree())
      return false;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j)
        continue;
      if (std::gcd(mem[i], mem[j]) != 1 && !(mem[i] == 1 || mem[j] == 1))
        return false;
      if (mem[i] == 1)
        continue;
      for (auto &[p, e] : factor(mem[i]).factors)
        if (jacobi((long long)(mem[j] % p), (long long)p) != 1)
          return false;
    }
  return true;
}

namespace {

// All squares of units in (Z/4)[w], w^2 = w + m; used for the inert-at-2
// acceptability test.
std::set<std::pair<int, int>> unit_squares_mod4(int m) {
  std::set<std::pair<int, int>> out;
  for (int u0 = 0; u0 < 4; ++u0)
    for (int u1 = 0; u1 < 4; ++u1) {
      int norm = u0 * u0 + u0 * u1 - m * u1 * u1;
      if (((norm % 2) + 2) % 2 == 0)
        continue; // not a unit
      int s0 = (u0 * u0 + m * u1 * u1) % 4;
      int s1 = (2 * u0 * u1 + u1 * u1) % 4;
      out.insert({(s0 + 4) % 4, (s1 + 4) % 4});
    }
  return out;
}

// 2-adic square root of a (a = 1 mod 8) to precision 2^k, bit lifting.
mpz_class hensel_sqrt_2adic(uint64_t a, unsigned k) {
  assert(a % 8 == 1);
  mpz_class s = 1;
  mpz_class am = a;
  for (unsigned bit = 3; bit < k; ++bit) {
    mpz_class err = (s * s - am) >> bit;
    if (mpz_odd_p(err.get_mpz_t()))
      s += mpz_class(1) << (bit - 1);
  }
  mpz_class mod = mpz_class(1) << k;
  mpz_class chk = (s * s - am) % mod;
  if (chk != 0)
    throw std::logic_error("hensel_sqrt_2adic: lift failed");
  return s;
}

unsigned v2_of(const mpz_class &n) {
  assert(n != 0);
  return (unsigned)mpz_scan1(n.get_mpz_t(), 0);
}

// Acceptability of alpha = x + y sqrt(a) at 2: the quadratic extension by
// sqrt(alpha) must be unramified above 2 in both completions.
bool acceptable_at_2_signed(uint64_t a, const mpz_class &x,
                            const mpz_class &y, const mpz_class &z) {
  unsigned vz = z == 0 ? 0 : v2_of(z);
  if (a % 8 == 1) {
    unsigned K = 2 * vz + 16;
    mpz_class mod = mpz_class(1) << K;
    mpz_class s = hensel_sqrt_2adic(a, K);
    for (int sign = 0; sign < 2; ++sign) {
      mpz_class alpha = (x + (sign ? -1 : 1) * y * s) % mod;
      if (alpha < 0)
        alpha += mod;
      if (alpha == 0)
        throw std::logic_error("acceptable_at_2: precision exhausted");
      unsigned v = v2_of(alpha);
      if (v >= K - 4)
        throw std::logic_error("acceptable_at_2: valuation near precision");
      if (v % 2 != 0)
        return false;
      mpz_class unit = (alpha >> v) % 4;
      if (unit != 1)
        return false;
    }
    return true;
  }
  // a = 5 mod 8: 2 is inert, work in Z[w], w = (1 + sqrt a)/2
  int m = (int)(((a - 1) / 4) % 4);
  mpz_class c0 = x - y, c1 = 2 * y;
  if (c0 == 0 && c1 == 0)
    throw std::logic_error("acceptable_at_2: alpha vanished");
  unsigned v = 0;
  while (mpz_even_p(c0.get_mpz_t()) && mpz_even_p(c1.get_mpz_t())) {
    c0 >>= 1;
    c1 >>= 1;
    ++v;
  }
  if (v % 2 != 0)
    return false;
  int u0 = (int)mpz_class(c0 % 4).get_si();
  int u1 = (int)mpz_class(c1 % 4).get_si();
  u0 = (u0 + 4) % 4;
  u1 = (u1 + 4) % 4;
  auto squares = unit_squares_mod4(m);
  return squares.count({u0, u1}) > 0;
}

// The orbit stores solutions with x >= 0, which pins the sign of
// alpha = x + y sqrt(a). Either sign may carry the 2-adic normalization,
// and for admissible c every odd p | c is 1 mod 4, so -1 is a residue and
// the symbol components cannot tell alpha from -alpha. Accept either sign.
bool acceptable_at_2(uint64_t a, const mpz_class &x, const mpz_class &y,
                     const mpz_class &z) {
  if (acceptable_at_2_signed(a, x, y, z))
    return true;
  mpz_class nx = -x, ny = -y;
  return acceptable_at_2_signed(a, nx, ny, z);
}

struct SolutionKey {
  mpz_class x, ya, za;
  bool operator<(const SolutionKey &o) const {
    return std::tie(x, ya, za) < std::tie(o.x, o.ya, o.za);
  }
};

// Deterministic stream of primitive solutions generated by reflections of
// the descent solution.
std::vector<Triple> solution_orbit(uint64_t a, uint64_t b,
                                   std::size_t want) {
  auto base = solve_conic(a, b);
  if (!base)
    throw std::logic_error("solution_orbit: conic is insoluble");
  std::vector<Triple> out;
  std::set<SolutionKey> seen;
  auto push = [&](Triple t) {
    if (t.x == 0 && t.y == 0 && t.z == 0)
      return;
    primitivize(t);
    if (t.x < 0) {
      t.x = -t.x;
      t.y = -t.y;
      t.z = -t.z;
    }
    SolutionKey key{t.x, abs(t.y), abs(t.z)};
    if (seen.insert(key).second)
      out.push_back(t);
  };
  push(Triple{base->x, base->y, base->z});
  mpz_class A = a, B = b;
  // explicit return types force evaluation before the int-to-mpz
  // temporaries behind the expression template die
  auto q_of = [&](const mpz_class &x, const mpz_class &y,
                  const mpz_class &z) -> mpz_class {
    return x * x - A * y * y - B * z * z;
  };
  auto b_of = [&](const Triple &u, const mpz_class &sx, const mpz_class &sy,
                  const mpz_class &sz) -> mpz_class {
    return u.x * sx - A * u.y * sy - B * u.z * sz;
  };
  for (std::size_t i = 0; i < out.size() && out.size() < want; ++i) {
    Triple u = out[i];
    for (int sx = -3; sx <= 3 && out.size() < want; ++sx)
      for (int sy = -3; sy <= 3 && out.size() < want; ++sy)
        for (int sz = -3; sz <= 3 && out.size() < want; ++sz) {
          if (!sx && !sy && !sz)
            continue;
          mpz_class qs = q_of(sx, sy, sz);
          mpz_class bs = b_of(u, sx, sy, sz);
          Triple v{qs * u.x - 2 * bs * sx, qs * u.y - 2 * bs * sy,
                   qs * u.z - 2 * bs * sz};
          if (q_of(v.x, v.y, v.z) != 0)
            throw std::logic_error("solution_orbit: reflection left conic");
          push(v);
        }
    if (i > 200)
      break;
  }
  return out;
}

int symbol_component(uint64_t a, uint64_t p, const mpz_class &x,
                     const mpz_class &y) {
  auto root = sqrt_mod(a % p, p);
  if (!root)
    throw std::logic_error("redei_symbol: a is a nonresidue mod p | c");
  uint64_t s = *root;
  mpz_class w = (x + y * mpz_class(s)) % mpz_class(p);
  if (w < 0)
    w += mpz_class(p);
  if (w == 0) {
    s = p - s;
    w = (x + y * mpz_class(s)) % mpz_class(p);
    if (w < 0)
      w += mpz_class(p);
    if (w == 0)
      throw std::logic_error("redei_symbol: both roots annihilate x + ys");
  }
  long long wl = mpz_class(w).get_si();
  return jacobi(wl, (long long)p) == 1 ? 0 : 1;
}

// Calibrated against the level-2 Artin pairing oracle; identity convention.
constexpr int kComponentFlip = 0;

} // namespace

// Shared evaluator: conic on (a, b_conic), components over the primes of
// c_val. Covers both the plain symbol (c coprime to the conic pair) and the
// diagonal symbol [a, c, c] where every p | c ramifies in the middle; there
// exactly one of the two embeddings of alpha is a p-unit and the component
// is read off that root, which symbol_component's zero-root flip implements.
std::vector<int> symbol_samples_core(uint64_t a, uint64_t b_conic,
                                     uint64_t c_val, std::size_t count) {
  if (count == 0)
    throw std::invalid_argument("redei_symbol: sample count must be > 0");
  if (a == 1 || b_conic == 1 || c_val == 1)
    return std::vector<int>(count, 0);
  Factorization fc = factor(c_val);
  std::vector<int> vals;
  std::vector<Triple> orbit = solution_orbit(a, b_conic, 512);
  for (const Triple &sol : orbit) {
    bool ok = true;
    for (auto &[p, e] : fc.factors)
      if (mpz_class(sol.z % mpz_class(p)) == 0) {
        ok = false;
        break;
      }
    if (!ok)
      continue;
    if (!acceptable_at_2(a, sol.x, sol.y, sol.z))
      continue;
    int total = 0;
    for (auto &[p, e] : fc.factors)
      total ^= symbol_component(a, p, sol.x, sol.y) ^ kComponentFlip;
    vals.push_back(total);
    if (vals.size() >= count)
      break;
  }
  if (vals.empty())
    throw std::runtime_error(
        "redei_symbol: no acceptably normalized solution in the orbit");
  return vals;
}

std::vector<int> redei_symbol_samples(const RedeiTriple &t,
                                      std::size_t count) {
  if (!redei_admissible(t))
    throw std::invalid_argument("redei_symbol: inadmissible triple");
  return symbol_samples_core(t.a, t.b, t.c, count);
}

int redei_symbol(const RedeiTriple &t) { return redei_symbol_samples(t, 1)[0]; }

int redei_symbol_diagonal(uint64_t a, uint64_t c) {
  if (!redei_admissible({a, c, 1}))
    throw std::invalid_argument("redei_symbol_diagonal: inadmissible pair");
  return symbol_samples_core(a, c, c, 1)[0];
}

} // namespace negpell
