#include "negpell/qfclass.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <gmpxx.h>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace negpell {

namespace {

using i128 = __int128;

int64_t floordiv(int64_t a, int64_t b) {
  assert(b > 0);
  int64_t q = a / b;
  if (a % b != 0 && a < 0)
    --q;
  return q;
}

struct WideForm {
  i128 a, b, c;
};

// Reduction step on wide coefficients; r is the representative of -b mod
// 2|c| lying in (-|c|, |c|] when |c| > sqrt(delta), else in
// (sqrt(delta) - 2|c|, sqrt(delta)).
WideForm rho_wide(const WideForm &f, int64_t delta, int64_t sqrt_delta) {
  i128 ca = f.c < 0 ? -f.c : f.c;
  assert(ca > 0);
  i128 two_ca = 2 * ca;
  i128 m = (-f.b) % two_ca;
  if (m < 0)
    m += two_ca;
  i128 r;
  if (ca * ca > (i128)delta) {
    r = (m > ca) ? m - two_ca : m;
  } else {
    // largest r <= sqrt_delta congruent to m mod 2|c|
    i128 diff = (i128)sqrt_delta - m;
    i128 q = diff / two_ca; // diff >= -2|c| + 1, quotient may be 0 or -1
    if (diff < 0 && diff % two_ca != 0)
      --q;
    r = m + q * two_ca;
  }
  i128 num = r * r - (i128)delta;
  assert(num % (4 * f.c) == 0);
  return WideForm{f.c, r, num / (4 * f.c)};
}

bool is_reduced_wide(const WideForm &f, int64_t delta, int64_t sqrt_delta) {
  if (f.b <= 0 || f.b * f.b > (i128)delta)
    return false;
  i128 aa = f.a < 0 ? -f.a : f.a;
  i128 lo = 2 * aa - f.b; // 2|a| < sqrt(delta) + b
  if (lo > 0 && lo * lo > (i128)delta)
    return false;
  i128 hi = 2 * aa + f.b; // sqrt(delta) < 2|a| + b
  if (hi * hi < (i128)delta)
    return false;
  (void)sqrt_delta;
  return true;
}

QuadForm narrow(const WideForm &f) {
  auto fits = [](i128 v) {
    return v >= INT64_MIN && v <= INT64_MAX;
  };
  if (!fits(f.a) || !fits(f.b) || !fits(f.c))
    throw std::overflow_error("form coefficients exceed 64 bits");
  return QuadForm{(int64_t)f.a, (int64_t)f.b, (int64_t)f.c};
}

QuadForm reduce_wide(WideForm f, int64_t delta, int64_t sqrt_delta) {
  for (int iter = 0; iter < 100000; ++iter) {
    if (is_reduced_wide(f, delta, sqrt_delta))
      return narrow(f);
    f = rho_wide(f, delta, sqrt_delta);
  }
  throw std::logic_error("reduce_form: walk failed to terminate");
}

void check_delta(int64_t delta) {
  if (delta <= 0)
    throw std::invalid_argument("discriminant must be positive");
  int64_t m = delta % 4;
  if (m != 0 && m != 1)
    throw std::invalid_argument("discriminant must be 0 or 1 mod 4");
  uint64_t s = isqrt_u64((uint64_t)delta);
  if ((int64_t)(s * s) == delta)
    throw std::invalid_argument("discriminant must not be a square");
}

uint64_t form_key(const QuadForm &f) {
  // Reduced forms of delta <= 4*10^6 have |a|, b, |c| < 2^20.
  auto enc = [](int64_t v) {
    assert(v > -(1 << 20) && v < (1 << 20));
    return (uint64_t)(v + (1 << 20));
  };
  return (enc(f.a) << 42) | (enc(f.b) << 21) | enc(f.c);
}

int64_t i64gcd(int64_t a, int64_t b) {
  return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}

// x u + y v = g
int64_t ext_gcd(int64_t x, int64_t y, int64_t &u, int64_t &v) {
  if (y == 0) {
    u = x >= 0 ? 1 : -1;
    v = 0;
    return x >= 0 ? x : -x;
  }
  int64_t u1, v1;
  int64_t g = ext_gcd(y, x % y, u1, v1);
  u = v1;
  v = u1 - (x / y) * v1;
  return g;
}

struct ClassGroup {
  int64_t delta = 0;
  int64_t sqrt_delta = 0;
  std::vector<QuadForm> forms;                     // sorted reduced forms
  std::unordered_map<uint64_t, uint32_t> class_of; // form key -> cycle id
  std::vector<QuadForm> reps;                      // lex-min form per cycle
  uint32_t principal = 0;
  uint64_t h_plus = 0;

  explicit ClassGroup(int64_t d) : delta(d) {
    check_delta(delta);
    sqrt_delta = (int64_t)isqrt_u64((uint64_t)delta);
    enumerate();
    partition_cycles();
    QuadForm pf = delta % 2 ? QuadForm{1, 1, (1 - delta) / 4}
                            : QuadForm{1, 0, -delta / 4};
    principal = id_of(reduce(pf));
  }

  void enumerate() {
    int64_t s = sqrt_delta;
    for (int64_t a = 1; a <= s; ++a) {
      int64_t bmin = std::max<int64_t>({1, s + 1 - 2 * a, 2 * a - s});
      if ((bmin & 1) != (delta & 1))
        ++bmin;
      for (int64_t b = bmin; b <= s; b += 2) {
        int64_t num = delta - b * b;
        if (num % (4 * a) != 0)
          continue;
        int64_t c = -num / (4 * a);
        forms.push_back(QuadForm{a, b, c});
        forms.push_back(QuadForm{-a, b, -c});
      }
    }
    std::sort(forms.begin(), forms.end());
  }

  void partition_cycles() {
    class_of.reserve(forms.size() * 2);
    for (const QuadForm &f : forms)
      class_of.emplace(form_key(f), UINT32_MAX);
    uint32_t next_id = 0;
    for (const QuadForm &f : forms) {
      if (class_of.at(form_key(f)) != UINT32_MAX)
        continue;
      uint32_t id = next_id++;
      reps.push_back(f);
      QuadForm cur = f;
      do {
        auto it = class_of.find(form_key(cur));
        if (it == class_of.end() || it->second != UINT32_MAX)
          throw std::logic_error("cycle walk left the reduced set");
        it->second = id;
        cur = narrow(rho_wide(WideForm{cur.a, cur.b, cur.c}, delta,
                              sqrt_delta));
      } while (!(cur == f));
    }
    h_plus = reps.size();
  }

  uint32_t id_of(const QuadForm &reduced) const {
    auto it = class_of.find(form_key(reduced));
    if (it == class_of.end())
      throw std::logic_error("form is not in the reduced set");
    return it->second;
  }

  QuadForm reduce(const QuadForm &f) const {
    return reduce_wide(WideForm{f.a, f.b, f.c}, delta, sqrt_delta);
  }

  // Equivalent form whose leading coefficient is coprime to t, found by a
  // deterministic expanding scan over primitive (x, y).
  QuadForm coprime_lead(const QuadForm &f, int64_t t) const {
    if (i64gcd(f.a, t) == 1)
      return f;
    if (i64gcd(f.c, t) == 1)
      return QuadForm{f.c, -f.b, f.a}; // f composed with (x,y) -> (y,-x)
    for (int64_t s = 1; s <= 512; ++s) {
      for (int64_t x = -s; x <= s; ++x) {
        for (int64_t y = -s; y <= s; ++y) {
          if (std::max(std::llabs(x), std::llabs(y)) != s)
            continue;
          if (std::gcd(std::llabs(x), std::llabs(y)) != 1)
            continue;
          i128 v = (i128)f.a * x * x + (i128)f.b * x * y + (i128)f.c * y * y;
          if (v == 0)
            continue;
          int64_t vm = (int64_t)(v % t);
          if (i64gcd(vm, t) != 1)
            continue;
          int64_t u, w;
          ext_gcd(x, y, u, w); // x u + y w = 1
          // transform by [[x, -w], [y, u]], determinant x u + y w = 1
          int64_t z = -w;
          i128 a2 = v;
          i128 b2 = 2 * ((i128)f.a * x * z + (i128)f.c * y * u) +
                    (i128)f.b * ((i128)x * u + (i128)y * z);
          i128 c2 = (i128)f.a * z * z + (i128)f.b * z * u + (i128)f.c * u * u;
          assert(b2 * b2 - 4 * a2 * c2 == (i128)delta);
          return narrow(WideForm{a2, b2, c2});
        }
      }
    }
    throw std::logic_error("coprime_lead: scan exhausted");
  }

  QuadForm compose(const QuadForm &f1_in, const QuadForm &f2_in) const {
    QuadForm f1 = f1_in;
    QuadForm f2 = f2_in;
    if (i64gcd(f1.a, f2.a) != 1)
      f2 = coprime_lead(f2, f1.a);
    // Concordant triple: B == f1.b mod 2 f1.a, B == f2.b mod 2 f2.a, so
    // (f1.a, B, f2.a C) and (f2.a, B, f1.a C) compose to (f1.a f2.a, B, C).
    i128 a1 = f1.a, a2 = f2.a;
    int64_t u, v;
    int64_t g = ext_gcd(f1.a, f2.a, u, v); // f1.a u + f2.a v = 1
    assert(g == 1);
    (void)g;
    // B = b1 + 2 a1 k with a1 k == (b2 - b1)/2 mod a2
    i128 half_diff = ((i128)f2.b - f1.b) / 2;
    i128 k = (half_diff % a2) * u % a2;
    i128 B = f1.b + 2 * a1 * k;
    i128 a3 = a1 * a2;
    i128 mod = 2 * (a3 < 0 ? -a3 : a3);
    B %= mod;
    if (B < 0)
      B += mod;
    i128 num = B * B - delta;
    assert(num % (4 * a3) == 0);
    return reduce_wide(WideForm{a3, B, num / (4 * a3)}, delta, sqrt_delta);
  }

  QuadForm identity() const { return reps[principal]; }

  QuadForm pow(QuadForm base, uint64_t e) const {
    QuadForm acc = identity();
    while (e) {
      if (e & 1)
        acc = canonical(compose(acc, base));
      base = canonical(compose(base, base));
      e >>= 1;
    }
    return acc;
  }

  QuadForm canonical(const QuadForm &reduced) const {
    return reps[id_of(reduced)];
  }

  bool is_identity(const QuadForm &reduced) const {
    return id_of(reduced) == principal;
  }

  // Genus character vector of the class of f: one bit per prime divisor,
  // evaluated on a represented value coprime to 2 delta.
  std::vector<int> char_bits(const QuadForm &f,
                             const std::vector<uint64_t> &primes) const {
    int64_t rep = 0;
    bool found = false;
    for (int64_t s = 1; s <= 512 && !found; ++s) {
      for (int64_t x = -s; x <= s && !found; ++x) {
        for (int64_t y = -s; y <= s && !found; ++y) {
          if (std::max(std::llabs(x), std::llabs(y)) != s)
            continue;
          if (std::gcd(std::llabs(x), std::llabs(y)) != 1)
            continue;
          i128 v = (i128)f.a * x * x + (i128)f.b * x * y + (i128)f.c * y * y;
          if (v == 0)
            continue;
          i128 g = 2 * (i128)delta;
          int64_t vm = (int64_t)(v % g);
          if (i64gcd(vm, (int64_t)g) != 1)
            continue;
          if (v > INT64_MAX || v < INT64_MIN)
            continue;
          rep = (int64_t)v;
          found = true;
        }
      }
    }
    if (!found)
      throw std::logic_error("char_bits: no represented value found");
    std::vector<int> bits;
    int parity = 0;
    for (uint64_t p : primes) {
      int s;
      if (p == 2)
        s = kronecker(2, rep);
      else
        s = jacobi(rep, (long long)p);
      if (s == 0)
        throw std::logic_error("char_bits: representative not coprime");
      bits.push_back(iota_inv(s));
      parity ^= bits.back();
    }
    if (parity != 0)
      throw std::logic_error("char_bits: genus product formula violated");
    return bits;
  }
};

std::mutex g_cache_mutex;
std::unordered_map<int64_t, NarrowClassData> g_cache;

bool cache_get(int64_t delta, NarrowClassData &out, bool need_full) {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_cache.find(delta);
  if (it == g_cache.end())
    return false;
  if (need_full && it->second.from_cache)
    return false;
  out = it->second;
  return true;
}

void cache_put(const NarrowClassData &data, bool allow_downgrade) {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_cache.find(data.delta);
  if (it != g_cache.end()) {
    if (!allow_downgrade && !it->second.from_cache)
      return; // keep the richer in-process result
  }
  g_cache[data.delta] = data;
}

// Ambiguous form above p: smallest b >= 0 with b == delta mod 2 and
// 4p | b^2 - delta; that is b = p for odd delta and b = 0 for even delta.
QuadForm ambiguous_form(int64_t delta, uint64_t p) {
  if (delta % 2 != 0) {
    int64_t pp = (int64_t)p;
    return QuadForm{pp, pp, (pp * pp - delta) / (4 * pp)};
  }
  int64_t pp = (int64_t)p;
  return QuadForm{pp, 0, -(delta / 4) / pp};
}

NarrowClassData compute_class_data(const FamilyDElement &d,
                                   int64_t delta_bound) {
  int64_t delta = discriminant_of(d);
  if (delta > delta_bound)
    throw std::invalid_argument("narrow_class_group: delta exceeds bound");
  ClassGroup cg(delta);

  NarrowClassData out;
  out.d = d;
  out.delta = delta;
  out.h_plus = cg.h_plus;

  std::size_t r = d.primes.size();
  int v2 = 0;
  {
    uint64_t h = cg.h_plus;
    while (h % 2 == 0) {
      h /= 2;
      ++v2;
    }
  }
  uint64_t m_odd = cg.h_plus >> v2;

  // element key -> coordinates w.r.t. the current basis
  std::unordered_map<uint64_t, std::vector<uint64_t>> table;
  std::vector<std::pair<QuadForm, std::vector<uint64_t>>> elems;
  table.emplace(form_key(cg.identity()), std::vector<uint64_t>{});
  elems.emplace_back(cg.identity(), std::vector<uint64_t>{});

  if (v2 > 0) {
    // Classes whose genus characters are independent give, after raising to
    // the odd part, a minimal generating set of the 2-Sylow.
    std::vector<QuadForm> gens;
    {
      std::vector<F2Vec> picked;
      for (uint32_t id = 0; id < cg.h_plus && picked.size() + 1 < r; ++id) {
        std::vector<int> bits = cg.char_bits(cg.reps[id], d.primes);
        F2Vec vrow((std::size_t)r);
        for (std::size_t j = 0; j < r; ++j)
          vrow.set(j, bits[j]);
        std::vector<F2Vec> trial = picked;
        trial.push_back(vrow);
        F2Matrix m = F2Matrix::from_rows(trial, r);
        if (m.rank() == trial.size()) {
          picked = trial;
          gens.push_back(cg.reps[id]);
          if (picked.size() == r - 1)
            break;
        }
      }
      if (gens.size() != r - 1)
        throw std::logic_error("class group: genus image has wrong rank");
    }
    for (QuadForm &g : gens)
      g = cg.pow(g, m_odd);

    // Greedy basis: repeatedly insert the remaining generator of largest
    // depth over the current span; the division step below is asserted.
    std::vector<QuadForm> basis;
    std::vector<int> orders; // exponents e, factor order 2^e
    std::vector<QuadForm> remaining = gens;
    while (!remaining.empty()) {
      int best = -1, best_depth = -1;
      std::vector<QuadForm> best_chain;
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        QuadForm cur = cg.canonical(remaining[i]);
        std::vector<QuadForm> chain{cur};
        int depth = 0;
        while (table.find(form_key(cur)) == table.end()) {
          cur = cg.canonical(cg.compose(cur, cur));
          chain.push_back(cur);
          ++depth;
          if (depth > 62)
            throw std::logic_error("class group: runaway element order");
        }
        if (depth > best_depth) {
          best_depth = depth;
          best = (int)i;
          best_chain = chain;
        }
      }
      if (best_depth == 0) {
        remaining.clear();
        break;
      }
      QuadForm t = remaining[best];
      remaining.erase(remaining.begin() + best);
      int j = best_depth;
      std::vector<uint64_t> a = table.at(form_key(best_chain.back()));
      a.resize(basis.size(), 0);
      QuadForm y = cg.canonical(t);
      for (std::size_t i = 0; i < basis.size(); ++i) {
        if (a[i] % (uint64_t(1) << j) != 0)
          throw std::logic_error("class group: basis division failed");
        uint64_t ord = uint64_t(1) << orders[i];
        uint64_t corr = (ord - (a[i] >> j)) % ord;
        if (corr)
          y = cg.canonical(cg.compose(y, cg.pow(basis[i], corr)));
      }
      // y now has order exactly 2^j and trivial span intersection
      if (!basis.empty() && j > orders.back())
        throw std::logic_error("class group: greedy order not descending");
      basis.push_back(y);
      orders.push_back(j);
      // extend the table by powers of y
      std::vector<std::pair<QuadForm, std::vector<uint64_t>>> snapshot = elems;
      QuadForm yp = y;
      for (uint64_t e = 1; e < (uint64_t(1) << j); ++e) {
        for (auto &[f, coords] : snapshot) {
          QuadForm nf = cg.canonical(cg.compose(f, yp));
          std::vector<uint64_t> nc = coords;
          nc.resize(basis.size() - 1, 0);
          nc.push_back(e);
          if (!table.emplace(form_key(nf), nc).second)
            throw std::logic_error("class group: table collision");
          elems.emplace_back(nf, nc);
        }
        if (e + 1 < (uint64_t(1) << j))
          yp = cg.canonical(cg.compose(yp, y));
      }
      for (auto &[f, coords] : elems)
        coords.resize(basis.size(), 0);
    }
    // pad all coordinate vectors to the final basis size
    for (auto &[key, coords] : table)
      coords.resize(basis.size(), 0);
    if (table.size() != (uint64_t(1) << v2))
      throw std::logic_error("class group: basis does not span the 2-Sylow");

    out.generators = basis;
    out.exponents.assign(orders.begin(), orders.end());
  } else {
    if (r != 1)
      throw std::logic_error("class group: trivial 2-Sylow needs r = 1");
  }

  std::size_t g = out.exponents.size();
  out.chi_bits.resize(g);
  for (std::size_t l = 0; l < g; ++l)
    out.chi_bits[l] = cg.char_bits(out.generators[l], d.primes);

  QuadForm r_prod = cg.identity();
  for (uint64_t p : d.primes) {
    QuadForm amb = cg.reduce(ambiguous_form(delta, p));
    QuadForm sq = cg.compose(amb, amb);
    if (!cg.is_identity(sq))
      throw std::logic_error("ambiguous class does not have order <= 2");
    QuadForm can = cg.canonical(amb);
    auto it = table.find(form_key(can));
    if (it == table.end())
      throw std::logic_error("ambiguous class missing from 2-Sylow table");
    out.ramified_coords.push_back(it->second);
    for (std::size_t l = 0; l < g; ++l) {
      uint64_t ord = uint64_t(1) << out.exponents[l];
      if ((2 * it->second[l]) % ord != 0)
        throw std::logic_error("ambiguous class is not 2-torsion");
    }
    r_prod = cg.canonical(cg.compose(r_prod, amb));
  }
  out.r_class.assign(g, 0);
  for (std::size_t l = 0; l < g; ++l) {
    uint64_t ord = uint64_t(1) << out.exponents[l];
    for (std::size_t i = 0; i < r; ++i)
      out.r_class[l] = (out.r_class[l] + out.ramified_coords[i][l]) % ord;
  }
  {
    auto it = table.find(form_key(r_prod));
    if (it == table.end() || it->second != out.r_class)
      throw std::logic_error("R class coordinates disagree with product");
  }

  // class of (-1, ., .): quotient by it gives the ordinary class group
  QuadForm tau = delta % 2 ? QuadForm{-1, 1, (delta - 1) / 4}
                           : QuadForm{-1, 0, delta / 4};
  QuadForm tau_red = cg.canonical(cg.reduce(tau));
  auto it = table.find(form_key(tau_red));
  if (it == table.end())
    throw std::logic_error("tau class missing from 2-Sylow table");
  out.tau_coords = it->second;
  out.has_tau = true;

  return out;
}

} // namespace

bool is_reduced(const QuadForm &f, int64_t delta) {
  check_delta(delta);
  if (f.disc() != delta)
    return false;
  return is_reduced_wide(WideForm{f.a, f.b, f.c}, delta,
                         (int64_t)isqrt_u64((uint64_t)delta));
}

QuadForm rho(const QuadForm &f, int64_t delta) {
  check_delta(delta);
  if (f.disc() != delta)
    throw std::invalid_argument("rho: discriminant mismatch");
  return narrow(
      rho_wide(WideForm{f.a, f.b, f.c}, delta,
               (int64_t)isqrt_u64((uint64_t)delta)));
}

QuadForm reduce_form(QuadForm f, int64_t delta) {
  check_delta(delta);
  if (f.disc() != delta)
    throw std::invalid_argument("reduce_form: discriminant mismatch");
  return reduce_wide(WideForm{f.a, f.b, f.c}, delta,
                     (int64_t)isqrt_u64((uint64_t)delta));
}

std::vector<QuadForm> reduced_forms(int64_t delta) {
  ClassGroup cg(delta);
  return cg.forms;
}

int64_t discriminant_of(const FamilyDElement &d) {
  return d.d % 4 == 1 ? (int64_t)d.d : 4 * (int64_t)d.d;
}

NarrowClassData narrow_class_group(const FamilyDElement &d,
                                   int64_t delta_bound) {
  int64_t delta = discriminant_of(d);
  NarrowClassData out;
  if (cache_get(delta, out, /*need_full=*/false))
    return out;
  out = compute_class_data(d, delta_bound);
  cache_put(out, /*allow_downgrade=*/false);
  return out;
}

uint64_t ordinary_sylow_order(const NarrowClassData &data) {
  if (!data.has_tau)
    throw std::invalid_argument(
        "ordinary_sylow_order: data lacks the tau class (cache-loaded?)");
  uint64_t syl = 1;
  for (int e : data.exponents)
    syl <<= e;
  bool tau_trivial = true;
  for (uint64_t c : data.tau_coords)
    if (c)
      tau_trivial = false;
  return tau_trivial ? syl : syl / 2;
}

namespace {

struct PairingContext {
  const NarrowClassData *data;
  std::size_t r, g;

  // coordinates of Up(v) = sum over set bits of v of the ramified classes
  std::vector<uint64_t> up_coords(const F2Vec &v) const {
    std::vector<uint64_t> c(g, 0);
    for (std::size_t l = 0; l < g; ++l) {
      uint64_t ord = uint64_t(1) << data->exponents[l];
      for (std::size_t i = 0; i < r; ++i)
        if (v.get(i))
          c[l] = (c[l] + data->ramified_coords[i][l]) % ord;
    }
    return c;
  }

  int t_bit(const F2Vec &w, std::size_t l) const {
    int t = 0;
    for (std::size_t j = 0; j < r; ++j)
      if (w.get(j))
        t ^= data->chi_bits[l][j];
    return t;
  }

  // <Up(v), chi_w> at level k: psi is the lift of chi_w by 2^{e_l - k} per
  // coordinate; the value psi(Up(v)) must land in {0, 1/2} of Q/Z.
  int art_bit(const F2Vec &v, const F2Vec &w, int k) const {
    mpq_class frac = 0;
    for (std::size_t l = 0; l < g; ++l) {
      int e = data->exponents[l];
      uint64_t ord = uint64_t(1) << e;
      uint64_t c = 0;
      for (std::size_t i = 0; i < r; ++i)
        if (v.get(i))
          c = (c + data->ramified_coords[i][l]) % ord;
      if ((2 * c) % ord != 0)
        throw std::logic_error("artin pairing: argument is not 2-torsion");
      int t = t_bit(w, l);
      if (e < k) {
        if (c != 0)
          throw std::logic_error("artin pairing: left membership violated");
        if (t != 0)
          throw std::logic_error("artin pairing: right membership violated");
        continue;
      }
      uint64_t s = (uint64_t)t << (e - k); // psi coordinate
      mpq_class term(mpz_class((unsigned long)c) * (unsigned long)s,
                     mpz_class((unsigned long)ord));
      term.canonicalize();
      frac += term;
    }
    mpz_class fl = frac.get_num() / frac.get_den(); // floor for frac >= 0
    frac -= fl;
    if (frac == 0)
      return 0;
    if (frac == mpq_class(1, 2))
      return 1;
    throw std::logic_error("artin pairing: value escaped {0, 1/2}");
  }
};

F2Vec lift_combination(const F2Matrix &basis, const F2Vec &coeff) {
  F2Vec out(basis.cols());
  for (std::size_t i = 0; i < basis.rows(); ++i)
    if (coeff.get(i))
      out ^= basis.row(i);
  return out;
}

// Solve x * rows(basis) = target; throws when unsolvable.
F2Vec express_in_rows(const F2Matrix &basis, const F2Vec &target) {
  std::size_t n = basis.rows(), c = basis.cols();
  F2Matrix aug(n + 1, c + n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j)
      aug.set(i, j, basis.get(i, j));
    aug.set(i, c + i, true);
  }
  for (std::size_t j = 0; j < c; ++j)
    aug.set(n, j, target.get(j));
  aug.set(n, c + n, true);
  // eliminate on the first c columns only
  std::size_t rank = 0;
  for (std::size_t col = 0; col < c && rank < n + 1; ++col) {
    std::size_t sel = n + 1;
    for (std::size_t i = rank; i < n + 1; ++i)
      if (aug.get(i, col)) {
        sel = i;
        break;
      }
    if (sel == n + 1)
      continue;
    aug.swap_rows(sel, rank);
    for (std::size_t i = 0; i < n + 1; ++i)
      if (i != rank && aug.get(i, col))
        aug.xor_row_into(rank, i);
    ++rank;
  }
  for (std::size_t i = 0; i < n + 1; ++i) {
    bool lead = false;
    for (std::size_t j = 0; j < c; ++j)
      if (aug.get(i, j))
        lead = true;
    if (!lead && aug.get(i, c + n)) {
      // this row encodes target as a combination of basis rows
      F2Vec x(n);
      for (std::size_t j = 0; j < n; ++j)
        x.set(j, aug.get(i, c + j));
      return x;
    }
  }
  throw std::logic_error("express_in_rows: target outside the row space");
}

} // namespace

ArtinSequence artin_sequence(const FamilyDElement &d, int64_t delta_bound) {
  int64_t delta = discriminant_of(d);
  NarrowClassData data;
  if (!cache_get(delta, data, /*need_full=*/true)) {
    data = compute_class_data(d, delta_bound);
    cache_put(data, /*allow_downgrade=*/false);
  }

  std::size_t r = d.primes.size();
  std::size_t g = data.exponents.size();
  PairingContext ctx{&data, r, g};

  ArtinSequence seq;
  F2Vec R = F2Vec::ones(r);

  // First pairing (genus level): P[i][j] = chi_{p_j} of ramified class i.
  F2Matrix P(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      // chi is a sign character, so only the parity of each coordinate acts
      int bit = 0;
      for (std::size_t l = 0; l < g; ++l)
        bit ^= (int)(data.ramified_coords[i][l] & 1) * data.chi_bits[l][j];
      P.set(i, j, bit);
    }
  F2Matrix A = P.left_kernel_basis().row_space_basis();
  F2Matrix B = P.kernel_basis().row_space_basis();
  if (!B.row_space_contains(R))
    throw std::logic_error("artin_sequence: R escaped the right kernel");

  int e_max = g ? data.exponents[0] : 0;
  seq.last_k = 1;
  for (int k = 2; k <= e_max; ++k) {
    std::size_t da = A.rows(), db = B.rows();
    F2Matrix art(da, db);
    for (std::size_t i = 0; i < da; ++i)
      for (std::size_t j = 0; j < db; ++j)
        art.set(i, j, ctx.art_bit(A.row(i), B.row(j), k));
    seq.matrices.push_back(art);
    seq.a_basis.push_back(A);
    seq.b_basis.push_back(B);
    seq.r_in_b.push_back(express_in_rows(B, R));
    seq.last_k = k;

    F2Matrix lk = art.left_kernel_basis();
    F2Matrix rk = art.kernel_basis();
    std::vector<F2Vec> a_next, b_next;
    for (std::size_t i = 0; i < lk.rows(); ++i)
      a_next.push_back(lift_combination(A, lk.row(i)));
    for (std::size_t i = 0; i < rk.rows(); ++i)
      b_next.push_back(lift_combination(B, rk.row(i)));
    A = F2Matrix::from_rows(a_next, r).row_space_basis();
    B = F2Matrix::from_rows(b_next, r).row_space_basis();
    if (!B.row_space_contains(R))
      throw std::logic_error("artin_sequence: R escaped the right kernel");
    if (A.rows() <= 1) {
      // A is one-dimensional or zero; since the chain is decreasing, R's
      // membership can no longer change
      break;
    }
  }
  seq.a_final = A;
  seq.b_final = B;
  seq.pellian = A.row_space_contains(R);
  return seq;
}

int artin_pairing(const FamilyDElement &d, const F2Vec &v, const F2Vec &w,
                  int k, int64_t delta_bound) {
  if (k < 2)
    throw std::invalid_argument("artin_pairing: level starts at 2");
  int64_t delta = discriminant_of(d);
  NarrowClassData data;
  if (!cache_get(delta, data, /*need_full=*/true)) {
    data = compute_class_data(d, delta_bound);
    cache_put(data, /*allow_downgrade=*/false);
  }
  std::size_t r = d.primes.size();
  if (v.size() != r || w.size() != r)
    throw std::invalid_argument("artin_pairing: vector arity mismatch");
  PairingContext ctx{&data, r, data.exponents.size()};
  return ctx.art_bit(v, w, k);
}

bool sqrt_d_class_trivial(const FamilyDElement &d, int64_t delta_bound) {
  return narrow_class_group(d, delta_bound).r_class_trivial();
}

void class_cache_clear() {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_cache.clear();
}

std::size_t class_cache_size() {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  return g_cache.size();
}

std::string serialize_class_data(const NarrowClassData &data) {
  std::ostringstream os;
  os << data.delta << ';' << data.h_plus << ';';
  for (std::size_t l = 0; l < data.exponents.size(); ++l) {
    if (l)
      os << ',';
    os << data.exponents[l];
  }
  os << ';';
  for (std::size_t i = 0; i < data.ramified_coords.size(); ++i) {
    if (i)
      os << '|';
    for (std::size_t l = 0; l < data.ramified_coords[i].size(); ++l) {
      if (l)
        os << ',';
      os << data.ramified_coords[i][l];
    }
  }
  return os.str();
}

NarrowClassData parse_class_data(const std::string &line,
                                 const FamilyDElement &d) {
  NarrowClassData out;
  out.d = d;
  out.from_cache = true;
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == ';') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 4)
    throw std::invalid_argument("class cache: malformed record");
  out.delta = std::stoll(parts[0]);
  if (out.delta != discriminant_of(d))
    throw std::invalid_argument("class cache: record does not match d");
  out.h_plus = std::stoull(parts[1]);
  if (!parts[2].empty()) {
    std::istringstream es(parts[2]);
    std::string tok;
    while (std::getline(es, tok, ','))
      out.exponents.push_back(std::stoi(tok));
  }
  if (!parts[3].empty()) {
    std::istringstream rs(parts[3]);
    std::string row;
    while (std::getline(rs, row, '|')) {
      std::vector<uint64_t> coords;
      if (!row.empty()) {
        std::istringstream cs(row);
        std::string tok;
        while (std::getline(cs, tok, ','))
          coords.push_back(std::stoull(tok));
      }
      out.ramified_coords.push_back(coords);
    }
  } else {
    out.ramified_coords.assign(d.primes.size(), {});
  }
  if (out.ramified_coords.size() != d.primes.size())
    throw std::invalid_argument("class cache: wrong number of rows");
  std::size_t g = out.exponents.size();
  out.r_class.assign(g, 0);
  for (std::size_t l = 0; l < g; ++l) {
    uint64_t ord = uint64_t(1) << out.exponents[l];
    for (auto &rowc : out.ramified_coords) {
      if (rowc.size() != g)
        throw std::invalid_argument("class cache: row width mismatch");
      out.r_class[l] = (out.r_class[l] + rowc[l]) % ord;
    }
  }
  return out;
}

void save_class_cache(std::ostream &os,
                      const std::vector<NarrowClassData> &entries) {
  std::vector<const NarrowClassData *> sorted;
  for (const auto &e : entries)
    sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const NarrowClassData *a, const NarrowClassData *b) {
              return a->delta < b->delta;
            });
  for (const NarrowClassData *e : sorted)
    os << serialize_class_data(*e) << '\n';
}

std::size_t load_class_cache(std::istream &is) {
  std::size_t n = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::size_t semi = line.find(';');
    int64_t delta = std::stoll(line.substr(0, semi));
    uint64_t dd = delta % 4 == 0 ? (uint64_t)(delta / 4) : (uint64_t)delta;
    auto fam = family_d_element(dd);
    if (!fam)
      throw std::invalid_argument("class cache: delta outside the family");
    NarrowClassData data = parse_class_data(line, *fam);
    cache_put(data, /*allow_downgrade=*/false);
    ++n;
  }
  return n;
}

} // namespace negpell
