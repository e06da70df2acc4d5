#include "negpell/combi.hpp"

#include "negpell/f2.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <gmpxx.h>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace negpell {

namespace {

constexpr uint64_t kCubePointBound = uint64_t(1) << 20;
constexpr uint64_t kMatrixBitBound = uint64_t(1) << 28;

uint64_t draw(std::mt19937_64 &rng, uint64_t n) { return rng() % n; }

std::size_t label_index(const ProductSpace &sp, std::size_t i, int label) {
  const auto &xs = sp.sets[i];
  auto it = std::lower_bound(xs.begin(), xs.end(), label);
  if (it == xs.end() || *it != label)
    throw std::invalid_argument("label not in coordinate set");
  return std::size_t(it - xs.begin());
}

// Number of slot states of coordinate i in Cube(X, T).
uint64_t coord_states(const ProductSpace &sp, uint32_t t_mask, std::size_t i) {
  uint64_t n = sp.sets[i].size();
  return ((t_mask >> i) & 1u) ? n * n : n;
}

uint64_t slot_state(const ProductSpace &sp, uint32_t t_mask,
                    const CubePoint &x, std::size_t i) {
  uint64_t n = sp.sets[i].size();
  uint64_t lo = label_index(sp, i, x.slot[i].first);
  if (!((t_mask >> i) & 1u)) {
    if (x.slot[i].first != x.slot[i].second)
      throw std::invalid_argument("single coordinate with distinct pair");
    return lo;
  }
  return lo * n + label_index(sp, i, x.slot[i].second);
}

std::pair<int, int> state_slot(const ProductSpace &sp, uint32_t t_mask,
                               std::size_t i, uint64_t state) {
  const auto &xs = sp.sets[i];
  if (!((t_mask >> i) & 1u))
    return {xs[state], xs[state]};
  uint64_t n = xs.size();
  return {xs[state / n], xs[state % n]};
}

} // namespace

ProductSpace product_space(std::vector<std::vector<int>> sets,
                           uint32_t s_mask) {
  if (sets.empty())
    throw std::invalid_argument("product space needs at least one coordinate");
  if (sets.size() > 20)
    throw std::invalid_argument("too many coordinates");
  if (s_mask >> sets.size())
    throw std::invalid_argument("s_mask has bits outside [0, r)");
  std::set<int> seen;
  for (auto &xs : sets) {
    if (xs.empty())
      throw std::invalid_argument("empty coordinate set");
    std::sort(xs.begin(), xs.end());
    if (std::adjacent_find(xs.begin(), xs.end()) != xs.end())
      throw std::invalid_argument("duplicate label in coordinate set");
    for (int v : xs)
      if (!seen.insert(v).second)
        throw std::invalid_argument("coordinate sets are not disjoint");
  }
  return ProductSpace{std::move(sets), s_mask};
}

uint64_t cube_size(const ProductSpace &sp, uint32_t t_mask) {
  if (t_mask >> sp.r())
    throw std::invalid_argument("t_mask has bits outside [0, r)");
  uint64_t total = 1;
  for (std::size_t i = 0; i < sp.r(); ++i) {
    uint64_t st = coord_states(sp, t_mask, i);
    if (total > (uint64_t(1) << 40) / st)
      throw std::overflow_error("cube too large");
    total *= st;
  }
  return total;
}

std::vector<CubePoint> cube_points(const ProductSpace &sp, uint32_t t_mask) {
  uint64_t total = cube_size(sp, t_mask);
  if (total > kCubePointBound)
    throw std::length_error("cube exceeds the materialization bound");
  std::size_t r = sp.r();
  std::vector<CubePoint> out;
  out.reserve(total);
  std::vector<uint64_t> state(r, 0);
  for (uint64_t k = 0; k < total; ++k) {
    CubePoint x;
    x.mask = t_mask;
    x.slot.resize(r);
    for (std::size_t i = 0; i < r; ++i)
      x.slot[i] = state_slot(sp, t_mask, i, state[i]);
    out.push_back(std::move(x));
    for (std::size_t i = r; i-- > 0;) {
      if (++state[i] < coord_states(sp, t_mask, i))
        break;
      state[i] = 0;
    }
  }
  return out;
}

uint64_t cube_index(const ProductSpace &sp, const CubePoint &x) {
  if (x.slot.size() != sp.r())
    throw std::invalid_argument("cube point arity mismatch");
  uint64_t idx = 0;
  for (std::size_t i = 0; i < sp.r(); ++i)
    idx = idx * coord_states(sp, x.mask, i) + slot_state(sp, x.mask, x, i);
  return idx;
}

std::vector<CubePoint> subcube(const ProductSpace &sp, const CubePoint &x,
                               uint32_t t_mask) {
  if (t_mask & ~x.mask)
    throw std::invalid_argument("subcube mask not contained in point mask");
  uint32_t free_mask = x.mask & ~t_mask;
  std::vector<std::size_t> free_coords;
  for (std::size_t i = 0; i < sp.r(); ++i)
    if ((free_mask >> i) & 1u)
      free_coords.push_back(i);
  std::vector<CubePoint> out;
  for (uint32_t pick = 0; pick < (uint32_t(1) << free_coords.size()); ++pick) {
    CubePoint y = x;
    y.mask = t_mask;
    for (std::size_t k = 0; k < free_coords.size(); ++k) {
      std::size_t i = free_coords[k];
      int v = ((pick >> k) & 1u) ? x.slot[i].second : x.slot[i].first;
      y.slot[i] = {v, v};
    }
    out.push_back(std::move(y));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> plain_labels(const CubePoint &x) {
  if (x.mask != 0)
    throw std::invalid_argument("not a plain point");
  std::vector<int> out;
  out.reserve(x.slot.size());
  for (auto &s : x.slot)
    out.push_back(s.first);
  return out;
}

CubePoint plain_point(const std::vector<int> &labels) {
  CubePoint x;
  x.mask = 0;
  x.slot.reserve(labels.size());
  for (int v : labels)
    x.slot.emplace_back(v, v);
  return x;
}

std::vector<int> sigma(const ProductSpace &sp,
                       const std::map<std::vector<int>, int> &f) {
  std::vector<CubePoint> cube = cube_points(sp, sp.s_mask);
  std::vector<int> out(cube.size(), 0);
  for (std::size_t k = 0; k < cube.size(); ++k) {
    if (cube[k].degenerate())
      continue;
    int acc = 0;
    bool inside = true;
    for (const CubePoint &y : subcube(sp, cube[k], 0)) {
      auto it = f.find(plain_labels(y));
      if (it == f.end()) {
        inside = false;
        break;
      }
      acc ^= it->second & 1;
    }
    out[k] = inside ? acc : 0;
  }
  return out;
}

uint64_t add_dim_formula(const ProductSpace &sp) {
  uint64_t dim = 1;
  for (std::size_t i = 0; i < sp.r(); ++i)
    dim *= sp.doubled(i) ? sp.sets[i].size() - 1 : sp.sets[i].size();
  return dim;
}

uint64_t add_dim(const ProductSpace &sp) {
  uint64_t n_cube = cube_size(sp, sp.s_mask);
  uint64_t n_points = cube_size(sp, 0);
  if (n_cube > kCubePointBound)
    throw std::length_error("cube exceeds the materialization bound");
  if (n_points * n_cube > kMatrixBitBound)
    throw std::length_error("Sigma image matrix too large to materialize");

  std::vector<CubePoint> cube = cube_points(sp, sp.s_mask);
  std::vector<F2Vec> rows(n_points, F2Vec(n_cube));
  for (std::size_t col = 0; col < cube.size(); ++col) {
    if (cube[col].degenerate())
      continue;
    for (const CubePoint &y : subcube(sp, cube[col], 0))
      rows[cube_index(sp, y)].flip(col);
  }
  uint64_t rank = F2Matrix::from_rows(rows, n_cube).rank();
  if (rank != add_dim_formula(sp))
    throw std::logic_error("Sigma image rank disagrees with the closed formula");
  return rank;
}

const SystemLevel &AdditiveSystem::level(uint32_t t_mask) const {
  for (const SystemLevel &lv : levels)
    if (lv.t_mask == t_mask)
      return lv;
  throw std::invalid_argument("additive system has no such level");
}

SystemLevel &AdditiveSystem::level(uint32_t t_mask) {
  for (SystemLevel &lv : levels)
    if (lv.t_mask == t_mask)
      return lv;
  throw std::invalid_argument("additive system has no such level");
}

namespace {

bool in_acc(const SystemLevel &lv, uint64_t idx) {
  return lv.in_c[idx] && lv.f[idx] == 0;
}

std::string point_text(const CubePoint &x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.slot.size(); ++i) {
    if (i)
      os << ", ";
    if ((x.mask >> i) & 1u)
      os << "[" << x.slot[i].first << "," << x.slot[i].second << "]";
    else
      os << x.slot[i].first;
  }
  os << ")";
  return os.str();
}

std::vector<uint32_t> submasks_of(uint32_t s_mask) {
  std::vector<uint32_t> subs;
  uint32_t t = s_mask;
  for (;;) {
    subs.push_back(t);
    if (t == 0)
      break;
    t = (t - 1) & s_mask;
  }
  std::sort(subs.begin(), subs.end(), [](uint32_t a, uint32_t b) {
    int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  return subs;
}

} // namespace

ValidationReport validate_additive_system(const AdditiveSystem &sys) {
  const ProductSpace &sp = sys.space;
  ValidationReport rep;
  auto fail = [&rep](const std::string &w) {
    rep.valid = false;
    rep.witness = w;
    return rep;
  };

  std::vector<uint32_t> subs = submasks_of(sp.s_mask);
  if (sys.levels.size() != subs.size())
    return fail("level count does not match the subsets of S");
  for (std::size_t k = 0; k < subs.size(); ++k) {
    const SystemLevel &lv = sys.levels[k];
    if (lv.t_mask != subs[k])
      return fail("levels are not the subsets of S in (popcount, mask) order");
    uint64_t n = cube_size(sp, lv.t_mask);
    if (lv.in_c.size() != n || lv.f.size() != n)
      return fail("level arrays do not match the cube size");
    if (lv.a_dim < 0 || lv.a_dim > 30)
      return fail("level value-space dimension out of range");
    for (uint64_t i = 0; i < n; ++i)
      if (lv.f[i] >> lv.a_dim)
        return fail("value outside A_T");
  }

  for (const SystemLevel &lv : sys.levels) {
    if (lv.t_mask == 0)
      continue;
    std::vector<CubePoint> cube = cube_points(sp, lv.t_mask);

    // membership recursion
    for (uint64_t idx = 0; idx < cube.size(); ++idx) {
      bool should = true;
      for (std::size_t i = 0; i < sp.r() && should; ++i) {
        if (!((lv.t_mask >> i) & 1u))
          continue;
        uint32_t down = lv.t_mask & ~(uint32_t(1) << i);
        const SystemLevel &dn = sys.level(down);
        for (const CubePoint &y : subcube(sp, cube[idx], down))
          if (!in_acc(dn, cube_index(sp, y))) {
            should = false;
            break;
          }
      }
      if (should != bool(lv.in_c[idx]))
        return fail("membership recursion violated at T=" +
                    std::to_string(lv.t_mask) + ", point " +
                    point_text(cube[idx]));
    }

    // three-point law: fix a point, rewrite one doubled coordinate
    for (uint64_t idx = 0; idx < cube.size(); ++idx) {
      if (!lv.in_c[idx])
        continue;
      for (std::size_t i = 0; i < sp.r(); ++i) {
        if (!((lv.t_mask >> i) & 1u))
          continue;
        int p1 = cube[idx].slot[i].first;
        int p2 = cube[idx].slot[i].second;
        for (int p3 : sp.sets[i]) {
          CubePoint x2 = cube[idx];
          x2.slot[i] = {p2, p3};
          CubePoint x3 = cube[idx];
          x3.slot[i] = {p1, p3};
          uint64_t i2 = cube_index(sp, x2);
          uint64_t i3 = cube_index(sp, x3);
          if (!lv.in_c[i2] || !lv.in_c[i3])
            continue;
          if ((lv.f[idx] ^ lv.f[i2]) != lv.f[i3])
            return fail("three-point law violated at T=" +
                        std::to_string(lv.t_mask) + ": F" +
                        point_text(cube[idx]) + " + F" + point_text(x2) +
                        " != F" + point_text(x3));
        }
      }
    }
  }
  return rep;
}

DensityReport acceptance_density_check(const AdditiveSystem &sys) {
  ValidationReport v = validate_additive_system(sys);
  if (!v.valid)
    throw std::invalid_argument("invalid additive system: " + v.witness);
  const ProductSpace &sp = sys.space;
  int s = __builtin_popcount(sp.s_mask);
  if (s > 10)
    throw std::length_error("density bound exponent too large");

  const SystemLevel &base = sys.level(0);
  const SystemLevel &top = sys.level(sp.s_mask);
  uint64_t n_x = cube_size(sp, 0);
  uint64_t n_cube = cube_size(sp, sp.s_mask);
  uint64_t acc0 = 0, acc_top = 0;
  for (uint64_t i = 0; i < n_x; ++i)
    acc0 += in_acc(base, i);
  for (uint64_t i = 0; i < n_cube; ++i)
    acc_top += in_acc(top, i);

  uint64_t a = 1;
  for (const SystemLevel &lv : sys.levels)
    a = std::max(a, uint64_t(1) << lv.a_dim);

  unsigned long e2 = 1ul << s; // 2^|S|
  unsigned long e3 = 1;        // 3^|S|
  for (int k = 0; k < s; ++k)
    e3 *= 3;

  mpq_class delta(acc0, n_x);
  delta.canonicalize();
  mpq_class lhs(acc_top, n_cube);
  lhs.canonicalize();
  mpz_class dnum = delta.get_num(), dden = delta.get_den();
  mpz_class rnum, rden, apow;
  mpz_pow_ui(rnum.get_mpz_t(), dnum.get_mpz_t(), e2);
  mpz_pow_ui(rden.get_mpz_t(), dden.get_mpz_t(), e2);
  mpz_ui_pow_ui(apow.get_mpz_t(), static_cast<unsigned long>(a), e3);
  rden *= apow;
  mpq_class rhs(rnum, rden);
  rhs.canonicalize();

  DensityReport rep;
  rep.delta = delta.get_d();
  rep.a = a;
  rep.lhs = lhs.get_d();
  rep.rhs = rhs.get_d();
  rep.pass = lhs >= rhs;
  return rep;
}

AdditiveSystem random_additive_system(const ProductSpace &sp, int max_a_dim,
                                      uint64_t seed) {
  if (max_a_dim < 0 || max_a_dim > 30)
    throw std::invalid_argument("max_a_dim out of range");
  std::mt19937_64 rng(seed);
  uint64_t n_x = cube_size(sp, 0);

  AdditiveSystem sys;
  sys.space = sp;
  for (uint32_t t_mask : submasks_of(sp.s_mask)) {
    SystemLevel lv;
    lv.t_mask = t_mask;
    lv.a_dim = int(draw(rng, uint64_t(max_a_dim) + 1));
    uint32_t vmask =
        lv.a_dim == 0 ? 0u : uint32_t((uint64_t(1) << lv.a_dim) - 1);

    // potential on plain points; F_T is its Sigma, zero on degenerate points
    std::vector<uint32_t> potential(n_x);
    for (uint64_t i = 0; i < n_x; ++i)
      potential[i] = uint32_t(rng()) & vmask;

    std::vector<CubePoint> cube = cube_points(sp, t_mask);
    lv.f.assign(cube.size(), 0);
    lv.in_c.assign(cube.size(), 0);
    for (uint64_t idx = 0; idx < cube.size(); ++idx) {
      if (!cube[idx].degenerate()) {
        uint32_t acc = 0;
        for (const CubePoint &y : subcube(sp, cube[idx], 0))
          acc ^= potential[cube_index(sp, y)];
        lv.f[idx] = acc;
      }
      if (t_mask == 0) {
        lv.in_c[idx] = char(rng() & 1);
      } else {
        bool member = true;
        for (std::size_t i = 0; i < sp.r() && member; ++i) {
          if (!((t_mask >> i) & 1u))
            continue;
          uint32_t down = t_mask & ~(uint32_t(1) << i);
          const SystemLevel &dn = sys.level(down);
          for (const CubePoint &y : subcube(sp, cube[idx], down))
            if (!in_acc(dn, cube_index(sp, y))) {
              member = false;
              break;
            }
        }
        lv.in_c[idx] = char(member);
      }
    }
    sys.levels.push_back(std::move(lv));
  }
  return sys;
}

std::optional<std::vector<std::vector<int>>>
find_box(const ProductSpace &sp, const std::vector<std::vector<int>> &y,
         int b) {
  if (b < 1)
    throw std::invalid_argument("box side must be at least 1");
  uint64_t n_x = cube_size(sp, 0);
  if (n_x > (uint64_t(1) << 22))
    throw std::length_error("point space too large for box search");

  std::vector<char> tensor(n_x, 0);
  for (const auto &labels : y) {
    if (labels.size() != sp.r())
      throw std::invalid_argument("Y point arity mismatch");
    tensor[cube_index(sp, plain_point(labels))] = 1;
  }

  std::size_t r = sp.r();
  for (std::size_t i = 0; i < r; ++i)
    if (uint64_t(b) > sp.sets[i].size())
      return std::nullopt;

  // stride[i] = product of the sizes of the coordinates after i
  std::vector<uint64_t> stride(r);
  {
    uint64_t suffix = 1;
    for (std::size_t i = r; i-- > 0;) {
      stride[i] = suffix;
      suffix *= sp.sets[i].size();
    }
  }

  std::vector<std::vector<int>> chosen(r);

  // recursive lexicographic combination search with empty-slice pruning
  std::function<bool(std::size_t, const std::vector<char> &)> rec =
      [&](std::size_t lvl, const std::vector<char> &t) -> bool {
    if (lvl == r)
      return !t.empty() && t[0] != 0;
    std::size_t n = sp.sets[lvl].size();
    uint64_t st = stride[lvl];
    std::vector<std::size_t> comb(b);
    for (int k = 0; k < b; ++k)
      comb[k] = std::size_t(k);
    for (;;) {
      std::vector<char> sliced(st, 1);
      for (int k = 0; k < b && !sliced.empty(); ++k) {
        const char *block = &t[comb[k] * st];
        bool any = false;
        for (uint64_t j = 0; j < st; ++j) {
          sliced[j] = char(sliced[j] & block[j]);
          any = any || sliced[j];
        }
        if (!any) {
          sliced.clear();
          break;
        }
      }
      if (!sliced.empty() && rec(lvl + 1, sliced)) {
        chosen[lvl].clear();
        for (int k = 0; k < b; ++k)
          chosen[lvl].push_back(sp.sets[lvl][comb[k]]);
        return true;
      }
      // next combination
      int k = b - 1;
      while (k >= 0 && comb[k] == n - std::size_t(b - k))
        --k;
      if (k < 0)
        return false;
      ++comb[k];
      for (int j = k + 1; j < b; ++j)
        comb[j] = comb[j - 1] + 1;
    }
  };

  if (!rec(0, tensor))
    return std::nullopt;
  return chosen;
}

SecondMomentReport
permutation_second_moment(const SecondMomentParams &params,
                          const std::vector<std::vector<int>> &beta_pair,
                          const std::vector<std::vector<int>> &beta_aux) {
  int r = params.r, k0 = params.k0, k1 = params.k1, k2 = params.k2;
  int pc = params.p_count;
  if (r < 1 || k0 < 0 || k0 > k1 || k1 > k2 || k2 > r || k2 > 7)
    throw std::invalid_argument("second moment: need 0 <= k0 <= k1 <= k2 <= min(r, 7)");
  if (pc < 0 || pc > 30)
    throw std::invalid_argument("second moment: auxiliary set too large");
  uint64_t gate = (uint64_t(1) << (k0 + pc + 1)) * uint64_t(k1) * uint64_t(k1);
  if (!(gate < uint64_t(k2)))
    throw std::invalid_argument(
        "second moment precondition violated: 2^(k0+|P|+1) k1^2 = " +
        std::to_string(gate) + " is not below k2 = " + std::to_string(k2));
  if (int(beta_pair.size()) < k1)
    throw std::invalid_argument("beta_pair too small");
  for (int i = 0; i < k1; ++i)
    if (int(beta_pair[i].size()) < k1 || (pc > 0 && (int(beta_aux.size()) <= i ||
                                                     int(beta_aux[i].size()) < pc)))
      throw std::invalid_argument("symbol tables too small");

  // C(k0, k1) = #{unordered pairs i < j in [k1] with i <= k0}, 1-based
  uint64_t c_pairs = (uint64_t(k0) * k0 - k0) / 2 + uint64_t(k0) * (k1 - k0);
  uint64_t t = c_pairs + uint64_t(k1) * pc; // tested coordinates per sigma

  uint64_t fact = 1;
  for (int k = 2; k <= k2; ++k)
    fact *= uint64_t(k);

  // per sigma: sorted list of (coordinate key, required value)
  struct Tested {
    std::vector<std::pair<uint64_t, int>> kv;
  };
  std::vector<Tested> all;
  std::vector<int> perm(k2);
  for (int i = 0; i < k2; ++i)
    perm[i] = i;
  std::vector<int> inv(k2);
  do {
    for (int i = 0; i < k2; ++i)
      inv[perm[i]] = i;
    Tested ts;
    // pair conditions: 0-based i < j < k1 with i < k0
    for (int i = 0; i < k0; ++i)
      for (int j = i + 1; j < k1; ++j) {
        int u = inv[i], v = inv[j];
        if (u > v)
          std::swap(u, v);
        ts.kv.emplace_back(uint64_t(u) * 64 + v, beta_pair[i][j]);
      }
    for (int i = 0; i < k1; ++i)
      for (int p = 0; p < pc; ++p)
        ts.kv.emplace_back((uint64_t(1) << 32) + uint64_t(inv[i]) * 64 + p,
                           beta_aux[i][p]);
    std::sort(ts.kv.begin(), ts.kv.end());
    if (ts.kv.size() != t)
      throw std::logic_error("tested coordinate count mismatch");
    all.push_back(std::move(ts));
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (all.size() != fact)
    throw std::logic_error("permutation enumeration mismatch");

  // Sum over all a of (E - |B|)^2, normalized by 2^|M|, via the moment
  // decomposition: E = k2!/2^t cancels the first and cross terms, leaving
  //   sum_{s1,s2 compatible} 2^(-|tested union|) - E^2.
  std::vector<uint64_t> by_union(2 * std::size_t(t) + 1, 0);
  for (const Tested &t1 : all)
    for (const Tested &t2 : all) {
      std::size_t i = 0, j = 0, shared = 0;
      bool compat = true;
      while (i < t1.kv.size() && j < t2.kv.size()) {
        if (t1.kv[i].first < t2.kv[j].first)
          ++i;
        else if (t2.kv[j].first < t1.kv[i].first)
          ++j;
        else {
          if (t1.kv[i].second != t2.kv[j].second) {
            compat = false;
            break;
          }
          ++shared;
          ++i;
          ++j;
        }
      }
      if (compat)
        ++by_union[2 * t - shared];
    }

  mpq_class lhs = 0;
  for (std::size_t u = 0; u < by_union.size(); ++u)
    if (by_union[u]) {
      mpz_class p2;
      mpz_ui_pow_ui(p2.get_mpz_t(), 2, static_cast<unsigned long>(u));
      mpq_class term(mpz_class(static_cast<unsigned long>(by_union[u])), p2);
      term.canonicalize();
      lhs += term;
    }
  mpz_class p2t;
  mpz_ui_pow_ui(p2t.get_mpz_t(), 2, static_cast<unsigned long>(2 * t));
  mpq_class esq(mpz_class(static_cast<unsigned long>(fact * fact)), p2t);
  esq.canonicalize();
  lhs -= esq;
  // the sum is a variance, so it cannot go negative
  assert(lhs >= 0);

  mpq_class rhs(mpz_class(static_cast<unsigned long>(gate * fact * fact)),
                mpz_class(static_cast<unsigned long>(k2)) * p2t);
  rhs.canonicalize();

  SecondMomentReport rep;
  rep.lhs = lhs.get_d();
  rep.rhs = rhs.get_d();
  rep.pass = lhs <= rhs;
  return rep;
}

} // namespace negpell
