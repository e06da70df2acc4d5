#include "negpell/equidist.hpp"

#include "negpell/arith.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

namespace negpell {

namespace {

constexpr uint64_t kTupleBound = 10000000;

int symbol_bit(uint64_t num, uint64_t den) {
  int s = kronecker(static_cast<long long>(num), static_cast<long long>(den));
  if (s == 0)
    throw std::logic_error("vanishing symbol inside a prebox");
  return iota_inv(s);
}

// one precomputed bit table per constraint entry, plus the coordinate at
// which the entry becomes decidable during depth-first iteration
struct CompiledPair {
  int i, j, target;
  std::vector<uint8_t> bits; // [idx_i * |X_j| + idx_j]
};

struct CompiledAux {
  int i, target;
  std::vector<uint8_t> bits; // [idx_i]
};

struct Compiled {
  std::vector<std::vector<CompiledPair>> pair_at; // by deciding coordinate j
  std::vector<std::vector<CompiledAux>> aux_at;   // by coordinate i
};

Compiled compile(const Prebox &box, const SymbolConstraint &c) {
  std::size_t r = box.r();
  Compiled out;
  out.pair_at.resize(r);
  out.aux_at.resize(r);
  for (const PairConstraint &pc : c.pairs) {
    if (pc.i < 0 || pc.j <= pc.i || std::size_t(pc.j) >= r)
      throw std::invalid_argument("pair constraint indices out of range");
    if (pc.target != 0 && pc.target != 1)
      throw std::invalid_argument("constraint target must be a bit");
    CompiledPair cp{pc.i, pc.j, pc.target, {}};
    const auto &xi = box.x[pc.i], &xj = box.x[pc.j];
    cp.bits.resize(xi.size() * xj.size());
    for (std::size_t a = 0; a < xi.size(); ++a)
      for (std::size_t b = 0; b < xj.size(); ++b)
        cp.bits[a * xj.size() + b] = uint8_t(symbol_bit(xi[a], xj[b]));
    out.pair_at[pc.j].push_back(std::move(cp));
  }
  for (const AuxConstraint &ac : c.aux) {
    if (ac.i < 0 || std::size_t(ac.i) >= r || ac.p_index < 0 ||
        std::size_t(ac.p_index) >= box.p.size())
      throw std::invalid_argument("auxiliary constraint indices out of range");
    if (ac.target != 0 && ac.target != 1)
      throw std::invalid_argument("constraint target must be a bit");
    CompiledAux ca{ac.i, ac.target, {}};
    const auto &xi = box.x[ac.i];
    ca.bits.resize(xi.size());
    for (std::size_t a = 0; a < xi.size(); ++a)
      ca.bits[a] = uint8_t(symbol_bit(xi[a], box.p[ac.p_index]));
    out.aux_at[ac.i].push_back(std::move(ca));
  }
  return out;
}

uint64_t count_compiled(const Prebox &box, const Compiled &c) {
  std::size_t r = box.r();
  std::vector<std::size_t> idx(r, 0);
  uint64_t count = 0;

  // depth-first odometer; a constraint is tested as soon as its last
  // coordinate is chosen
  std::size_t depth = 0;
  for (;;) {
    if (idx[depth] == box.x[depth].size()) {
      if (depth == 0)
        break;
      idx[depth] = 0;
      ++idx[--depth];
      continue;
    }
    bool ok = true;
    for (const CompiledAux &ca : c.aux_at[depth])
      if (ca.bits[idx[depth]] != ca.target) {
        ok = false;
        break;
      }
    if (ok)
      for (const CompiledPair &cp : c.pair_at[depth])
        if (cp.bits[idx[cp.i] * box.x[cp.j].size() + idx[depth]] !=
            cp.target) {
          ok = false;
          break;
        }
    if (!ok) {
      ++idx[depth];
      continue;
    }
    if (depth + 1 == r) {
      ++count;
      ++idx[depth];
    } else {
      ++depth;
    }
  }
  return count;
}

} // namespace

Prebox build_prebox(const std::vector<std::pair<uint64_t, uint64_t>> &intervals,
                    const std::vector<uint64_t> &aux) {
  if (intervals.empty())
    throw std::invalid_argument("prebox needs at least one interval");
  if (intervals.front().first <= 2)
    throw std::invalid_argument("first interval must start above 2");
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].first >= intervals[i].second)
      throw std::invalid_argument("interval bounds misordered");
    if (i > 0 && intervals[i - 1].second > intervals[i].first)
      throw std::invalid_argument("intervals overlap or are misordered");
  }

  Prebox box;
  box.intervals = intervals;
  for (auto [s, t] : intervals) {
    std::vector<uint64_t> xs;
    for (uint64_t n = s + 1; n <= t; ++n)
      if (n % 4 == 1 && is_prime(n))
        xs.push_back(n);
    if (xs.empty())
      throw std::invalid_argument("interval contains no admissible prime");
    box.x.push_back(std::move(xs));
  }
  uint64_t prev = 1;
  for (uint64_t q : aux) {
    if (q <= 1 || q > intervals.front().first || !is_prime(q) ||
        (q % 4 != 1 && q % 4 != 2))
      throw std::invalid_argument("auxiliary prime out of range or family");
    if (q <= prev)
      throw std::invalid_argument("auxiliary primes must ascend");
    prev = q;
    box.p.push_back(q);
  }
  return box;
}

CountResult count_X_a(const Prebox &box, const SymbolConstraint &constraint) {
  uint64_t total = 1;
  for (const auto &xs : box.x) {
    if (total > kTupleBound / xs.size())
      throw std::length_error("prebox tuple space exceeds the counting bound");
    total *= xs.size();
  }
  Compiled c = compile(box, constraint);
  uint64_t count = count_compiled(box, c);

  CountResult res;
  res.count = count;
  res.total = total;
  std::size_t m = constraint.pairs.size() + constraint.aux.size();
  res.expected = double(total) / std::ldexp(1.0, int(m));
  res.deviation = std::fabs(double(count) - res.expected) / double(total);
  return res;
}

ScanResult scan_deviation(const Prebox &box, int trials, uint64_t seed) {
  if (trials < 1)
    throw std::invalid_argument("need at least one trial");

  SymbolConstraint full;
  for (int i = 0; i < int(box.r()); ++i)
    for (int j = i + 1; j < int(box.r()); ++j)
      full.pairs.push_back({i, j, 0});
  for (int i = 0; i < int(box.r()); ++i)
    for (int p = 0; p < int(box.p.size()); ++p)
      full.aux.push_back({i, p, 0});

  uint64_t total = 1;
  for (const auto &xs : box.x) {
    if (total > kTupleBound / xs.size())
      throw std::length_error("prebox tuple space exceeds the counting bound");
    total *= xs.size();
  }
  Compiled c = compile(box, full);
  std::size_t m = full.pairs.size() + full.aux.size();
  double expected = double(total) / std::ldexp(1.0, int(m));

  std::mt19937_64 rng(seed);
  ScanResult res;
  res.trials = trials;
  for (int t = 0; t < trials; ++t) {
    for (auto &lst : c.pair_at)
      for (CompiledPair &cp : lst)
        cp.target = int(rng() & 1);
    for (auto &lst : c.aux_at)
      for (CompiledAux &ca : lst)
        ca.target = int(rng() & 1);
    uint64_t count = count_compiled(box, c);
    double dev = std::fabs(double(count) - expected) / double(total);
    res.mean_deviation += dev;
    res.max_deviation = std::max(res.max_deviation, dev);
  }
  res.mean_deviation /= trials;
  return res;
}

} // namespace negpell
