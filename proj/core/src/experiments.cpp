#include "negpell/experiments.hpp"

#include "negpell/arith.hpp"
#include "negpell/combi.hpp"
#include "negpell/equidist.hpp"
#include "negpell/f2.hpp"
#include "negpell/model.hpp"
#include "negpell/pell.hpp"
#include "negpell/qfclass.hpp"
#include "negpell/redei.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace negpell {

namespace {

std::string fmt_g(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct RunArgs {
  uint64_t limit = 0;
  uint64_t seed = 1;
  std::string out_dir;
  std::string cache;
  int threads = 1;
  const std::map<std::string, double> *thresholds = nullptr;
  ExperimentResult *res = nullptr;
};

double threshold(const RunArgs &a, const std::string &key) {
  return a.thresholds->at(key);
}

void note(const RunArgs &a, std::string text) {
  a.res->notes.push_back(std::move(text));
}

void hard_fail(const RunArgs &a, const std::string &text) {
  ++a.res->hard_failures;
  note(a, "HARD: " + text);
}

void soft_breach(const RunArgs &a, const std::string &text) {
  ++a.res->soft_breaches;
  note(a, "SOFT: " + text);
}

void write_text_file(const std::string &path,
                     const std::vector<std::string> &lines) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw std::runtime_error("cannot open for writing: " + path);
  for (const auto &l : lines)
    os << l << '\n';
  if (!os.good())
    throw std::runtime_error("write failed: " + path);
}

void write_csv(const RunArgs &a, const std::string &file_name,
               const std::vector<std::string> &lines) {
  write_text_file(a.out_dir + "/" + file_name, lines);
  a.res->outputs.push_back(file_name);
}

std::vector<uint64_t> decade_checkpoints(uint64_t limit) {
  std::vector<uint64_t> cps;
  for (uint64_t x = 10; x < limit; x *= 10)
    cps.push_back(x);
  cps.push_back(limit);
  return cps;
}

// Runs fn(block_index, block_lo, block_hi) over [lo, hi) split into
// fixed-size blocks pulled from a shared counter. Callers give each block
// its own output slot, so results merge in block order and the outcome is
// independent of the thread count.
void parallel_blocks(uint64_t lo, uint64_t hi, uint64_t block, int threads,
                     const std::function<void(std::size_t, uint64_t, uint64_t)>
                         &fn) {
  if (hi <= lo)
    return;
  std::size_t nblocks = std::size_t((hi - lo + block - 1) / block);
  int nthreads = std::max(1, threads);
  if (std::size_t(nthreads) > nblocks)
    nthreads = int(nblocks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto worker = [&]() {
    for (;;) {
      if (stop.load())
        return;
      std::size_t b = next.fetch_add(1);
      if (b >= nblocks)
        return;
      uint64_t blo = lo + uint64_t(b) * block;
      uint64_t bhi = std::min(hi, blo + block);
      try {
        fn(b, blo, bhi);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mutex);
        if (!err)
          err = std::current_exception();
        stop.store(true);
        return;
      }
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back(worker);
    for (auto &th : pool)
      th.join();
  }
  if (err)
    std::rethrow_exception(err);
}

constexpr uint64_t kSweepBlock = uint64_t(1) << 16;

// ---- resumable (d -> pellian, rk4) scan cache --------------------------
//
// Text format: a header line "upto H", then one line "d p r" per family
// member d <= H in ascending order, p the solubility bit and r the 4-rank.

struct ScanRecord {
  uint64_t d = 0;
  uint8_t pellian = 0;
  uint8_t rank4 = 0;
};

bool load_scan_cache(const std::string &path, uint64_t &upto,
                     std::vector<ScanRecord> &recs) {
  std::ifstream is(path);
  if (!is)
    return false;
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("scan cache: empty file: " + path);
  {
    std::istringstream hs(line);
    std::string tag, extra;
    if (!(hs >> tag >> upto) || tag != "upto" || upto < 2 || (hs >> extra))
      throw std::invalid_argument("scan cache: bad header: " + line);
  }
  uint64_t prev = 0;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::istringstream ls(line);
    uint64_t d = 0;
    int p = -1, r = -1;
    std::string extra;
    if (!(ls >> d >> p >> r) || (ls >> extra))
      throw std::invalid_argument("scan cache: malformed row: " + line);
    if (d <= prev || d > upto || p < 0 || p > 1 || r < 0 || r > 12)
      throw std::invalid_argument("scan cache: invalid row: " + line);
    prev = d;
    recs.push_back({d, uint8_t(p), uint8_t(r)});
  }
  return true;
}

void save_scan_cache(const std::string &path, uint64_t upto,
                     const std::vector<ScanRecord> &recs) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os)
      throw std::runtime_error("cannot open for writing: " + tmp);
    os << "upto " << upto << '\n';
    for (const auto &r : recs)
      os << r.d << ' ' << int(r.pellian) << ' ' << int(r.rank4) << '\n';
    if (!os.good())
      throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// Family members up to `limit` with solubility and 4-rank bits, replaying
// a cache prefix when one is given and extending it past its horizon.
std::vector<ScanRecord> family_scan_records(const RunArgs &a,
                                            uint64_t limit) {
  uint64_t upto = 1;
  std::vector<ScanRecord> recs;
  if (!a.cache.empty() && load_scan_cache(a.cache, upto, recs))
    note(a, "scan cache: replayed " + std::to_string(recs.size()) +
                " records (horizon " + std::to_string(upto) + ")");
  if (upto < limit) {
    uint64_t lo = upto + 1, hi = limit + 1;
    std::size_t nblocks = std::size_t((hi - lo + kSweepBlock - 1) / kSweepBlock);
    std::vector<std::vector<ScanRecord>> parts(nblocks);
    parallel_blocks(lo, hi, kSweepBlock, a.threads,
                    [&](std::size_t b, uint64_t blo, uint64_t bhi) {
                      auto &out = parts[b];
                      for_each_family_D(blo, bhi, [&](const FamilyDElement &e) {
                        out.push_back({e.d,
                                       uint8_t(neg_pell_soluble(e.d) ? 1 : 0),
                                       uint8_t(rk4(e))});
                      });
                    });
    for (auto &p : parts)
      recs.insert(recs.end(), p.begin(), p.end());
    if (!a.cache.empty()) {
      save_scan_cache(a.cache, limit, recs);
      note(a, "scan cache: saved " + std::to_string(recs.size()) +
                  " records (horizon " + std::to_string(limit) + ")");
    }
  }
  return recs;
}

// ---- density_scan -------------------------------------------------------

void run_density(const RunArgs &a) {
  if (a.limit < 10)
    throw std::invalid_argument("density_scan: limit below 10 is degenerate");
  if (a.limit > 1000000000ull)
    throw std::invalid_argument("density_scan: limit above 1e9");
  auto recs = family_scan_records(a, a.limit);
  double reference = 1.0 - alpha(1e-13).value;
  auto cps = decade_checkpoints(a.limit);
  std::vector<std::string> lines = {"x,family,soluble,ratio,reference"};
  uint64_t fam = 0, sol = 0;
  std::size_t ci = 0;
  auto emit = [&](uint64_t x) {
    double ratio = fam ? double(sol) / double(fam) : 0.0;
    lines.push_back(std::to_string(x) + ',' + std::to_string(fam) + ',' +
                    std::to_string(sol) + ',' + fmt_g(ratio) + ',' +
                    fmt_g(reference));
  };
  for (const auto &rec : recs) {
    if (rec.d > a.limit)
      break;
    while (ci < cps.size() && cps[ci] < rec.d)
      emit(cps[ci++]);
    ++fam;
    sol += rec.pellian;
  }
  while (ci < cps.size())
    emit(cps[ci++]);
  write_csv(a, "density_scan.csv", lines);
  if (fam == 0) {
    hard_fail(a, "empty family below the limit");
    return;
  }
  double ratio = double(sol) / double(fam);
  double lo = threshold(a, "density_lo"), hi = threshold(a, "density_hi");
  note(a, "soluble ratio at " + std::to_string(a.limit) + " = " +
              fmt_g(ratio) + " (Stevenhagen reference " + fmt_g(reference) +
              ")");
  if (!(ratio >= lo && ratio <= hi))
    soft_breach(a, "ratio " + fmt_g(ratio) + " outside [" + fmt_g(lo) + ", " +
                       fmt_g(hi) + "]");
}

// ---- rank_distribution --------------------------------------------------

void run_rank(const RunArgs &a) {
  if (a.limit < 10)
    throw std::invalid_argument("rank_distribution: limit below 10");
  if (a.limit > 100000000ull)
    throw std::invalid_argument("rank_distribution: limit above 1e8");
  auto recs = family_scan_records(a, a.limit);
  std::map<int, uint64_t> counts;
  uint64_t total = 0;
  for (const auto &rec : recs) {
    if (rec.d > a.limit)
      break;
    ++counts[rec.rank4];
    ++total;
  }
  if (total == 0) {
    hard_fail(a, "empty family below the limit");
    return;
  }
  // finite-size prediction: conditioned on omega(d) = r the assignment
  // matrix is uniform symmetric with zero row sums, whose rank equals that
  // of its leading (r-1)-block, so rk4 | omega = r is modeled by
  // P_Sym(r-1, .) and the marginal is the omega-weighted mixture
  std::map<int, uint64_t> omega_counts;
  for (const auto &rec : recs) {
    if (rec.d > a.limit)
      break;
    ++omega_counts[(int)factor(rec.d).factors.size()];
  }
  int n_top = std::max(counts.rbegin()->first, 8);
  std::vector<std::string> lines = {"n,count,freq,model,mixture"};
  mpq_class tv_sum = 0, model_sum = 0, tv_mix = 0, mix_sum = 0;
  for (int n = 0; n <= n_top; ++n) {
    uint64_t cnt = counts.count(n) ? counts.at(n) : 0;
    mpq_class freq(cnt, total);
    freq.canonicalize();
    mpq_class model = p_sym_limit(n).value;
    mpq_class mixture = 0;
    for (const auto &[r, w] : omega_counts)
      if (n <= r - 1)
        mixture += mpq_class(w, total) * p_sym(r - 1, n);
    mixture.canonicalize();
    tv_sum += abs(freq - model);
    model_sum += model;
    tv_mix += abs(freq - mixture);
    mix_sum += mixture;
    lines.push_back(std::to_string(n) + ',' + std::to_string(cnt) + ',' +
                    fmt_g(freq.get_d()) + ',' + fmt_g(model.get_d()) + ',' +
                    fmt_g(mixture.get_d()));
  }
  write_csv(a, "rank_distribution.csv", lines);
  auto tv_of = [](mpq_class sum, mpq_class covered) {
    mpq_class tail = 1 - covered;
    if (tail < 0)
      tail = 0;
    return mpq_class((sum + tail) / 2).get_d();
  };
  double tv = tv_of(tv_sum, model_sum);
  double bound = threshold(a, "rank_tv");
  note(a, "4-rank total variation vs limit model = " + fmt_g(tv) + " over " +
              std::to_string(total) + " members");
  if (tv > bound)
    soft_breach(a, "total variation " + fmt_g(tv) + " above " + fmt_g(bound));
  double tvm = tv_of(tv_mix, mix_sum);
  double bound_mix = threshold(a, "rank_tv_mixture");
  note(a, "4-rank total variation vs omega mixture = " + fmt_g(tvm));
  if (tvm > bound_mix)
    soft_breach(a, "mixture total variation " + fmt_g(tvm) + " above " +
                       fmt_g(bound_mix));
}

// ---- shared pieces for the class-group sweeps ---------------------------

int64_t load_class_cache_file(const RunArgs &a) {
  if (a.cache.empty())
    return -1;
  std::ifstream is(a.cache);
  if (!is)
    return -1;
  std::size_t n = load_class_cache(is);
  note(a, "class cache: loaded " + std::to_string(n) + " records");
  return int64_t(n);
}

void save_class_cache_file(const RunArgs &a,
                           std::vector<std::pair<int64_t, std::string>> lines) {
  if (a.cache.empty())
    return;
  std::sort(lines.begin(), lines.end());
  std::string tmp = a.cache + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os)
      throw std::runtime_error("cannot open for writing: " + tmp);
    for (const auto &kv : lines)
      os << kv.second << '\n';
    if (!os.good())
      throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, a.cache);
  note(a, "class cache: saved " + std::to_string(lines.size()) + " records");
}

// ---- markov_check -------------------------------------------------------

void run_markov(const RunArgs &a) {
  if (a.limit < 10)
    throw std::invalid_argument("markov_check: limit below 10");
  if (a.limit > 4000000ull)
    throw std::invalid_argument("markov_check: limit above 4e6");
  load_class_cache_file(a);
  bool want_cache = !a.cache.empty();

  struct Block {
    std::map<std::pair<int, int>, uint64_t> trans;
    std::vector<std::pair<int64_t, std::string>> cache_lines;
  };
  uint64_t hi = a.limit + 1;
  std::size_t nblocks = std::size_t((hi - 2 + kSweepBlock - 1) / kSweepBlock);
  std::vector<Block> parts(nblocks);
  parallel_blocks(2, hi, kSweepBlock, a.threads,
                  [&](std::size_t b, uint64_t blo, uint64_t bhi) {
    Block &out = parts[b];
    for_each_family_D(blo, bhi, [&](const FamilyDElement &e) {
      int64_t delta = e.d % 4 == 1 ? int64_t(e.d) : 4 * int64_t(e.d);
      if (delta > int64_t(a.limit))
        return;
      ArtinSequence seq = artin_sequence(e, int64_t(a.limit));
      std::vector<const F2Matrix *> levels;
      for (const auto &m : seq.a_basis)
        levels.push_back(&m);
      levels.push_back(&seq.a_final);
      F2Vec R = F2Vec::ones(e.primes.size());
      for (std::size_t t = 0; t + 1 < levels.size(); ++t) {
        if (!levels[t]->row_space_contains(R) ||
            !levels[t + 1]->row_space_contains(R))
          continue;
        int n = int(levels[t]->rows()) - 1;
        int j = int(levels[t + 1]->rows()) - 1;
        ++out.trans[{n, j}];
      }
      if (want_cache)
        out.cache_lines.emplace_back(
            delta, serialize_class_data(narrow_class_group(e, int64_t(a.limit))));
    });
  });

  std::map<std::pair<int, int>, uint64_t> trans;
  std::vector<std::pair<int64_t, std::string>> cache_lines;
  for (auto &p : parts) {
    for (const auto &kv : p.trans)
      trans[kv.first] += kv.second;
    cache_lines.insert(cache_lines.end(), p.cache_lines.begin(),
                       p.cache_lines.end());
  }
  if (want_cache)
    save_class_cache_file(a, std::move(cache_lines));

  if (trans.empty()) {
    write_csv(a, "markov_check.csv", {"n,j,count,row_total,freq,model"});
    soft_breach(a, "no rank transitions observed below this limit");
    return;
  }
  int n_top = 1;
  for (const auto &kv : trans)
    n_top = std::max(n_top, kv.first.first);
  MarkovKernel kernel = markov_kernel(n_top);
  std::map<int, uint64_t> row_total;
  for (const auto &kv : trans)
    row_total[kv.first.first] += kv.second;

  std::vector<std::string> lines = {"n,j,count,row_total,freq,model"};
  uint64_t min_row = uint64_t(threshold(a, "markov_min_row"));
  double bound = threshold(a, "markov_tv");
  uint64_t observed = 0;
  for (const auto &rt : row_total) {
    int n = rt.first;
    uint64_t tot = rt.second;
    observed += tot;
    mpq_class tv_sum = 0;
    for (int j = 0; j <= n; ++j) {
      auto it = trans.find({n, j});
      uint64_t cnt = it == trans.end() ? 0 : it->second;
      mpq_class freq(cnt, tot);
      freq.canonicalize();
      mpq_class model = kernel.normalized[n][j];
      tv_sum += abs(freq - model);
      lines.push_back(std::to_string(n) + ',' + std::to_string(j) + ',' +
                      std::to_string(cnt) + ',' + std::to_string(tot) + ',' +
                      fmt_g(freq.get_d()) + ',' + fmt_g(model.get_d()));
    }
    double tv = mpq_class(tv_sum / 2).get_d();
    if (tot >= min_row) {
      note(a, "row n=" + std::to_string(n) + ": " + std::to_string(tot) +
                  " transitions, total variation " + fmt_g(tv));
      if (tv > bound)
        soft_breach(a, "row n=" + std::to_string(n) + " total variation " +
                           fmt_g(tv) + " above " + fmt_g(bound));
    } else {
      note(a, "row n=" + std::to_string(n) + ": only " + std::to_string(tot) +
                  " transitions, below the " + std::to_string(min_row) +
                  " threshold, not scored");
    }
  }
  write_csv(a, "markov_check.csv", lines);
  note(a, "observed " + std::to_string(observed) +
              " surviving rank transitions");
}

// ---- oracle_crosscheck ----------------------------------------------------

void run_crosscheck(const RunArgs &a) {
  if (a.limit < 10)
    throw std::invalid_argument("oracle_crosscheck: limit below 10");
  if (a.limit > 4000000ull)
    throw std::invalid_argument("oracle_crosscheck: limit above 4e6");
  load_class_cache_file(a);
  bool want_cache = !a.cache.empty();

  struct Row {
    int64_t delta = 0;
    uint8_t soluble = 0;
    uint8_t agree = 0;
  };
  struct Block {
    std::vector<Row> rows;
    std::vector<std::string> bad;
    std::vector<std::pair<int64_t, std::string>> cache_lines;
  };
  uint64_t hi = a.limit + 1;
  std::size_t nblocks = std::size_t((hi - 2 + kSweepBlock - 1) / kSweepBlock);
  std::vector<Block> parts(nblocks);
  parallel_blocks(2, hi, kSweepBlock, a.threads,
                  [&](std::size_t b, uint64_t blo, uint64_t bhi) {
    Block &out = parts[b];
    for_each_family_D(blo, bhi, [&](const FamilyDElement &e) {
      int64_t delta = e.d % 4 == 1 ? int64_t(e.d) : 4 * int64_t(e.d);
      if (delta > int64_t(a.limit))
        return;
      ArtinSequence seq = artin_sequence(e, int64_t(a.limit));
      NarrowClassData data = narrow_class_group(e, int64_t(a.limit));
      bool cf = neg_pell_soluble(e.d);
      std::string why;
      if (data.r_class_trivial() != cf)
        why += " r-class";
      if (seq.pellian != cf)
        why += " artin";
      if (rk4(e) != data.rk4())
        why += " rk4";
      uint64_t syl = 1;
      for (int ex : data.exponents)
        syl <<= ex;
      if ((ordinary_sylow_order(data) == syl) != cf)
        why += " tau";
      out.rows.push_back({delta, uint8_t(cf), uint8_t(why.empty())});
      if (!why.empty())
        out.bad.push_back("d=" + std::to_string(e.d) + " disagrees on:" + why);
      if (want_cache)
        out.cache_lines.emplace_back(delta, serialize_class_data(data));
    });
  });

  std::vector<Row> rows;
  std::vector<std::string> bad;
  std::vector<std::pair<int64_t, std::string>> cache_lines;
  for (auto &p : parts) {
    rows.insert(rows.end(), p.rows.begin(), p.rows.end());
    bad.insert(bad.end(), p.bad.begin(), p.bad.end());
    cache_lines.insert(cache_lines.end(), p.cache_lines.begin(),
                       p.cache_lines.end());
  }
  if (want_cache)
    save_class_cache_file(a, std::move(cache_lines));

  std::sort(rows.begin(), rows.end(),
            [](const Row &x, const Row &y) { return x.delta < y.delta; });
  auto cps = decade_checkpoints(a.limit);
  std::vector<std::string> lines = {"delta,family,soluble,agreements"};
  uint64_t fam = 0, sol = 0, agr = 0;
  std::size_t ci = 0;
  auto emit = [&](uint64_t x) {
    lines.push_back(std::to_string(x) + ',' + std::to_string(fam) + ',' +
                    std::to_string(sol) + ',' + std::to_string(agr));
  };
  for (const auto &row : rows) {
    while (ci < cps.size() && int64_t(cps[ci]) < row.delta)
      emit(cps[ci++]);
    ++fam;
    sol += row.soluble;
    agr += row.agree;
  }
  while (ci < cps.size())
    emit(cps[ci++]);
  write_csv(a, "oracle_crosscheck.csv", lines);
  note(a, std::to_string(fam) + " discriminants checked, " +
              std::to_string(agr) + " full agreements");
  if (!bad.empty()) {
    a.res->hard_failures += int(bad.size());
    note(a, "HARD: first mismatch: " + bad.front());
  }
}

// ---- redei_fuzz -----------------------------------------------------------

void run_redei(const RunArgs &a) {
  if (a.limit < 10)
    throw std::invalid_argument("redei_fuzz: limit below 10");
  if (a.limit > 1000000ull)
    throw std::invalid_argument("redei_fuzz: limit above 1e6");
  std::vector<std::string> lines = {"kind,a,b,c,symbol,symbol_aux,art2,agree"};

  // reciprocity [a,b,c] = [c,b,a] over a corpus of small admissible triples
  std::vector<uint64_t> pool;
  for (const auto &e : sieve_family_D(500))
    if (e.d % 2 == 1 && e.d > 1)
      pool.push_back(e.d);
  uint64_t checked = 0, recip_bad = 0;
  bool done = false;
  for (std::size_t i = 0; i < pool.size() && !done; ++i)
    for (std::size_t j = i + 1; j < pool.size() && !done; ++j) {
      if (std::gcd(pool[i], pool[j]) != 1)
        continue;
      for (std::size_t k = j + 1; k < pool.size() && !done; ++k) {
        if (std::gcd(pool[i], pool[k]) != 1 ||
            std::gcd(pool[j], pool[k]) != 1)
          continue;
        RedeiTriple t{pool[i], pool[j], pool[k]};
        if (!redei_admissible(t))
          continue;
        int s1 = 0, s2 = 0;
        try {
          s1 = redei_symbol(t);
          s2 = redei_symbol({t.c, t.b, t.a});
        } catch (const std::exception &ex) {
          hard_fail(a, "symbol evaluation threw at [" + std::to_string(t.a) +
                           "," + std::to_string(t.b) + "," +
                           std::to_string(t.c) + "]: " + ex.what());
          ++checked;
          continue;
        }
        bool agree = s1 == s2;
        lines.push_back("reciprocity," + std::to_string(t.a) + ',' +
                        std::to_string(t.b) + ',' + std::to_string(t.c) + ',' +
                        std::to_string(s1) + ',' + std::to_string(s2) + ",-," +
                        (agree ? "1" : "0"));
        ++checked;
        if (!agree) {
          ++recip_bad;
          if (recip_bad == 1)
            hard_fail(a, "reciprocity broken at [" + std::to_string(t.a) +
                             "," + std::to_string(t.b) + "," +
                             std::to_string(t.c) + "]");
          else
            ++a.res->hard_failures;
        }
        if (checked >= 600)
          done = true;
      }
    }
  note(a, "reciprocity: " + std::to_string(checked) + " admissible triples, " +
              std::to_string(recip_bad) + " mismatches");
  if (checked < 500)
    hard_fail(a, "corpus too small: " + std::to_string(checked) +
                     " admissible triples below 500");

  // symbol vs level-2 class group pairing on admissible splittings d = abc:
  // <Up(c), chi_a> on Cl+(d) equals [a, b, c] + [a, c, c], the second term
  // being the diagonal symbol that absorbs the ramified normalization
  uint64_t cons_checked = 0, cons_bad = 0;
  for_each_family_D(2, a.limit + 1, [&](const FamilyDElement &e) {
    if (e.d % 2 == 0 || e.primes.size() < 2)
      return;
    std::size_t r = e.primes.size();
    auto check_split = [&](const RedeiTriple &t, const F2Vec &class_side,
                           const F2Vec &char_side) {
      if (!redei_admissible(t))
        return;
      int sym = 0, diag = 0, art = 0;
      try {
        sym = redei_symbol(t);
        diag = redei_symbol_diagonal(t.a, t.c);
        art = artin_pairing(e, class_side, char_side, 2, int64_t(a.limit));
      } catch (const std::exception &ex) {
        hard_fail(a, "consistency check threw at [" + std::to_string(t.a) +
                         "," + std::to_string(t.b) + "," +
                         std::to_string(t.c) + "]: " + ex.what());
        ++cons_checked;
        return;
      }
      bool agree = (sym ^ diag) == art;
      lines.push_back("consistency," + std::to_string(t.a) + ',' +
                      std::to_string(t.b) + ',' + std::to_string(t.c) + ',' +
                      std::to_string(sym) + ',' + std::to_string(diag) + ',' +
                      std::to_string(art) + ',' + (agree ? "1" : "0"));
      ++cons_checked;
      if (!agree) {
        ++cons_bad;
        if (cons_bad == 1)
          hard_fail(a, "symbol vs pairing mismatch at [" +
                           std::to_string(t.a) + "," + std::to_string(t.b) +
                           "," + std::to_string(t.c) + "]");
        else
          ++a.res->hard_failures;
      }
    };
    // assignments of primes to parts, canonical by first appearance so each
    // unordered partition shows up once; two-part splittings take 1 as the
    // middle member, three-part splittings rotate each part through it
    std::vector<int> asg(r, 0);
    std::function<void(std::size_t, int)> walk = [&](std::size_t idx,
                                                     int used) {
      if (idx == r) {
        uint64_t part[3] = {1, 1, 1};
        for (std::size_t y = 0; y < r; ++y)
          part[asg[y]] *= e.primes[y];
        auto indicator = [&](int which) {
          F2Vec u(r);
          for (std::size_t y = 0; y < r; ++y)
            if (asg[y] == which)
              u.set(y, 1);
          return u;
        };
        if (used == 2) {
          check_split({part[0], 1, part[1]}, indicator(1), indicator(0));
          check_split({part[1], 1, part[0]}, indicator(0), indicator(1));
        } else if (used == 3) {
          for (int mid = 0; mid < 3; ++mid) {
            int lo = mid == 0 ? 1 : 0;
            int hi2 = mid == 2 ? 1 : 2;
            check_split({part[lo], part[mid], part[hi2]}, indicator(hi2),
                        indicator(lo));
            check_split({part[hi2], part[mid], part[lo]}, indicator(lo),
                        indicator(hi2));
          }
        }
        return;
      }
      for (int p = 0; p <= std::min(used, 2); ++p) {
        asg[idx] = p;
        walk(idx + 1, std::max(used, p + 1));
      }
    };
    walk(0, 0);
  });
  note(a, "consistency: " + std::to_string(cons_checked) +
              " admissible splittings, " + std::to_string(cons_bad) +
              " mismatches");
  write_csv(a, "redei_fuzz.csv", lines);
}

// ---- combi_suite ----------------------------------------------------------

void run_combi(const RunArgs &a) {
  if (a.limit < 1)
    throw std::invalid_argument("combi_suite: limit below 1");
  if (a.limit > 1000000ull)
    throw std::invalid_argument("combi_suite: limit above 1e6");
  std::vector<std::string> lines = {"section,instances,failures"};
  std::mt19937_64 rng(a.seed);
  auto draw = [&](uint64_t n) { return uint64_t(rng() % n); };

  auto make_sets = [](const std::vector<int> &sizes) {
    std::vector<std::vector<int>> sets;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      std::vector<int> s;
      for (int v = 0; v < sizes[i]; ++v)
        s.push_back(int(i) * 10 + v);
      sets.push_back(s);
    }
    return sets;
  };

  // dimension formula vs elimination, exhaustively on small spaces
  uint64_t dim_inst = 0, dim_fail = 0;
  for (int r = 1; r <= 3; ++r) {
    std::vector<int> sizes(r, 1);
    for (;;) {
      for (uint32_t smask = 0; smask < (uint32_t(1) << r); ++smask) {
        ++dim_inst;
        try {
          add_dim(product_space(make_sets(sizes), smask));
        } catch (const std::logic_error &ex) {
          ++dim_fail;
          if (dim_fail == 1)
            hard_fail(a, std::string("dimension mismatch: ") + ex.what());
          else
            ++a.res->hard_failures;
        }
      }
      int i = r - 1;
      while (i >= 0 && sizes[i] == 4)
        sizes[i--] = 1;
      if (i < 0)
        break;
      ++sizes[i];
    }
  }
  lines.push_back("add_dim," + std::to_string(dim_inst) + ',' +
                  std::to_string(dim_fail));

  // seeded random systems: validity and the acceptance-density bound
  uint64_t sys_fail = 0, dens_zero = 0;
  for (uint64_t t = 0; t < a.limit; ++t) {
    int r = 1 + int(draw(3));
    std::vector<int> sizes;
    for (int i = 0; i < r; ++i)
      sizes.push_back(1 + int(draw(4)));
    uint32_t smask = uint32_t(draw(uint64_t(1) << r));
    ProductSpace sp = product_space(make_sets(sizes), smask);
    AdditiveSystem sys = random_additive_system(sp, 2, rng());
    ValidationReport rep = validate_additive_system(sys);
    if (!rep.valid) {
      ++sys_fail;
      if (sys_fail == 1)
        hard_fail(a, "generated system invalid: " + rep.witness);
      else
        ++a.res->hard_failures;
      continue;
    }
    DensityReport dens = acceptance_density_check(sys);
    if (dens.delta == 0.0)
      ++dens_zero;
    if (!dens.pass) {
      ++sys_fail;
      if (sys_fail == 1)
        hard_fail(a, "density bound failed: lhs " + fmt_g(dens.lhs) +
                         " rhs " + fmt_g(dens.rhs));
      else
        ++a.res->hard_failures;
    }
  }
  lines.push_back("additive_systems," + std::to_string(a.limit) + ',' +
                  std::to_string(sys_fail));
  note(a, "density bound vacuous (delta = 0) on " + std::to_string(dens_zero) +
              " of " + std::to_string(a.limit) + " systems");

  // box finding: planted boxes, empty Y, full Y
  uint64_t box_inst = 0, box_fail = 0;
  auto box_bad = [&](const std::string &what) {
    ++box_fail;
    if (box_fail == 1)
      hard_fail(a, "find_box: " + what);
    else
      ++a.res->hard_failures;
  };
  for (int t = 0; t < 200; ++t) {
    ++box_inst;
    int r = 1 + int(draw(2));
    std::vector<int> sizes;
    for (int i = 0; i < r; ++i)
      sizes.push_back(2 + int(draw(3)));
    auto sets = make_sets(sizes);
    ProductSpace sp = product_space(sets, 0);
    int b = 1 + int(draw(2));
    for (int i = 0; i < r; ++i)
      b = std::min(b, sizes[i]);
    // plant a box, then add random extra points
    std::vector<std::vector<int>> chosen(r);
    for (int i = 0; i < r; ++i) {
      std::vector<int> labels = sets[i];
      for (std::size_t s = labels.size(); s > 1; --s)
        std::swap(labels[s - 1], labels[draw(s)]);
      chosen[i].assign(labels.begin(), labels.begin() + b);
    }
    std::set<std::vector<int>> y;
    std::vector<int> pt(r);
    std::function<void(int)> fill = [&](int i) {
      if (i == r) {
        y.insert(pt);
        return;
      }
      for (int lab : chosen[i]) {
        pt[i] = lab;
        fill(i + 1);
      }
    };
    fill(0);
    for (int extra = 0; extra < 3; ++extra) {
      for (int i = 0; i < r; ++i)
        pt[i] = sets[i][draw(sets[i].size())];
      y.insert(pt);
    }
    std::vector<std::vector<int>> ylist(y.begin(), y.end());
    auto found = find_box(sp, ylist, b);
    if (!found) {
      box_bad("missed a planted box");
      continue;
    }
    // verify the returned box really sits inside Y
    bool ok = int(found->size()) == r;
    for (int i = 0; ok && i < r; ++i)
      ok = int((*found)[i].size()) == b;
    if (ok) {
      std::function<bool(int)> check = [&](int i) -> bool {
        if (i == r)
          return y.count(pt) != 0;
        for (int lab : (*found)[i]) {
          pt[i] = lab;
          if (!check(i + 1))
            return false;
        }
        return true;
      };
      ok = check(0);
    }
    if (!ok)
      box_bad("returned a box outside Y");
  }
  {
    ++box_inst;
    ProductSpace sp = product_space(make_sets({2, 2}), 0);
    if (find_box(sp, {}, 1))
      box_bad("found a box in an empty Y");
    ++box_inst;
    auto sets = make_sets({3, 3});
    std::vector<std::vector<int>> all;
    for (int u : sets[0])
      for (int v : sets[1])
        all.push_back({u, v});
    auto found = find_box(product_space(sets, 0), all, 2);
    std::vector<std::vector<int>> expect = {{0, 1}, {10, 11}};
    if (!found || *found != expect)
      box_bad("full Y did not give the lexicographically first box");
  }
  lines.push_back("find_box," + std::to_string(box_inst) + ',' +
                  std::to_string(box_fail));

  // second-moment inequality across the admissible parameter grid
  uint64_t mom_inst = 0, mom_fail = 0;
  auto mom_bad = [&](const std::string &what) {
    ++mom_fail;
    if (mom_fail == 1)
      hard_fail(a, "second moment: " + what);
    else
      ++a.res->hard_failures;
  };
  struct Params {
    int k0, pc, k1, k2;
  };
  std::vector<Params> grid = {{0, 0, 0, 1}, {0, 0, 0, 4}, {0, 0, 1, 3},
                              {0, 0, 1, 4}, {0, 0, 1, 5}, {0, 0, 1, 6},
                              {1, 0, 1, 5}, {1, 0, 1, 6}, {0, 1, 1, 5},
                              {0, 1, 1, 6}, {1, 0, 1, 7}};
  for (const auto &g : grid) {
    int draws = g.k2 >= 6 ? 1 : 3;
    for (int t = 0; t < draws; ++t) {
      ++mom_inst;
      SecondMomentParams p;
      p.r = 7;
      p.k0 = g.k0;
      p.k1 = g.k1;
      p.k2 = g.k2;
      p.p_count = g.pc;
      std::vector<std::vector<int>> bp(g.k1, std::vector<int>(g.k1, 0));
      for (int i = 0; i < g.k1; ++i)
        for (int j = i + 1; j < g.k1; ++j)
          bp[i][j] = bp[j][i] = int(draw(2));
      std::vector<std::vector<int>> ba(g.k1, std::vector<int>(g.pc, 0));
      for (int i = 0; i < g.k1; ++i)
        for (int q = 0; q < g.pc; ++q)
          ba[i][q] = int(draw(2));
      SecondMomentReport rep = permutation_second_moment(p, bp, ba);
      if (!rep.pass)
        mom_bad("bound failed at k0=" + std::to_string(g.k0) + " |P|=" +
                std::to_string(g.pc) + " k1=" + std::to_string(g.k1) +
                " k2=" + std::to_string(g.k2) + ": lhs " + fmt_g(rep.lhs) +
                " rhs " + fmt_g(rep.rhs));
    }
  }
  {
    ++mom_inst;
    SecondMomentParams p;
    p.r = 7;
    p.k0 = 0;
    p.k1 = 2;
    p.k2 = 7;
    p.p_count = 0;
    std::vector<std::vector<int>> bp(2, std::vector<int>(2, 0));
    bool threw = false;
    try {
      permutation_second_moment(p, bp, {});
    } catch (const std::invalid_argument &) {
      threw = true;
    }
    if (!threw)
      mom_bad("precondition violation was not rejected");
  }
  lines.push_back("second_moment," + std::to_string(mom_inst) + ',' +
                  std::to_string(mom_fail));

  // linearity of the Sigma map
  uint64_t sig_inst = 0, sig_fail = 0;
  for (int t = 0; t < 50; ++t) {
    ++sig_inst;
    int r = 1 + int(draw(2));
    std::vector<int> sizes;
    for (int i = 0; i < r; ++i)
      sizes.push_back(1 + int(draw(3)));
    uint32_t smask = uint32_t(draw(uint64_t(1) << r));
    ProductSpace sp = product_space(make_sets(sizes), smask);
    std::map<std::vector<int>, int> f, g, fg;
    std::vector<int> pt(r);
    std::function<void(int)> fill = [&](int i) {
      if (i == r) {
        int fv = int(draw(2)), gv = int(draw(2));
        f[pt] = fv;
        g[pt] = gv;
        fg[pt] = fv ^ gv;
        return;
      }
      for (int lab : sp.sets[i]) {
        pt[i] = lab;
        fill(i + 1);
      }
    };
    fill(0);
    auto sf = sigma(sp, f), sg = sigma(sp, g), sfg = sigma(sp, fg);
    bool ok = sf.size() == sg.size() && sf.size() == sfg.size();
    for (std::size_t i = 0; ok && i < sf.size(); ++i)
      ok = (sf[i] ^ sg[i]) == sfg[i];
    if (!ok) {
      ++sig_fail;
      if (sig_fail == 1)
        hard_fail(a, "Sigma is not linear on a random instance");
      else
        ++a.res->hard_failures;
    }
  }
  lines.push_back("sigma_linear," + std::to_string(sig_inst) + ',' +
                  std::to_string(sig_fail));

  write_csv(a, "combi_suite.csv", lines);
}

// ---- equidist_scan --------------------------------------------------------

std::string prebox_sizes(const Prebox &box) {
  std::string s;
  for (std::size_t i = 0; i < box.x.size(); ++i) {
    if (i)
      s += 'x';
    s += std::to_string(box.x[i].size());
  }
  return s;
}

void run_equidist(const RunArgs &a) {
  if (a.limit < 1)
    throw std::invalid_argument("equidist_scan: limit below 1");
  if (a.limit > 100000ull)
    throw std::invalid_argument("equidist_scan: limit above 1e5");
  std::vector<std::string> lines = {"r,sizes,constraints,count,expected,deviation"};

  // partition identity on a small prebox with one pair and two aux entries
  Prebox small = build_prebox({{10, 60}, {60, 90}}, {5});
  uint64_t total = 1;
  for (const auto &xi : small.x)
    total *= xi.size();
  uint64_t part_sum = 0;
  for (int mask = 0; mask < 8; ++mask) {
    SymbolConstraint sc;
    sc.pairs.push_back({0, 1, mask & 1});
    sc.aux.push_back({0, 0, (mask >> 1) & 1});
    sc.aux.push_back({1, 0, (mask >> 2) & 1});
    CountResult cr = count_X_a(small, sc);
    part_sum += cr.count;
    lines.push_back("2," + prebox_sizes(small) + ",pair(0:1)=" +
                    std::to_string(mask & 1) + "|aux(0:5)=" +
                    std::to_string((mask >> 1) & 1) + "|aux(1:5)=" +
                    std::to_string((mask >> 2) & 1) + ',' +
                    std::to_string(cr.count) + ',' + fmt_g(cr.expected) + ',' +
                    fmt_g(cr.deviation));
  }
  if (part_sum != total)
    hard_fail(a, "partition identity broken: classes sum to " +
                     std::to_string(part_sum) + " of " +
                     std::to_string(total));
  else
    note(a, "partition identity holds: 8 classes sum to " +
                std::to_string(total));

  // one pair constraint on a production-size prebox; the aux primes make
  // the randomized scan draw from 7 constraints instead of one
  Prebox big = build_prebox({{100000, 126000}, {126000, 152000}}, {2, 5, 13});
  {
    SymbolConstraint sc;
    sc.pairs.push_back({0, 1, 0});
    CountResult cr = count_X_a(big, sc);
    lines.push_back("2," + prebox_sizes(big) + ",pair(0:1)=0," +
                    std::to_string(cr.count) + ',' + fmt_g(cr.expected) + ',' +
                    fmt_g(cr.deviation));
    double bound = threshold(a, "equidist_single");
    note(a, "single-constraint deviation = " + fmt_g(cr.deviation) + " on " +
                std::to_string(cr.total) + " tuples");
    if (cr.deviation >= bound)
      soft_breach(a, "single-constraint deviation " + fmt_g(cr.deviation) +
                         " at or above " + fmt_g(bound));
  }

  // randomized full-constraint scan on the same prebox
  {
    ScanResult sr = scan_deviation(big, int(a.limit), a.seed);
    lines.push_back("2," + prebox_sizes(big) + ",scan_mean," +
                    std::to_string(sr.trials) + ",0," +
                    fmt_g(sr.mean_deviation));
    lines.push_back("2," + prebox_sizes(big) + ",scan_max," +
                    std::to_string(sr.trials) + ",0," +
                    fmt_g(sr.max_deviation));
    double bound = threshold(a, "equidist_scan_max");
    note(a, "random-target scan over " + std::to_string(sr.trials) +
                " trials: mean deviation " + fmt_g(sr.mean_deviation) +
                ", max " + fmt_g(sr.max_deviation));
    if (sr.max_deviation >= bound)
      soft_breach(a, "scan max deviation " + fmt_g(sr.max_deviation) +
                         " at or above " + fmt_g(bound));
  }
  write_csv(a, "equidist_scan.csv", lines);
}

// ---- registry -------------------------------------------------------------

struct ExperimentSpec {
  uint64_t def_limit = 0;
  std::map<std::string, double> thresholds;
  void (*fn)(const RunArgs &) = nullptr;
};

const std::map<std::string, ExperimentSpec> &registry() {
  static const std::map<std::string, ExperimentSpec> reg = {
      {"density_scan",
       {10000000ull,
        {{"density_lo", 0.50}, {"density_hi", 0.70}},
        run_density}},
      {"rank_distribution",
       {1000000ull, {{"rank_tv", 0.05}, {"rank_tv_mixture", 0.05}}, run_rank}},
      {"markov_check",
       {400000ull,
        {{"markov_tv", 0.10}, {"markov_min_row", 30.0}},
        run_markov}},
      {"oracle_crosscheck", {400000ull, {}, run_crosscheck}},
      {"redei_fuzz", {100000ull, {}, run_redei}},
      {"combi_suite", {10000ull, {}, run_combi}},
      {"equidist_scan",
       {100ull,
        {{"equidist_single", 0.10}, {"equidist_scan_max", 0.05}},
        run_equidist}},
  };
  return reg;
}

} // namespace

const std::vector<std::string> &experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto &kv : registry())
      v.push_back(kv.first);
    return v;
  }();
  return names;
}

uint64_t default_limit(const std::string &name) {
  auto it = registry().find(name);
  if (it == registry().end())
    throw std::invalid_argument("unknown experiment: " + name);
  return it->second.def_limit;
}

std::map<std::string, double> default_thresholds(const std::string &name) {
  auto it = registry().find(name);
  if (it == registry().end())
    throw std::invalid_argument("unknown experiment: " + name);
  return it->second.thresholds;
}

ExperimentResult run_experiment(const ExperimentConfig &config) {
  auto it = registry().find(config.name);
  if (it == registry().end())
    throw std::invalid_argument("unknown experiment: " + config.name);
  if (config.threads < 1 || config.threads > 256)
    throw std::invalid_argument("threads must be in [1, 256]");

  std::map<std::string, double> thr = it->second.thresholds;
  for (const auto &kv : config.thresholds) {
    if (!thr.count(kv.first))
      throw std::invalid_argument("unknown threshold key: " + kv.first);
    if (!(kv.second > 0))
      throw std::invalid_argument("threshold must be positive: " + kv.first);
    thr[kv.first] = kv.second;
  }

  ExperimentResult res;
  res.name = config.name;
  res.limit = config.limit ? config.limit : it->second.def_limit;

  std::string cache = config.cache_path;
  if (cache.empty()) {
    const char *env = std::getenv("NEGPELL_CACHE");
    if (env && *env)
      cache = env;
  }
  std::filesystem::create_directories(config.out_dir);

  RunArgs args;
  args.limit = res.limit;
  args.seed = config.seed;
  args.out_dir = config.out_dir;
  args.cache = cache;
  args.threads = config.threads;
  args.thresholds = &thr;
  args.res = &res;

  auto t0 = std::chrono::steady_clock::now();
  it->second.fn(args);
  res.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();

  nlohmann::json manifest;
  manifest["experiment"] = res.name;
  manifest["limit"] = res.limit;
  manifest["seed"] = config.seed;
  manifest["threads"] = config.threads;
  manifest["thresholds"] = thr;
  manifest["cache"] = cache;
  manifest["outputs"] = res.outputs;
  manifest["hard_failures"] = res.hard_failures;
  manifest["soft_breaches"] = res.soft_breaches;
  manifest["notes"] = res.notes;
  manifest["version"] = "0.1.0";
  // volatile by nature; excluded when comparing manifests for determinism
  manifest["wall_time_ms"] = res.wall_time_ms;
  std::string mf = config.name + "_manifest.json";
  write_text_file(config.out_dir + "/" + mf, {manifest.dump(2)});
  res.outputs.push_back(mf);
  return res;
}

} // namespace negpell
