#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace negpell {

// One harness run. `limit` is experiment-specific (discriminant bound,
// instance count, trial count); 0 picks the experiment's default. All
// randomness derives from `seed`, so a (name, limit, seed, thresholds)
// quadruple pins every output byte except the manifest's wall_time_ms.
struct ExperimentConfig {
  std::string name;
  uint64_t limit = 0;
  uint64_t seed = 1;
  std::string out_dir = "out";
  std::string cache_path; // empty: NEGPELL_CACHE env var, else no cache
  int threads = 1;
  std::map<std::string, double> thresholds; // overrides on the defaults
};

struct ExperimentResult {
  std::string name;
  uint64_t limit = 0;
  int hard_failures = 0; // invariant violations: exit 1
  int soft_breaches = 0; // statistical thresholds missed: exit 2
  std::vector<std::string> notes;
  std::vector<std::string> outputs; // files written, relative to out_dir
  long long wall_time_ms = 0;

  int exit_code() const {
    return hard_failures > 0 ? 1 : (soft_breaches > 0 ? 2 : 0);
  }
};

const std::vector<std::string> &experiment_names();
uint64_t default_limit(const std::string &name);
std::map<std::string, double> default_thresholds(const std::string &name);

// Runs the named experiment and writes its CSV tables plus a JSON manifest
// into config.out_dir. Throws std::invalid_argument for unknown names,
// out-of-range limits or unknown threshold keys.
ExperimentResult run_experiment(const ExperimentConfig &config);

} // namespace negpell
