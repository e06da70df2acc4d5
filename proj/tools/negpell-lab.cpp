#include "negpell/experiments.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

std::map<std::string, double> read_threshold_file(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open threshold file: " + path);
  nlohmann::json j = nlohmann::json::parse(is);
  if (!j.is_object())
    throw std::runtime_error("threshold file must hold a JSON object");
  std::map<std::string, double> out;
  for (const auto &kv : j.items()) {
    if (!kv.value().is_number())
      throw std::runtime_error("threshold " + kv.key() + " is not a number");
    out[kv.key()] = kv.value().get<double>();
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"negative-Pell laboratory: class-group, model and "
               "equidistribution experiments"};

  negpell::ExperimentConfig cfg;
  std::string threshold_file;

  app.add_option("experiment", cfg.name, "experiment to run")
      ->required()
      ->check(CLI::IsMember(negpell::experiment_names()));
  app.add_option("--limit", cfg.limit,
                 "experiment-specific bound or count (0 = default)");
  app.add_option("--seed", cfg.seed, "random seed (default 1)");
  app.add_option("--out", cfg.out_dir, "output directory (default out)");
  app.add_option("--cache", cfg.cache_path,
                 "cache file (default: NEGPELL_CACHE env var, else none)");
  app.add_option("--threads", cfg.threads, "worker threads (default 1)");
  app.add_option("--threshold-file", threshold_file,
                 "JSON object overriding soft-check thresholds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!threshold_file.empty())
      cfg.thresholds = read_threshold_file(threshold_file);
    negpell::ExperimentResult res = negpell::run_experiment(cfg);
    std::cout << "experiment: " << res.name << "\nlimit: " << res.limit
              << "\nseed: " << cfg.seed << "\nthreads: " << cfg.threads
              << '\n';
    for (const auto &n : res.notes)
      std::cout << "note: " << n << '\n';
    for (const auto &o : res.outputs)
      std::cout << "output: " << cfg.out_dir << '/' << o << '\n';
    std::cout << "hard failures: " << res.hard_failures
              << "\nsoft breaches: " << res.soft_breaches << '\n';
    int code = res.exit_code();
    std::cout << "result: "
              << (code == 0 ? "PASS" : code == 1 ? "FAIL" : "SOFT-BREACH")
              << " (exit " << code << ")\n";
    std::cout << "wall time: " << res.wall_time_ms << " ms\n";
    return code;
  } catch (const std::exception &ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}
