#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "erase/qkmeans.hpp"
#include "erase/stats.hpp"
#include "erase/synthetic.hpp"

namespace erase {

// Deletion-scaling experiment: for each dataset size, `trials` independent
// Gaussian-mixture datasets are trained with quantized k-means and hit with
// a uniform stream of deletions.
struct BenchConfig {
  std::vector<std::size_t> sizes = {1024, 2048, 4096, 8192, 16384};
  std::size_t trials = 64;
  // Deletions per trial: max(deletions_per_trial, ceil(deletion_fraction * size)),
  // capped at size - k.
  std::size_t deletions_per_trial = 16;
  double deletion_fraction = 0.0625;
  QkmConfig qkm{.k = 4, .epsilon = 0.05, .iters = 10};
  MixtureSpec mixture{.size = 0, .dim = 16, .components = 4, .spread = 0.02, .center_range = 1.0};
  Seed seed = 1;
};

struct BenchRow {
  std::size_t size = 0;
  std::size_t trials = 0;
  std::size_t deletions = 0;
  std::size_t retrains = 0;
  std::size_t seed_hits = 0;
  std::size_t centroid_shifts = 0;
  double retrain_fraction = 0.0;
  double certificate_evals_mean = 0.0;
  std::uint64_t certificate_evals_max = 0;
  std::uint64_t stable_evals_max = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  // log(retrain_fraction) against log(size); empty rows are skipped.
  LinearFit loglog;
  bool fit_valid = false;
};

BenchResult run_bench(const BenchConfig& config);
std::string to_csv(const BenchResult& result);
nlohmann::json to_json(const BenchResult& result);

}  // namespace erase
