#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "erase/corpus.hpp"
#include "erase/qkmeans.hpp"
#include "erase/rng.hpp"

namespace erase {

// Plain k-means with k-means++ (D^2) seeding and a fixed number of Lloyd
// iterations. No quantization, no smoothing; an empty cluster keeps its
// previous centroid.
struct KmeansppModel {
  std::size_t k = 0;
  std::size_t iters = 0;
  Seed root_seed = 0;
  std::vector<ExampleId> seed_ids;
  std::vector<std::vector<double>> centroids;
  std::map<ExampleId, std::uint32_t> assignment;
  std::vector<std::vector<Member>> sorted_members;
  std::vector<std::vector<Member>> fallback;
  std::vector<ExampleId> live_ids;
  std::uint64_t op_counter = 0;

  bool operator==(const KmeansppModel&) const = default;
};

KmeansppModel train_kmeanspp(const PointSet& points, std::size_t k, std::size_t iters, Seed root_seed,
                             std::size_t threads = 1);

std::vector<ExampleId> exemplars(const KmeansppModel& model);

}  // namespace erase
