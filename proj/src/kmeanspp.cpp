#include "erase/kmeanspp.hpp"

#include <algorithm>
#include <string>

#include "cluster_util.hpp"
#include "erase/errors.hpp"

namespace erase {

KmeansppModel train_kmeanspp(const PointSet& points, std::size_t k, std::size_t iters, Seed root_seed,
                             std::size_t threads) {
  const std::size_t n = points.size();
  const std::size_t d = points.dim;
  if (k == 0) throw Error(ErrorCode::InvalidK, "k must be >= 1");
  if (k > n) {
    throw Error(ErrorCode::TooFewExamples, "k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " examples");
  }
  if (iters == 0) throw Error(ErrorCode::InvalidArgument, "iters must be >= 1");

  KmeansppModel model;
  model.k = k;
  model.iters = iters;
  model.root_seed = root_seed;
  model.live_ids = points.ids;

  Rng rng(derive_seed(root_seed, labels::kSeeds));
  std::vector<std::size_t> chosen;
  std::vector<bool> is_chosen(n, false);
  std::vector<double> d2(n, 0.0);
  chosen.push_back(rng.uniform_below(n));
  is_chosen[chosen.back()] = true;
  while (chosen.size() < k) {
    const std::vector<double> c(points.row(chosen.back()).begin(), points.row(chosen.back()).end());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = detail::squared_distance(points.row(i), c);
      d2[i] = chosen.size() == 1 ? dist : std::min(d2[i], dist);
      total += d2[i];
    }
    model.op_counter += n;
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double run = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        run += d2[i];
        if (run > r && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        // r landed in the rounding slack at the top; take the last positive weight.
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a chosen center: uniform over the rest.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (!is_chosen[i]) rest.push_back(i);
      }
      pick = rest[rng.uniform_below(rest.size())];
    }
    chosen.push_back(pick);
    is_chosen[pick] = true;
  }

  std::vector<std::vector<double>> centroids;
  for (std::size_t i : chosen) {
    model.seed_ids.push_back(points.ids[i]);
    centroids.emplace_back(points.row(i).begin(), points.row(i).end());
  }

  std::vector<std::uint32_t> cluster;
  std::vector<double> dist2;
  for (std::size_t t = 0; t < iters; ++t) {
    detail::assign_all(points, centroids, threads, cluster, dist2);
    model.op_counter += n * k;
    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<std::uint64_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = points.row(i);
      for (std::size_t c = 0; c < d; ++c) sums[cluster[i]][c] += row[c];
      ++counts[cluster[i]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (std::size_t c = 0; c < d; ++c) centroids[j][c] = sums[j][c] / static_cast<double>(counts[j]);
    }
  }
  model.centroids = centroids;

  detail::assign_all(points, centroids, threads, cluster, dist2);
  model.op_counter += n * k;
  for (std::size_t i = 0; i < n; ++i) model.assignment.emplace(points.ids[i], cluster[i]);
  model.op_counter +=
      detail::build_member_lists(points, centroids, cluster, dist2, model.sorted_members, model.fallback);
  return model;
}

std::vector<ExampleId> exemplars(const KmeansppModel& model) {
  return detail::pick_exemplars(model.sorted_members, model.fallback);
}

}  // namespace erase
