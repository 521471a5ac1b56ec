#include "cluster_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "erase/errors.hpp"

namespace erase::detail {

double squared_distance(std::span<const float> x, std::span<const double> c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = static_cast<double>(x[i]) - c[i];
    acc += diff * diff;
  }
  return acc;
}

std::pair<std::uint32_t, double> nearest(std::span<const float> x,
                                         const std::vector<std::vector<double>>& centroids) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = squared_distance(x, centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return {best, best_d};
}

void assign_all(const PointSet& points, const std::vector<std::vector<double>>& centroids,
                std::size_t threads, std::vector<std::uint32_t>& cluster, std::vector<double>& dist2) {
  const std::size_t n = points.size();
  cluster.resize(n);
  dist2.resize(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto [j, d] = nearest(points.row(i), centroids);
      cluster[i] = j;
      dist2[i] = d;
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n / 256 + 1));
  if (workers == 1) {
    work(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin < end) pool.emplace_back(work, begin, end);
  }
}

bool member_less(const Member& a, const Member& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

std::vector<Member> sorted_by_distance(const PointSet& points, std::span<const std::size_t> rows,
                                       std::span<const double> centroid) {
  std::vector<Member> out;
  out.reserve(rows.size());
  for (std::size_t i : rows) {
    out.push_back({points.ids[i], std::sqrt(squared_distance(points.row(i), centroid))});
  }
  std::sort(out.begin(), out.end(), member_less);
  return out;
}

std::uint64_t build_member_lists(const PointSet& points, const std::vector<std::vector<double>>& centroids,
                                 const std::vector<std::uint32_t>& cluster, const std::vector<double>& dist2,
                                 std::vector<std::vector<Member>>& sorted_members,
                                 std::vector<std::vector<Member>>& fallback) {
  const std::size_t k = centroids.size();
  const std::size_t n = points.size();
  sorted_members.assign(k, {});
  fallback.assign(k, {});
  for (std::size_t i = 0; i < n; ++i) sorted_members[cluster[i]].push_back({points.ids[i], std::sqrt(dist2[i])});
  std::uint64_t evals = 0;
  std::vector<std::size_t> all_rows;
  for (std::size_t j = 0; j < k; ++j) {
    std::sort(sorted_members[j].begin(), sorted_members[j].end(), member_less);
    if (!sorted_members[j].empty()) continue;
    if (all_rows.empty()) {
      all_rows.resize(n);
      for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;
    }
    fallback[j] = sorted_by_distance(points, all_rows, centroids[j]);
    evals += n;
  }
  return evals;
}

std::vector<ExampleId> pick_exemplars(const std::vector<std::vector<Member>>& sorted_members,
                                      const std::vector<std::vector<Member>>& fallback) {
  const std::size_t k = sorted_members.size();
  std::vector<ExampleId> out(k, 0);
  std::vector<bool> filled(k, false);
  std::vector<ExampleId> taken;
  for (std::size_t j = 0; j < k; ++j) {
    if (sorted_members[j].empty()) continue;
    out[j] = sorted_members[j].front().id;
    filled[j] = true;
    taken.push_back(out[j]);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (filled[j]) continue;
    for (const Member& m : fallback[j]) {
      if (std::find(taken.begin(), taken.end(), m.id) == taken.end()) {
        out[j] = m.id;
        taken.push_back(m.id);
        filled[j] = true;
        break;
      }
    }
    if (!filled[j]) {
      throw Error(ErrorCode::TooFewExamples, "no live example left for cluster " + std::to_string(j));
    }
  }
  return out;
}

void remove_member(std::vector<Member>& list, ExampleId id) {
  auto it = std::find_if(list.begin(), list.end(), [id](const Member& m) { return m.id == id; });
  if (it != list.end()) list.erase(it);
}

}  // namespace erase::detail
