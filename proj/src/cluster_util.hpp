#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "erase/corpus.hpp"
#include "erase/qkmeans.hpp"

namespace erase::detail {

double squared_distance(std::span<const float> x, std::span<const double> c);

// Nearest centroid, ties to the lower index. Returns (index, squared distance).
std::pair<std::uint32_t, double> nearest(std::span<const float> x,
                                         const std::vector<std::vector<double>>& centroids);

// Assignment of every point, parallel over contiguous chunks. Each slot is
// written by exactly one worker, so the result is independent of `threads`.
void assign_all(const PointSet& points, const std::vector<std::vector<double>>& centroids,
                std::size_t threads, std::vector<std::uint32_t>& cluster, std::vector<double>& dist2);

bool member_less(const Member& a, const Member& b);

std::vector<Member> sorted_by_distance(const PointSet& points, std::span<const std::size_t> rows,
                                       std::span<const double> centroid);

// Final membership lists from an assignment (squared distances in dist2),
// plus whole-set orderings for memberless clusters. Returns distance
// evaluations spent on the fallbacks.
std::uint64_t build_member_lists(const PointSet& points, const std::vector<std::vector<double>>& centroids,
                                 const std::vector<std::uint32_t>& cluster, const std::vector<double>& dist2,
                                 std::vector<std::vector<Member>>& sorted_members,
                                 std::vector<std::vector<Member>>& fallback);

std::vector<ExampleId> pick_exemplars(const std::vector<std::vector<Member>>& sorted_members,
                                      const std::vector<std::vector<Member>>& fallback);

void remove_member(std::vector<Member>& list, ExampleId id);

}  // namespace erase::detail
