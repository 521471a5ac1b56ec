#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "erase/corpus.hpp"
#include "erase/exact_sum.hpp"
#include "erase/lattice.hpp"
#include "erase/outcome.hpp"
#include "erase/rng.hpp"

namespace erase {

// What a deletion does when the certificate reports a centroid shift.
enum class RetrainPolicy {
  // Re-run training on the survivors with the retained phase and seeds.
  ReplayRetained,
  // Re-run training from a fresh root seed (new phase and seeds).
  FreshSeed,
};

struct QkmConfig {
  std::size_t k = 1;
  double epsilon = 0.05;
  std::size_t iters = 10;
  // Pseudo-count pulling each cluster mean toward its previous quantized
  // centroid before re-quantization.
  double gamma = 1.0;
  PhaseCell phase_cell = PhaseCell::Epsilon;
  std::size_t threads = 1;
  RetrainPolicy retrain_policy = RetrainPolicy::ReplayRetained;

  // Worker count is an execution detail and does not take part.
  bool operator==(const QkmConfig& o) const {
    return k == o.k && epsilon == o.epsilon && iters == o.iters && gamma == o.gamma &&
           phase_cell == o.phase_cell && retrain_policy == o.retrain_policy;
  }
};

struct ClusterIterStats {
  std::vector<ExactSum> sum;
  std::uint64_t count = 0;
  std::vector<double> centroid_unquantized;
  std::vector<double> centroid_quantized;

  bool operator==(const ClusterIterStats&) const = default;
};

struct Member {
  ExampleId id = 0;
  double distance = 0.0;

  bool operator==(const Member&) const = default;
};

struct QkmModel {
  QkmConfig config;
  LatticeSpec spec;
  Seed root_seed = 0;
  // Initial centroids, in cluster order.
  std::vector<ExampleId> seed_ids;
  std::vector<std::vector<double>> initial_centroids;
  // per_iter[t][j]: statistics of cluster j in iteration t (0-based).
  std::vector<std::vector<ClusterIterStats>> per_iter;
  // assign_trace[id][t]: cluster of `id` during iteration t.
  std::map<ExampleId, std::vector<std::uint32_t>> assign_trace;
  // Membership against the final centroids.
  std::map<ExampleId, std::uint32_t> final_cluster;
  std::vector<std::vector<double>> final_centroids;
  // Members of each final cluster sorted by (distance, id).
  std::vector<std::vector<Member>> sorted_members;
  // For final clusters without members: every live point by (distance, id).
  std::vector<std::vector<Member>> fallback;
  std::vector<ExampleId> live_ids;
  // Distance evaluations spent since the last full training, inclusive.
  std::uint64_t op_counter = 0;

  std::size_t k() const { return config.k; }
  std::size_t dim() const { return spec.dim(); }
  bool is_live(ExampleId id) const { return assign_trace.contains(id); }
};

// Same observable state; ignores op_counter.
bool same_state(const QkmModel& a, const QkmModel& b);

QkmModel train(const PointSet& points, const QkmConfig& config, Seed root_seed);
QkmModel train(const Corpus& corpus, const QkmConfig& config, Seed root_seed);
// Training with explicitly supplied phase and initial centroids.
QkmModel train_with(const PointSet& points, const QkmConfig& config, const LatticeSpec& spec,
                    std::span<const ExampleId> seed_ids, Seed root_seed);

// Exemplar per cluster in cluster order: the head of each member list, or
// for a memberless cluster the nearest live point not already chosen.
std::vector<ExampleId> exemplars(const QkmModel& model);

enum class CertificateKind { Stable, SeedHit, CentroidShift };

struct Certificate {
  CertificateKind kind = CertificateKind::Stable;
  std::size_t iteration = 0;  // 1-based; set for CentroidShift
  std::size_t cluster = 0;
  std::uint64_t distance_evals = 0;
};

// Decides whether removing `victim` leaves every iteration's quantized
// centroid unchanged. Reads only the victim's vector, its trace, and the
// per-iteration statistics of the clusters it visited: exactly
// iters * (k + 1) distance evaluations, whatever the dataset size.
Certificate deletion_certificate(const QkmModel& model, const Corpus& corpus, ExampleId victim);

using Certifier = std::function<Certificate(const QkmModel&, const Corpus&, ExampleId)>;

struct QkmDeletion {
  QkmModel model;
  DeletionOutcome outcome;
  Certificate certificate;
};

struct DeletionStep {
  DeletionOutcome outcome;
  Certificate certificate;
};

// Same as apply_deletion but mutates `model`; on exception the model may be
// partially updated only if the certifier itself throws before any change.
DeletionStep apply_deletion_in_place(QkmModel& model, const Corpus& corpus, ExampleId victim, Rng& rng,
                                     const Certifier& certify = deletion_certificate);

QkmDeletion apply_deletion(const QkmModel& model, const Corpus& corpus, ExampleId victim, Rng& rng,
                           const Certifier& certify = deletion_certificate);

}  // namespace erase
