#include "erase/qkmeans.hpp"

#include "cluster_util.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "erase/errors.hpp"

namespace erase {
namespace {

using detail::nearest;
using detail::assign_all;
using detail::sorted_by_distance;
using detail::remove_member;

// gamma-smoothed mean anchored at the previous quantized centroid. A cluster
// with no members keeps its previous centroid.
void smoothed_mean(std::span<const ExactSum> sum, std::uint64_t count, std::span<const double> prev,
                   double gamma, std::span<double> out) {
  if (count == 0) {
    std::copy(prev.begin(), prev.end(), out.begin());
    return;
  }
  const double denom = static_cast<double>(count) + gamma;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (sum[i].to_double() + gamma * prev[i]) / denom;
}

void validate(const QkmConfig& config, std::size_t n) {
  if (config.k == 0) throw Error(ErrorCode::InvalidK, "k must be >= 1");
  if (config.k > n) {
    throw Error(ErrorCode::TooFewExamples,
                "k=" + std::to_string(config.k) + " exceeds " + std::to_string(n) + " examples");
  }
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be a positive finite number");
  }
  if (config.iters == 0) throw Error(ErrorCode::InvalidArgument, "iters must be >= 1");
  if (!(config.gamma >= 0.0) || !std::isfinite(config.gamma)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must be finite and >= 0");
  }
}

}  // namespace

bool same_state(const QkmModel& a, const QkmModel& b) {
  return a.config == b.config && a.spec == b.spec && a.root_seed == b.root_seed &&
         a.seed_ids == b.seed_ids && a.initial_centroids == b.initial_centroids &&
         a.per_iter == b.per_iter && a.assign_trace == b.assign_trace &&
         a.final_cluster == b.final_cluster && a.final_centroids == b.final_centroids &&
         a.sorted_members == b.sorted_members && a.fallback == b.fallback && a.live_ids == b.live_ids;
}

QkmModel train_with(const PointSet& points, const QkmConfig& config, const LatticeSpec& spec,
                    std::span<const ExampleId> seed_ids, Seed root_seed) {
  const std::size_t n = points.size();
  const std::size_t k = config.k;
  const std::size_t d = points.dim;
  validate(config, n);
  if (spec.dim() != d) throw Error(ErrorCode::DimMismatch, "lattice dim does not match points");
  if (seed_ids.size() != k) throw Error(ErrorCode::InvalidK, "need exactly k seed ids");

  QkmModel model;
  model.config = config;
  model.spec = spec;
  model.root_seed = root_seed;
  model.seed_ids.assign(seed_ids.begin(), seed_ids.end());
  model.live_ids = points.ids;

  std::vector<std::vector<double>> centroids(k, std::vector<double>(d));
  for (std::size_t j = 0; j < k; ++j) {
    auto it = std::lower_bound(points.ids.begin(), points.ids.end(), seed_ids[j]);
    if (it == points.ids.end() || *it != seed_ids[j]) {
      throw Error(ErrorCode::UnknownId, "seed id " + std::to_string(seed_ids[j]) + " not in point set");
    }
    auto row = points.row(static_cast<std::size_t>(it - points.ids.begin()));
    std::vector<double> x(row.begin(), row.end());
    quantize_into(x, spec, centroids[j]);
  }
  model.initial_centroids = centroids;

  std::vector<std::vector<std::uint32_t>> trace(n, std::vector<std::uint32_t>(config.iters));
  std::vector<std::uint32_t> cluster;
  std::vector<double> dist2;
  model.per_iter.resize(config.iters);
  for (std::size_t t = 0; t < config.iters; ++t) {
    assign_all(points, centroids, config.threads, cluster, dist2);
    model.op_counter += n * k;

    auto& stats = model.per_iter[t];
    stats.assign(k, ClusterIterStats{std::vector<ExactSum>(d), 0, std::vector<double>(d), std::vector<double>(d)});
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t j = cluster[i];
      trace[i][t] = j;
      auto& s = stats[j];
      ++s.count;
      auto row = points.row(i);
      for (std::size_t c = 0; c < d; ++c) s.sum[c].add(row[c]);
    }
    for (std::size_t j = 0; j < k; ++j) {
      auto& s = stats[j];
      smoothed_mean(s.sum, s.count, centroids[j], config.gamma, s.centroid_unquantized);
      quantize_into(s.centroid_unquantized, spec, s.centroid_quantized);
      centroids[j] = s.centroid_quantized;
    }
  }
  model.final_centroids = centroids;
  for (std::size_t i = 0; i < n; ++i) model.assign_trace.emplace(points.ids[i], std::move(trace[i]));

  assign_all(points, centroids, config.threads, cluster, dist2);
  model.op_counter += n * k;
  for (std::size_t i = 0; i < n; ++i) model.final_cluster.emplace(points.ids[i], cluster[i]);
  model.op_counter +=
      detail::build_member_lists(points, centroids, cluster, dist2, model.sorted_members, model.fallback);
  return model;
}

QkmModel train(const PointSet& points, const QkmConfig& config, Seed root_seed) {
  validate(config, points.size());
  LatticeSpec spec = sample_phase(points.dim, config.epsilon, derive_seed(root_seed, labels::kPhase),
                                  config.phase_cell);
  Rng seed_rng(derive_seed(root_seed, labels::kSeeds));
  const auto seeds = fisher_yates_prefix<ExampleId>(points.ids, config.k, seed_rng);
  return train_with(points, config, spec, seeds, root_seed);
}

QkmModel train(const Corpus& corpus, const QkmConfig& config, Seed root_seed) {
  return train(corpus.points(), config, root_seed);
}

std::vector<ExampleId> exemplars(const QkmModel& model) {
  return detail::pick_exemplars(model.sorted_members, model.fallback);
}

Certificate deletion_certificate(const QkmModel& model, const Corpus& corpus, ExampleId victim) {
  auto trace_it = model.assign_trace.find(victim);
  if (trace_it == model.assign_trace.end()) throw Error(ErrorCode::UnknownId, std::to_string(victim));
  const auto& trace = trace_it->second;
  const auto x = corpus.embedding(victim);
  const std::size_t d = model.dim();
  if (x.size() != d) throw Error(ErrorCode::DimMismatch, "victim embedding dim differs from model");

  Certificate cert;
  if (std::find(model.seed_ids.begin(), model.seed_ids.end(), victim) != model.seed_ids.end()) {
    cert.kind = CertificateKind::SeedHit;
  }

  // The full pass runs even after a decision is known so the cost is the
  // same for every victim.
  std::vector<ExactSum> sum(d);
  std::vector<double> mean(d), quantized(d);
  const std::vector<std::vector<double>>* prev = &model.initial_centroids;
  std::vector<std::vector<double>> prev_iter(model.k());
  for (std::size_t t = 0; t < model.per_iter.size(); ++t) {
    const auto& stats = model.per_iter[t];
    auto [check, dist] = nearest(x, *prev);
    (void)dist;
    cert.distance_evals += model.k();
    const std::uint32_t j = trace[t];
    if (check != j) {
      throw Error(ErrorCode::SnapshotFormat, "assignment trace of " + std::to_string(victim) +
                                                 " does not replay at iteration " + std::to_string(t + 1));
    }
    const auto& s = stats[j];
    sum = s.sum;
    for (std::size_t c = 0; c < d; ++c) sum[c].subtract(x[c]);
    smoothed_mean(sum, s.count - 1, (*prev)[j], model.config.gamma, mean);
    quantize_into(mean, model.spec, quantized);
    cert.distance_evals += 1;
    if (cert.kind == CertificateKind::Stable && quantized != s.centroid_quantized) {
      cert.kind = CertificateKind::CentroidShift;
      cert.iteration = t + 1;
      cert.cluster = j;
    }
    for (std::size_t c = 0; c < model.k(); ++c) prev_iter[c] = stats[c].centroid_quantized;
    prev = &prev_iter;
  }
  return cert;
}

DeletionStep apply_deletion_in_place(QkmModel& model, const Corpus& corpus, ExampleId victim, Rng& rng,
                                     const Certifier& certify) {
  if (!model.is_live(victim)) throw Error(ErrorCode::UnknownId, std::to_string(victim));
  DeletionStep step{{}, certify(model, corpus, victim)};
  auto& outcome = step.outcome;
  outcome.victim = victim;
  outcome.certificate_evals = step.certificate.distance_evals;
  outcome.distance_evals = step.certificate.distance_evals;

  auto retrain = [&](bool fresh) {
    std::vector<ExampleId> survivors;
    survivors.reserve(model.live_ids.size() - 1);
    for (ExampleId id : model.live_ids) {
      if (id != victim) survivors.push_back(id);
    }
    const PointSet points = corpus.points(survivors);
    if (fresh) {
      model = train(points, model.config, rng.next_u64());
    } else {
      model = train_with(points, model.config, model.spec, model.seed_ids, model.root_seed);
    }
    outcome.kind = OutcomeKind::Retrained;
    outcome.distance_evals += model.op_counter;
  };

  switch (step.certificate.kind) {
    case CertificateKind::SeedHit:
      outcome.cause = RetrainCause::SeedHit;
      retrain(true);
      return step;
    case CertificateKind::CentroidShift:
      outcome.cause = RetrainCause::CentroidShift;
      retrain(model.config.retrain_policy == RetrainPolicy::FreshSeed);
      return step;
    case CertificateKind::Stable:
      break;
  }

  // Stable: centroids stay; only the bookkeeping of the victim goes.
  const auto x = corpus.embedding(victim);
  const std::size_t d = model.dim();
  const auto& trace = model.assign_trace.at(victim);
  for (std::size_t t = 0; t < model.per_iter.size(); ++t) {
    auto& s = model.per_iter[t][trace[t]];
    const auto& prev =
        t == 0 ? model.initial_centroids[trace[t]] : model.per_iter[t - 1][trace[t]].centroid_quantized;
    for (std::size_t c = 0; c < d; ++c) s.sum[c].subtract(x[c]);
    s.count -= 1;
    smoothed_mean(s.sum, s.count, prev, model.config.gamma, s.centroid_unquantized);
  }

  const auto before = exemplars(model);
  const std::uint32_t home = model.final_cluster.at(victim);
  remove_member(model.sorted_members[home], victim);
  for (auto& list : model.fallback) remove_member(list, victim);
  model.assign_trace.erase(victim);
  model.final_cluster.erase(victim);
  model.live_ids.erase(std::lower_bound(model.live_ids.begin(), model.live_ids.end(), victim));

  if (model.sorted_members[home].empty()) {
    // The final cluster lost its last member; order every live point instead.
    const PointSet points = corpus.points(model.live_ids);
    std::vector<std::size_t> rows(points.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    model.fallback[home] = sorted_by_distance(points, rows, model.final_centroids[home]);
    outcome.distance_evals += points.size();
  }
  model.op_counter += outcome.distance_evals;

  const bool was_exemplar = std::find(before.begin(), before.end(), victim) != before.end();
  outcome.kind = was_exemplar ? OutcomeKind::ExemplarReplaced : OutcomeKind::Stable;
  return step;
}

QkmDeletion apply_deletion(const QkmModel& model, const Corpus& corpus, ExampleId victim, Rng& rng,
                           const Certifier& certify) {
  QkmDeletion result{model, {}, {}};
  DeletionStep step = apply_deletion_in_place(result.model, corpus, victim, rng, certify);
  result.outcome = step.outcome;
  result.certificate = step.certificate;
  return result;
}

}  // namespace erase
