#include "erase/verify_suite.hpp"

#include <algorithm>
#include <array>

#include "erase/synthetic.hpp"

namespace erase {
namespace {

// First (iteration, cluster) where two trajectories' quantized centroids
// differ, 1-based iteration; {0, 0} when equal.
std::pair<std::size_t, std::size_t> first_difference(const QkmModel& a, const QkmModel& b) {
  for (std::size_t t = 0; t < a.per_iter.size(); ++t) {
    for (std::size_t j = 0; j < a.per_iter[t].size(); ++j) {
      if (a.per_iter[t][j].centroid_quantized != b.per_iter[t][j].centroid_quantized) return {t + 1, j};
    }
  }
  return {0, 0};
}

}  // namespace

VerifyInstance random_instance(Seed seed, std::size_t max_size, std::size_t max_deletions) {
  static constexpr std::array<double, 3> kEpsilons = {0.02, 0.05, 0.2};
  Rng rng(derive_seed(seed, "instance"));
  VerifyInstance inst;
  inst.qkm.k = 1 + rng.uniform_below(5);
  inst.qkm.epsilon = kEpsilons[rng.uniform_below(kEpsilons.size())];
  inst.qkm.iters = 1 + rng.uniform_below(10);
  const std::size_t lo = inst.qkm.k + 2;
  const std::size_t hi = std::max(lo, max_size);

  MixtureSpec mix;
  mix.size = lo + rng.uniform_below(hi - lo + 1);
  mix.dim = 1 + rng.uniform_below(8);
  mix.components = 1 + rng.uniform_below(5);
  mix.spread = 0.005 + 0.295 * rng.uniform01();
  inst.corpus = gaussian_mixture(mix, derive_seed(seed, "data"));
  inst.root_seed = derive_seed(seed, "model");

  Rng stream_rng(derive_seed(seed, labels::kStream));
  const std::size_t m = std::min(max_deletions, mix.size - inst.qkm.k);
  inst.stream = sample_uniform_stream(inst.corpus, m, stream_rng);
  return inst;
}

std::vector<CertificateMismatch> exhaustive_certificate_check(const QkmModel& model, const Corpus& corpus,
                                                              const Certifier& certify) {
  std::vector<CertificateMismatch> out;
  for (ExampleId victim : model.live_ids) {
    const Certificate cert = certify(model, corpus, victim);
    const bool is_seed = std::find(model.seed_ids.begin(), model.seed_ids.end(), victim) != model.seed_ids.end();
    if (is_seed != (cert.kind == CertificateKind::SeedHit)) {
      out.push_back({victim, is_seed ? "seed victim not flagged" : "non-seed victim flagged as seed hit"});
      continue;
    }
    if (is_seed) continue;

    std::vector<ExampleId> survivors;
    for (ExampleId id : model.live_ids) {
      if (id != victim) survivors.push_back(id);
    }
    const QkmModel replay = train_with(corpus.points(survivors), model.config, model.spec, model.seed_ids,
                                       model.root_seed);
    const auto [t, j] = first_difference(model, replay);
    if (t == 0 && cert.kind != CertificateKind::Stable) {
      out.push_back({victim, "centroid shift reported but the replay keeps every centroid"});
    } else if (t != 0 && cert.kind == CertificateKind::Stable) {
      out.push_back({victim, "stable reported but the replay moves iteration " + std::to_string(t) + " cluster " +
                                 std::to_string(j)});
    } else if (t != 0 && (cert.iteration != t || cert.cluster != j)) {
      out.push_back({victim, "centroid shift at iteration " + std::to_string(cert.iteration) + " cluster " +
                                 std::to_string(cert.cluster) + ", replay first moves iteration " +
                                 std::to_string(t) + " cluster " + std::to_string(j)});
    }
  }
  return out;
}

bool SuiteResult::passed() const {
  if (!failures.empty() || !certificate_mismatches.empty()) return false;
  return std::all_of(distribution.begin(), distribution.end(),
                     [](const DistributionCheck& c) { return c.verdict.passed(); });
}

SuiteResult run_verify_suite(const SuiteConfig& config) {
  SuiteResult result;
  for (std::size_t i = 0; i < config.instances; ++i) {
    const Seed seed = derive_seed(config.seed, "instance:" + std::to_string(i));
    const VerifyInstance inst = random_instance(seed, config.max_size, config.max_deletions);
    VerifyConfig vc;
    vc.qkm = inst.qkm;
    vc.root_seed = inst.root_seed;
    vc.check_random = false;
    vc.certify = config.certify;
    VerificationVerdict v = verify_exactness(vc, inst.corpus, inst.stream, 0);
    ++result.instances;
    result.erase_deletions += v.erase_deletions;
    result.stable_replays += v.stable_replays;
    result.shift_replays += v.shift_replays;
    result.seed_retrains += v.seed_retrains;
    for (auto& f : v.failures) {
      f.witness["instance"] = i;
      result.failures.push_back(std::move(f));
    }
    if (inst.corpus.size() <= config.exhaustive_max_size) {
      const QkmModel model = train(inst.corpus, inst.qkm, inst.root_seed);
      auto mism = exhaustive_certificate_check(model, inst.corpus, config.certify);
      ++result.exhaustive_instances;
      result.exhaustive_victims += model.live_ids.size();
      result.certificate_mismatches.insert(result.certificate_mismatches.end(), mism.begin(), mism.end());
    }
  }

  if (config.random_trials > 0) {
    for (std::size_t size : {6u, 7u}) {
      MixtureSpec mix{.size = size, .dim = 2, .components = 1, .spread = 0.1, .center_range = 1.0};
      const Seed seed = derive_seed(config.seed, "distribution:" + std::to_string(size));
      const Corpus corpus = gaussian_mixture(mix, seed);
      Rng stream_rng(derive_seed(seed, labels::kStream));
      const auto stream = sample_uniform_stream(corpus, 1, stream_rng);
      VerifyConfig vc;
      vc.root_seed = seed;
      vc.random_k = 2;
      vc.alpha = config.alpha;
      vc.check_erase = false;
      DistributionCheck check{"random:|D|=" + std::to_string(size), size, 2, 1,
                              verify_exactness(vc, corpus, stream, config.random_trials)};
      result.distribution.push_back(std::move(check));
    }
  }
  return result;
}

nlohmann::json to_json(const SuiteResult& result) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"check", f.check}, {"reason", f.reason}, {"request_index", f.request_index},
                        {"witness", f.witness}});
  }
  nlohmann::json mism = nlohmann::json::array();
  for (const auto& m : result.certificate_mismatches) mism.push_back({{"victim", m.victim}, {"reason", m.reason}});
  nlohmann::json dist = nlohmann::json::array();
  for (const auto& c : result.distribution) {
    dist.push_back({{"name", c.name}, {"size", c.size}, {"k", c.k}, {"deletions", c.deletions},
                    {"verdict", to_json(c.verdict)}});
  }
  return {{"report", "verify_suite"},
          {"version", kReportVersion},
          {"passed", result.passed()},
          {"instances", result.instances},
          {"erase_deletions", result.erase_deletions},
          {"stable_replays", result.stable_replays},
          {"shift_replays", result.shift_replays},
          {"seed_retrains", result.seed_retrains},
          {"exhaustive_instances", result.exhaustive_instances},
          {"exhaustive_victims", result.exhaustive_victims},
          {"failures", std::move(failures)},
          {"certificate_mismatches", std::move(mism)},
          {"distribution", std::move(dist)}};
}

}  // namespace erase
