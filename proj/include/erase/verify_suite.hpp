#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "erase/corpus.hpp"
#include "erase/qkmeans.hpp"
#include "erase/unlearn_engine.hpp"

namespace erase {

// A small random quantized k-means problem with a deletion stream.
struct VerifyInstance {
  Corpus corpus;
  QkmConfig qkm;
  Seed root_seed = 0;
  std::vector<DeletionRequest> stream;
};

// |D| in [k + 2, max_size], d in [1, 8], k in [1, 5],
// epsilon in {0.02, 0.05, 0.2}, mixture spread in [0.005, 0.3].
VerifyInstance random_instance(Seed seed, std::size_t max_size = 200, std::size_t max_deletions = 10);

struct CertificateMismatch {
  ExampleId victim = 0;
  std::string reason;
};

// Certifies every live example of a trained model and compares each verdict
// with a replay on the survivors: SeedHit iff the victim is a seed; Stable
// iff the replayed quantized trajectory is unchanged; CentroidShift names
// the first (iteration, cluster) where it changes.
std::vector<CertificateMismatch> exhaustive_certificate_check(const QkmModel& model, const Corpus& corpus,
                                                              const Certifier& certify = deletion_certificate);

struct SuiteConfig {
  std::size_t instances = 100;
  std::size_t max_size = 200;
  std::size_t max_deletions = 10;
  // Instances at or below this size also get the exhaustive check.
  std::size_t exhaustive_max_size = 40;
  std::size_t random_trials = 50'000;
  double alpha = 0.01;
  Seed seed = 0;
  Certifier certify = deletion_certificate;
};

struct DistributionCheck {
  std::string name;
  std::size_t size = 0;
  std::size_t k = 0;
  std::size_t deletions = 0;
  VerificationVerdict verdict;
};

struct SuiteResult {
  std::size_t instances = 0;
  std::size_t erase_deletions = 0;
  std::size_t stable_replays = 0;
  std::size_t shift_replays = 0;
  std::size_t seed_retrains = 0;
  std::size_t exhaustive_instances = 0;
  std::size_t exhaustive_victims = 0;
  std::vector<VerificationFailure> failures;
  std::vector<CertificateMismatch> certificate_mismatches;
  std::vector<DistributionCheck> distribution;

  bool passed() const;
};

// Random-strategy distribution checks run on two instances: |D| = 6 with one
// deletion (10 surviving pairs) and |D| = 7 with one deletion (15 pairs).
SuiteResult run_verify_suite(const SuiteConfig& config);

nlohmann::json to_json(const SuiteResult& result);

}  // namespace erase
