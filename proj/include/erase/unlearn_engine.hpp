#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "erase/corpus.hpp"
#include "erase/outcome.hpp"
#include "erase/qkmeans.hpp"
#include "erase/selectors.hpp"
#include "erase/stats.hpp"

namespace erase {

inline constexpr int kReportVersion = 1;

struct DeletionRequest {
  ExampleId victim_id = 0;
  std::size_t index = 0;

  bool operator==(const DeletionRequest&) const = default;
};

// m distinct victims, each uniform over the ids still live at its turn.
// Throws StreamTooLong when m exceeds the live count.
std::vector<DeletionRequest> sample_uniform_stream(std::span<const ExampleId> live, std::size_t m, Rng& rng);
std::vector<DeletionRequest> sample_uniform_stream(const Corpus& corpus, std::size_t m, Rng& rng);

// JSON-lines {"op":"delete","id":<u64>}.
std::vector<DeletionRequest> load_stream(const std::filesystem::path& path);
void save_stream(std::span<const DeletionRequest> requests, const std::filesystem::path& path);

struct StreamOptions {
  // Request i (counted over the model's lifetime) draws its randomness from
  // retrain_seed(unlearn_seed, i).
  Seed unlearn_seed = 0;
  bool record_hashes = false;
  Certifier certify = deletion_certificate;
};

struct CostSummary {
  std::uint64_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

struct StreamReport {
  std::vector<DeletionOutcome> outcomes;
  double retrain_fraction = 0.0;
  // distance_evals summarized per outcome kind ("stable", ...).
  std::map<std::string, CostSummary> costs;
  std::map<std::string, std::uint64_t> causes;
  std::size_t final_live = 0;
  std::uint64_t total_distance_evals = 0;
  double total_cost_flops = 0.0;
};

nlohmann::json to_json(const StreamReport& report);

struct StreamResult {
  SelectionModel model;
  StreamReport report;
};

// Applies requests strictly in order. Throws DeadVictim on a request for an
// id that is no longer live.
StreamResult run_stream(const SelectionModel& model, const Corpus& corpus,
                        std::span<const DeletionRequest> requests, const StreamOptions& options);

struct VerifyConfig {
  QkmConfig qkm;
  Seed root_seed = 0;
  std::size_t random_k = 2;
  double alpha = 0.01;
  bool check_erase = true;
  bool check_random = true;
  Certifier certify = deletion_certificate;
};

struct VerificationFailure {
  std::string check;  // "replay" or "distribution"
  std::string reason;
  std::size_t request_index = 0;
  nlohmann::json witness;
};

struct VerificationVerdict {
  std::size_t erase_deletions = 0;
  std::size_t stable_replays = 0;
  std::size_t shift_replays = 0;
  std::size_t seed_retrains = 0;
  std::optional<ChiSquareResult> random_test;
  std::size_t random_trials = 0;
  std::vector<VerificationFailure> failures;

  bool passed() const { return failures.empty(); }
};

nlohmann::json to_json(const VerificationVerdict& verdict);

// (a) Every Erase deletion is compared with training on the survivors: a
//     Stable outcome and a centroid-shift retrain must both equal a replay
//     with the retained phase and seeds; a seed-hit retrain must equal
//     training from its recorded fresh seed. A centroid-shift certificate
//     must also be justified: the replay has to differ from the old model.
// (b) Random: the selection after unlearning the whole stream, over
//     `trials` seeds, is compared by a homogeneity chi-square test with
//     direct selection on the surviving ids.
VerificationVerdict verify_exactness(const VerifyConfig& config, const Corpus& corpus,
                                     std::span<const DeletionRequest> requests, std::size_t trials);

}  // namespace erase
