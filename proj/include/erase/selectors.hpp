#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "erase/corpus.hpp"
#include "erase/kmeanspp.hpp"
#include "erase/outcome.hpp"
#include "erase/qkmeans.hpp"
#include "erase/rng.hpp"

namespace erase {

enum class Strategy { Erase, Acot, Random };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

struct RandomModel {
  std::size_t k = 0;
  Seed root_seed = 0;
  std::vector<ExampleId> live_ids;  // ascending

  bool operator==(const RandomModel&) const = default;
};

struct SelectionModel {
  Strategy strategy = Strategy::Erase;
  std::size_t k = 0;
  std::variant<QkmModel, KmeansppModel, RandomModel> state;
  // Cluster order for the clustering strategies, draw order for Random.
  std::vector<ExampleId> selected;
  // Unlearning requests applied since the model was created.
  std::uint64_t deletions_applied = 0;

  const std::vector<ExampleId>& live_ids() const;
};

// Quantized k-means exemplars; defaults epsilon = 0.05 and 10 iterations
// come from QkmConfig.
SelectionModel select_erase(const Corpus& corpus, const QkmConfig& config, Seed root_seed);
// k-means++ exemplars (nearest member of each final cluster).
SelectionModel select_acot(const Corpus& corpus, std::size_t k, std::size_t iters, Seed root_seed,
                           std::size_t threads = 1);
// k distinct ids by a seeded Fisher-Yates prefix over the ascending ids.
SelectionModel select_random(const Corpus& corpus, std::size_t k, Seed root_seed);
SelectionModel select_random(std::span<const ExampleId> ids, std::size_t k, Seed root_seed);

struct SelectionDeletion {
  SelectionModel model;
  DeletionOutcome outcome;
};

// Exact unlearning of one example.
//   Random: keep the selection unless the victim is in it, then replace the
//           victim by one uniform draw from the unselected live ids.
//   Acot:   retrain from a fresh seed drawn from `rng`.
//   Erase:  certified deletion on the quantized k-means state.
DeletionOutcome unlearn_in_place(SelectionModel& model, const Corpus& corpus, ExampleId victim, Rng& rng,
                                 const Certifier& certify = deletion_certificate);

SelectionDeletion unlearn_selection(const SelectionModel& model, const Corpus& corpus, ExampleId victim,
                                    Rng& rng, const Certifier& certify = deletion_certificate);

}  // namespace erase
