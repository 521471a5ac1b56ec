#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "erase/corpus.hpp"

namespace erase {

enum class OutcomeKind { Stable, ExemplarReplaced, Retrained };

enum class RetrainCause {
  None,
  SeedHit,        // victim was an initial centroid
  CentroidShift,  // some quantized centroid would move
  AlwaysRetrain,  // strategy has no cheaper exact path
};

std::string_view to_string(OutcomeKind kind);
std::string_view to_string(RetrainCause cause);
OutcomeKind outcome_kind_from_string(std::string_view s);
RetrainCause retrain_cause_from_string(std::string_view s);

// Result of one unlearning request.
struct DeletionOutcome {
  ExampleId victim = 0;
  OutcomeKind kind = OutcomeKind::Stable;
  RetrainCause cause = RetrainCause::None;
  // d-dimensional distance evaluations spent (certificate + any retrain).
  std::uint64_t distance_evals = 0;
  std::uint64_t certificate_evals = 0;
  // Uniform draws spent on resampling (random strategy).
  std::uint64_t resample_draws = 0;
  double cost_flops = 0.0;
  std::string snapshot_hash;  // empty unless requested
};

}  // namespace erase
