#include "erase/outcome.hpp"

#include <string>

#include "erase/errors.hpp"

namespace erase {

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Stable: return "stable";
    case OutcomeKind::ExemplarReplaced: return "exemplar_replaced";
    case OutcomeKind::Retrained: return "retrained";
  }
  return "unknown";
}

std::string_view to_string(RetrainCause cause) {
  switch (cause) {
    case RetrainCause::None: return "none";
    case RetrainCause::SeedHit: return "seed_hit";
    case RetrainCause::CentroidShift: return "centroid_shift";
    case RetrainCause::AlwaysRetrain: return "always_retrain";
  }
  return "unknown";
}

OutcomeKind outcome_kind_from_string(std::string_view s) {
  if (s == "stable") return OutcomeKind::Stable;
  if (s == "exemplar_replaced") return OutcomeKind::ExemplarReplaced;
  if (s == "retrained") return OutcomeKind::Retrained;
  throw Error(ErrorCode::ParseError, "unknown outcome kind '" + std::string(s) + "'");
}

RetrainCause retrain_cause_from_string(std::string_view s) {
  if (s == "none") return RetrainCause::None;
  if (s == "seed_hit") return RetrainCause::SeedHit;
  if (s == "centroid_shift") return RetrainCause::CentroidShift;
  if (s == "always_retrain") return RetrainCause::AlwaysRetrain;
  throw Error(ErrorCode::ParseError, "unknown retrain cause '" + std::string(s) + "'");
}

}  // namespace erase
