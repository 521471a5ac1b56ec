#include "erase/selectors.hpp"

#include <algorithm>
#include <string>

#include "erase/errors.hpp"

namespace erase {
namespace {

void check_k(std::size_t k, std::size_t n) {
  if (k == 0) throw Error(ErrorCode::InvalidK, "k must be >= 1");
  if (k > n) {
    throw Error(ErrorCode::TooFewExamples, "k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " examples");
  }
}

DeletionOutcome unlearn_random(SelectionModel& model, ExampleId victim, Rng& rng) {
  auto& state = std::get<RandomModel>(model.state);
  auto live_it = std::lower_bound(state.live_ids.begin(), state.live_ids.end(), victim);
  if (live_it == state.live_ids.end() || *live_it != victim) {
    throw Error(ErrorCode::UnknownId, std::to_string(victim));
  }
  DeletionOutcome outcome;
  outcome.victim = victim;
  auto& selected = model.selected;
  auto pos = std::find(selected.begin(), selected.end(), victim);
  if (pos != selected.end()) {
    if (state.live_ids.size() <= selected.size()) {
      throw Error(ErrorCode::CannotReplace, "no unselected live example to replace " + std::to_string(victim));
    }
    // Rejection sampling over the live ids: one accepted draw is uniform on
    // live \ selected.
    ExampleId replacement = 0;
    for (;;) {
      replacement = state.live_ids[rng.uniform_below(state.live_ids.size())];
      ++outcome.resample_draws;
      if (std::find(selected.begin(), selected.end(), replacement) == selected.end()) break;
    }
    *pos = replacement;
    outcome.kind = OutcomeKind::ExemplarReplaced;
  }
  state.live_ids.erase(live_it);
  return outcome;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Erase: return "erase";
    case Strategy::Acot: return "acot";
    case Strategy::Random: return "random";
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "erase") return Strategy::Erase;
  if (s == "acot") return Strategy::Acot;
  if (s == "random") return Strategy::Random;
  throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(s) + "'");
}

const std::vector<ExampleId>& SelectionModel::live_ids() const {
  return std::visit([](const auto& s) -> const std::vector<ExampleId>& { return s.live_ids; }, state);
}

SelectionModel select_erase(const Corpus& corpus, const QkmConfig& config, Seed root_seed) {
  SelectionModel out;
  out.strategy = Strategy::Erase;
  out.k = config.k;
  QkmModel model = train(corpus, config, root_seed);
  out.selected = exemplars(model);
  out.state = std::move(model);
  return out;
}

SelectionModel select_acot(const Corpus& corpus, std::size_t k, std::size_t iters, Seed root_seed,
                           std::size_t threads) {
  SelectionModel out;
  out.strategy = Strategy::Acot;
  out.k = k;
  KmeansppModel model = train_kmeanspp(corpus.points(), k, iters, root_seed, threads);
  out.selected = exemplars(model);
  out.state = std::move(model);
  return out;
}

SelectionModel select_random(std::span<const ExampleId> ids, std::size_t k, Seed root_seed) {
  check_k(k, ids.size());
  RandomModel state{k, root_seed, std::vector<ExampleId>(ids.begin(), ids.end())};
  std::sort(state.live_ids.begin(), state.live_ids.end());
  Rng rng(derive_seed(root_seed, labels::kSeeds));
  SelectionModel out;
  out.strategy = Strategy::Random;
  out.k = k;
  out.selected = fisher_yates_prefix<ExampleId>(state.live_ids, k, rng);
  out.state = std::move(state);
  return out;
}

SelectionModel select_random(const Corpus& corpus, std::size_t k, Seed root_seed) {
  const auto ids = corpus.ids();
  return select_random(ids, k, root_seed);
}

DeletionOutcome unlearn_in_place(SelectionModel& model, const Corpus& corpus, ExampleId victim, Rng& rng,
                                 const Certifier& certify) {
  DeletionOutcome outcome;
  switch (model.strategy) {
    case Strategy::Random:
      outcome = unlearn_random(model, victim, rng);
      break;
    case Strategy::Acot: {
      auto& state = std::get<KmeansppModel>(model.state);
      if (!state.assignment.contains(victim)) throw Error(ErrorCode::UnknownId, std::to_string(victim));
      std::vector<ExampleId> survivors;
      survivors.reserve(state.live_ids.size() - 1);
      for (ExampleId id : state.live_ids) {
        if (id != victim) survivors.push_back(id);
      }
      state = train_kmeanspp(corpus.points(survivors), state.k, state.iters, rng.next_u64());
      model.selected = exemplars(state);
      outcome.victim = victim;
      outcome.kind = OutcomeKind::Retrained;
      outcome.cause = RetrainCause::AlwaysRetrain;
      outcome.distance_evals = state.op_counter;
      break;
    }
    case Strategy::Erase: {
      auto& state = std::get<QkmModel>(model.state);
      outcome = apply_deletion_in_place(state, corpus, victim, rng, certify).outcome;
      model.selected = exemplars(state);
      break;
    }
  }
  ++model.deletions_applied;
  return outcome;
}

SelectionDeletion unlearn_selection(const SelectionModel& model, const Corpus& corpus, ExampleId victim,
                                    Rng& rng, const Certifier& certify) {
  SelectionDeletion result{model, {}};
  result.outcome = unlearn_in_place(result.model, corpus, victim, rng, certify);
  return result;
}

}  // namespace erase
