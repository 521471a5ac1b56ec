#include "erase/unlearn_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <string>

#include "erase/costmodel.hpp"
#include "erase/errors.hpp"
#include "erase/snapshot.hpp"

namespace erase {
namespace {

using nlohmann::json;

CostSummary summarize(std::vector<double> values) {
  CostSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  // Nearest-rank percentiles.
  auto rank = [&](double q) {
    const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(r, 1, values.size()) - 1];
  };
  s.p50 = rank(0.50);
  s.p90 = rank(0.90);
  s.p99 = rank(0.99);
  s.max = values.back();
  return s;
}

json point_set_json(const PointSet& points) {
  json rows = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    json v = json::array();
    for (float x : points.row(i)) v.push_back(static_cast<double>(x));
    rows.push_back({{"id", points.ids[i]}, {"vector", std::move(v)}});
  }
  return rows;
}

json witness(const QkmModel& before, const Corpus& corpus, ExampleId victim) {
  return {{"victim", victim},
          {"k", before.config.k},
          {"epsilon", before.config.epsilon},
          {"iters", before.config.iters},
          {"gamma", before.config.gamma},
          {"root_seed", before.root_seed},
          {"seed_ids", before.seed_ids},
          {"spec", to_json(before.spec)},
          {"points", point_set_json(corpus.points(before.live_ids))}};
}

bool quantized_trajectory_equal(const QkmModel& a, const QkmModel& b) {
  if (a.per_iter.size() != b.per_iter.size()) return false;
  for (std::size_t t = 0; t < a.per_iter.size(); ++t) {
    for (std::size_t j = 0; j < a.per_iter[t].size(); ++j) {
      if (a.per_iter[t][j].centroid_quantized != b.per_iter[t][j].centroid_quantized) return false;
    }
  }
  return true;
}

void verify_erase(const VerifyConfig& config, const Corpus& corpus, std::span<const DeletionRequest> requests,
                  VerificationVerdict& verdict) {
  SelectionModel model = select_erase(corpus, config.qkm, config.root_seed);
  for (const auto& req : requests) {
    const auto& before = std::get<QkmModel>(model.state);
    if (!before.is_live(req.victim_id)) {
      throw Error(ErrorCode::DeadVictim, "id " + std::to_string(req.victim_id) + " at index " + std::to_string(req.index));
    }
    Rng rng(retrain_seed(config.root_seed, model.deletions_applied));
    SelectionDeletion del = unlearn_selection(model, corpus, req.victim_id, rng, config.certify);
    const auto& after = std::get<QkmModel>(del.model.state);
    ++verdict.erase_deletions;

    std::vector<ExampleId> survivors;
    for (ExampleId id : before.live_ids) {
      if (id != req.victim_id) survivors.push_back(id);
    }
    const PointSet points = corpus.points(survivors);
    auto fail = [&](std::string reason) {
      verdict.failures.push_back({"replay", std::move(reason), req.index, witness(before, corpus, req.victim_id)});
    };

    const bool seeds_survive = std::all_of(before.seed_ids.begin(), before.seed_ids.end(), [&](ExampleId id) {
      return std::binary_search(survivors.begin(), survivors.end(), id);
    });
    auto replay = [&] { return train_with(points, before.config, before.spec, before.seed_ids, before.root_seed); };
    auto expect_equal = [&](const QkmModel& expected, const char* what) {
      if (!same_state(after, expected)) fail(std::string("state differs from ") + what);
      if (del.model.selected != exemplars(expected)) fail(std::string("selection differs from ") + what);
    };

    if (del.outcome.kind != OutcomeKind::Retrained) {
      ++verdict.stable_replays;
      if (!seeds_survive) {
        fail("kept a model initialized from the deleted example");
      } else {
        expect_equal(replay(), "replay with retained randomness");
      }
    } else if (del.outcome.cause == RetrainCause::CentroidShift) {
      ++verdict.shift_replays;
      const QkmModel replayed = replay();
      if (quantized_trajectory_equal(replayed, before)) fail("certificate reported a shift the replay does not show");
      if (before.config.retrain_policy == RetrainPolicy::ReplayRetained) {
        expect_equal(replayed, "replay with retained randomness");
      } else {
        expect_equal(train(points, before.config, after.root_seed), "training from the recorded fresh seed");
      }
    } else {
      ++verdict.seed_retrains;
      if (seeds_survive) fail("seed-hit retrain for a victim that was not a seed");
      expect_equal(train(points, before.config, after.root_seed), "training from the recorded fresh seed");
    }
    model = std::move(del.model);
  }
}

void verify_random(const VerifyConfig& config, const Corpus& corpus, std::span<const DeletionRequest> requests,
                   std::size_t trials, VerificationVerdict& verdict) {
  const auto ids = corpus.ids();
  std::set<ExampleId> removed;
  for (const auto& req : requests) removed.insert(req.victim_id);
  std::vector<ExampleId> survivors;
  for (ExampleId id : ids) {
    if (!removed.contains(id)) survivors.push_back(id);
  }
  if (survivors.size() < config.random_k) {
    verdict.failures.push_back({"distribution", "fewer survivors than k", 0, json::object()});
    return;
  }

  std::map<std::vector<ExampleId>, std::size_t> category;
  std::vector<std::uint64_t> unlearned, direct;
  auto tally = [&](std::vector<ExampleId> subset, std::vector<std::uint64_t>& into) {
    std::sort(subset.begin(), subset.end());
    auto [it, inserted] = category.emplace(std::move(subset), category.size());
    if (inserted) {
      unlearned.push_back(0);
      direct.push_back(0);
    }
    ++into[it->second];
  };

  for (std::size_t t = 0; t < trials; ++t) {
    const Seed trial_seed = derive_seed(config.root_seed, "trial:" + std::to_string(t));
    SelectionModel model = select_random(ids, config.random_k, trial_seed);
    for (const auto& req : requests) {
      Rng rng(retrain_seed(trial_seed, model.deletions_applied));
      model = unlearn_selection(model, corpus, req.victim_id, rng).model;
    }
    tally(model.selected, unlearned);
    const Seed direct_seed = derive_seed(config.root_seed, "direct:" + std::to_string(t));
    tally(select_random(survivors, config.random_k, direct_seed).selected, direct);
  }
  verdict.random_trials = trials;
  verdict.random_test = chi_square_homogeneity(unlearned, direct);
  if (verdict.random_test->p_value <= config.alpha) {
    json counts = json::array();
    for (const auto& [subset, idx] : category) {
      counts.push_back({{"subset", subset}, {"unlearned", unlearned[idx]}, {"direct", direct[idx]}});
    }
    verdict.failures.push_back({"distribution",
                                "chi-square p=" + std::to_string(verdict.random_test->p_value) + " <= alpha",
                                requests.empty() ? 0 : requests.back().index,
                                {{"k", config.random_k}, {"counts", std::move(counts)}}});
  }
}

}  // namespace

std::vector<DeletionRequest> sample_uniform_stream(std::span<const ExampleId> live, std::size_t m, Rng& rng) {
  if (m > live.size()) {
    throw Error(ErrorCode::StreamTooLong,
                "m=" + std::to_string(m) + " exceeds " + std::to_string(live.size()) + " live examples");
  }
  const auto victims = fisher_yates_prefix<ExampleId>(live, m, rng);
  std::vector<DeletionRequest> out;
  out.reserve(m);
  for (std::size_t i = 0; i < victims.size(); ++i) out.push_back({victims[i], i});
  return out;
}

std::vector<DeletionRequest> sample_uniform_stream(const Corpus& corpus, std::size_t m, Rng& rng) {
  const auto ids = corpus.ids();
  return sample_uniform_stream(ids, m, rng);
}

std::vector<DeletionRequest> load_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<DeletionRequest> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object() || obj.value("op", "") != "delete" || !obj.contains("id") ||
        !obj["id"].is_number_unsigned()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected {\"op\":\"delete\",\"id\":u64}");
    }
    out.push_back({obj["id"].get<ExampleId>(), out.size()});
  }
  return out;
}

void save_stream(std::span<const DeletionRequest> requests, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& r : requests) out << json{{"op", "delete"}, {"id", r.victim_id}}.dump() << '\n';
}

StreamResult run_stream(const SelectionModel& model, const Corpus& corpus,
                        std::span<const DeletionRequest> requests, const StreamOptions& options) {
  StreamResult result{model, {}};
  auto& report = result.report;
  const double flops_per_eval = distance_eval_flops(corpus.dim());
  std::map<std::string, std::vector<double>> evals_by_kind;
  std::uint64_t retrains = 0;

  for (const auto& req : requests) {
    const auto& live = result.model.live_ids();
    if (!std::binary_search(live.begin(), live.end(), req.victim_id)) {
      throw Error(ErrorCode::DeadVictim,
                  "id " + std::to_string(req.victim_id) + " at index " + std::to_string(req.index));
    }
    Rng rng(retrain_seed(options.unlearn_seed, result.model.deletions_applied));
    DeletionOutcome outcome = unlearn_in_place(result.model, corpus, req.victim_id, rng, options.certify);
    outcome.cost_flops = static_cast<double>(outcome.distance_evals) * flops_per_eval;
    if (options.record_hashes) outcome.snapshot_hash = snapshot_hash(result.model);

    if (outcome.kind == OutcomeKind::Retrained) ++retrains;
    evals_by_kind[std::string(to_string(outcome.kind))].push_back(static_cast<double>(outcome.distance_evals));
    ++report.causes[std::string(to_string(outcome.cause))];
    report.total_distance_evals += outcome.distance_evals;
    report.total_cost_flops += outcome.cost_flops;
    report.outcomes.push_back(std::move(outcome));
  }
  for (auto& [kind, values] : evals_by_kind) report.costs[kind] = summarize(std::move(values));
  report.retrain_fraction =
      requests.empty() ? 0.0 : static_cast<double>(retrains) / static_cast<double>(requests.size());
  report.final_live = result.model.live_ids().size();
  return result;
}

json to_json(const StreamReport& report) {
  json outcomes = json::array();
  for (const auto& o : report.outcomes) {
    json entry = {{"victim", o.victim},
                  {"kind", to_string(o.kind)},
                  {"cause", to_string(o.cause)},
                  {"distance_evals", o.distance_evals},
                  {"certificate_evals", o.certificate_evals},
                  {"resample_draws", o.resample_draws},
                  {"cost_flops", o.cost_flops}};
    if (!o.snapshot_hash.empty()) entry["snapshot_hash"] = o.snapshot_hash;
    outcomes.push_back(std::move(entry));
  }
  json costs = json::object();
  for (const auto& [kind, s] : report.costs) {
    costs[kind] = {{"count", s.count}, {"mean", s.mean}, {"p50", s.p50}, {"p90", s.p90}, {"p99", s.p99}, {"max", s.max}};
  }
  return {{"report", "stream"},
          {"version", kReportVersion},
          {"m", report.outcomes.size()},
          {"retrain_fraction", report.retrain_fraction},
          {"final_live", report.final_live},
          {"total_distance_evals", report.total_distance_evals},
          {"total_cost_flops", report.total_cost_flops},
          {"costs", std::move(costs)},
          {"causes", report.causes},
          {"outcomes", std::move(outcomes)}};
}

json to_json(const VerificationVerdict& verdict) {
  json failures = json::array();
  for (const auto& f : verdict.failures) {
    failures.push_back({{"check", f.check}, {"reason", f.reason}, {"request_index", f.request_index}, {"witness", f.witness}});
  }
  json out = {{"report", "verification"},
              {"version", kReportVersion},
              {"passed", verdict.passed()},
              {"erase_deletions", verdict.erase_deletions},
              {"stable_replays", verdict.stable_replays},
              {"shift_replays", verdict.shift_replays},
              {"seed_retrains", verdict.seed_retrains},
              {"random_trials", verdict.random_trials},
              {"failures", std::move(failures)}};
  if (verdict.random_test) {
    out["random_chi_square"] = {{"statistic", verdict.random_test->statistic},
                                {"dof", verdict.random_test->dof},
                                {"p_value", verdict.random_test->p_value}};
  }
  return out;
}

VerificationVerdict verify_exactness(const VerifyConfig& config, const Corpus& corpus,
                                     std::span<const DeletionRequest> requests, std::size_t trials) {
  VerificationVerdict verdict;
  if (config.check_erase) verify_erase(config, corpus, requests, verdict);
  if (config.check_random && trials > 0) verify_random(config, corpus, requests, trials, verdict);
  return verdict;
}

}  // namespace erase
