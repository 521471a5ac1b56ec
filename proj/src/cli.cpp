#include "erase/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "erase/bench.hpp"
#include "erase/corpus.hpp"
#include "erase/costmodel.hpp"
#include "erase/errors.hpp"
#include "erase/selectors.hpp"
#include "erase/snapshot.hpp"
#include "erase/unlearn_engine.hpp"
#include "erase/verify_suite.hpp"

namespace erase::cli {
namespace {

using nlohmann::json;

struct Options {
  std::string dataset;
  std::string embeddings;
  std::string snapshot;
  std::string stream;
  std::string out;
  std::string report;
  std::string config;
  std::string strategy = "erase";
  std::size_t k = 4;
  double epsilon = 0.05;
  std::size_t iters = 10;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::size_t dim = 16;
  std::size_t threads = 1;
  std::string phase_cell = "epsilon";
  std::string retrain_policy = "replay";
  std::string format = "binary";
  std::string convention = "expected-half";
  std::vector<std::size_t> sizes;
  std::size_t trials = 0;
  std::size_t instances = 100;
  std::size_t deletions = 0;
  double deletion_fraction = -1.0;
  double spread = -1.0;
  std::size_t components = 4;
  bool json_out = false;
  bool paper_mode = false;
  bool check_prefixes = false;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Corpus load_corpus(const Options& o, bool need_embeddings) {
  if (o.dataset.empty()) throw Error(ErrorCode::InvalidArgument, "--dataset is required");
  Corpus corpus = load_dataset(o.dataset);
  if (!o.embeddings.empty()) {
    corpus = load_embeddings(o.embeddings, std::move(corpus));
  } else if (need_embeddings) {
    throw Error(ErrorCode::MissingEmbedding, "--embeddings is required for this strategy");
  }
  return corpus;
}

QkmConfig qkm_config(const Options& o) {
  if (!(o.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "--epsilon must be > 0");
  QkmConfig c;
  c.k = o.k;
  c.epsilon = o.epsilon;
  c.iters = o.iters;
  c.gamma = o.gamma;
  c.threads = o.threads;
  c.phase_cell = o.phase_cell == "centered" ? PhaseCell::CenteredUnit : PhaseCell::Epsilon;
  c.retrain_policy = o.retrain_policy == "fresh" ? RetrainPolicy::FreshSeed : RetrainPolicy::ReplayRetained;
  return c;
}

void print_ids(std::ostream& out, const std::vector<ExampleId>& ids) {
  out << "selected:";
  for (ExampleId id : ids) out << ' ' << id;
  out << '\n';
}

int cmd_embed(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
  Corpus corpus = test_embed(load_corpus(o, false), o.dim, o.seed);
  if (o.format == "jsonl") {
    save_embeddings_jsonl(corpus, o.out);
  } else {
    save_embeddings_binary(corpus, o.out);
  }
  if (o.json_out) {
    out << json{{"count", corpus.size()}, {"dim", corpus.dim()}, {"path", o.out}}.dump() << '\n';
  } else {
    err << "embedded " << corpus.size() << " examples, dim " << corpus.dim() << '\n';
  }
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const Strategy strategy = strategy_from_string(o.strategy);
  if (o.k == 0) throw Error(ErrorCode::InvalidK, "k must be >= 1");
  const Corpus corpus = load_corpus(o, strategy != Strategy::Random);
  if (o.k > corpus.size()) {
    throw Error(ErrorCode::TooFewExamples,
                "k=" + std::to_string(o.k) + " exceeds " + std::to_string(corpus.size()) + " examples");
  }
  SelectionModel model;
  switch (strategy) {
    case Strategy::Erase: model = select_erase(corpus, qkm_config(o), o.seed); break;
    case Strategy::Acot: model = select_acot(corpus, o.k, o.iters, o.seed, o.threads); break;
    case Strategy::Random: model = select_random(corpus, o.k, o.seed); break;
  }
  if (!o.snapshot.empty()) save_snapshot(model, o.snapshot);
  const json summary = selection_summary(model);
  if (!o.out.empty()) write_text(o.out, summary.dump(2) + "\n");
  if (o.json_out) {
    out << summary.dump() << '\n';
  } else {
    print_ids(out, model.selected);
  }
  (void)err;
  return kOk;
}

void print_histogram(std::ostream& os, const StreamReport& report) {
  std::map<std::string, std::size_t> kinds;
  for (const auto& o : report.outcomes) ++kinds[std::string(to_string(o.kind))];
  os << "requests: " << report.outcomes.size() << '\n';
  for (const auto& [kind, n] : kinds) os << "  " << kind << ": " << n << '\n';
  for (const auto& [cause, n] : report.causes) {
    if (cause != "none") os << "  cause " << cause << ": " << n << '\n';
  }
  os << "final live: " << report.final_live << '\n';
}

int cmd_unlearn(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.snapshot.empty()) throw Error(ErrorCode::InvalidArgument, "--snapshot is required");
  if (o.stream.empty()) throw Error(ErrorCode::InvalidArgument, "--stream is required");
  const SelectionModel model = load_snapshot(o.snapshot);
  const Corpus corpus = load_corpus(o, model.strategy != Strategy::Random);
  const auto requests = load_stream(o.stream);

  StreamOptions options;
  options.unlearn_seed = derive_seed(o.seed, labels::kUnlearn);
  options.record_hashes = o.check_prefixes;
  const StreamResult result = run_stream(model, corpus, requests, options);

  if (!o.out.empty()) save_snapshot(result.model, o.out);
  const std::string report = to_json(result.report).dump(2) + "\n";
  if (!o.report.empty()) write_text(o.report, report);
  if (o.json_out) {
    out << report;
    print_histogram(err, result.report);
  } else {
    print_histogram(out, result.report);
  }

  if (o.check_prefixes) {
    SelectionModel step = model;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      step = parse_snapshot(serialize_snapshot(step));
      StreamOptions one = options;
      one.record_hashes = false;
      step = run_stream(step, corpus, std::span(requests).subspan(i, 1), one).model;
      const std::string h = snapshot_hash(step);
      if (h != result.report.outcomes[i].snapshot_hash) {
        err << "prefix " << i + 1 << ": incremental hash " << h << " differs from "
            << result.report.outcomes[i].snapshot_hash << '\n';
        return kVerifyFailed;
      }
    }
    err << "prefix check: " << requests.size() << " prefixes match\n";
  }
  return kOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  json verdict_json;
  bool passed = false;
  if (o.dataset.empty()) {
    SuiteConfig sc;
    sc.instances = o.instances;
    sc.seed = o.seed;
    if (o.trials > 0) sc.random_trials = o.trials;
    const SuiteResult r = run_verify_suite(sc);
    verdict_json = to_json(r);
    passed = r.passed();
    err << "instances " << r.instances << ", erase deletions " << r.erase_deletions << " (stable "
        << r.stable_replays << ", shift " << r.shift_replays << ", seed " << r.seed_retrains << "), exhaustive victims "
        << r.exhaustive_victims << ", failures " << r.failures.size() + r.certificate_mismatches.size() << '\n';
  } else {
    const Corpus corpus = load_corpus(o, true);
    std::vector<DeletionRequest> requests;
    if (!o.stream.empty()) {
      requests = load_stream(o.stream);
    } else {
      Rng rng(derive_seed(o.seed, labels::kStream));
      requests = sample_uniform_stream(corpus, std::min<std::size_t>(10, corpus.size() - std::min(corpus.size(), o.k)), rng);
    }
    VerifyConfig vc;
    vc.qkm = qkm_config(o);
    vc.root_seed = o.seed;
    vc.random_k = o.k;
    const VerificationVerdict v = verify_exactness(vc, corpus, requests, o.trials > 0 ? o.trials : 2000);
    verdict_json = to_json(v);
    passed = v.passed();
    err << "erase deletions " << v.erase_deletions << ", failures " << v.failures.size() << '\n';
  }
  const std::string text = verdict_json.dump(2) + "\n";
  if (!o.out.empty()) write_text(o.out, text);
  if (o.json_out) {
    out << text;
  } else {
    out << (passed ? "verify: pass" : "verify: FAIL") << '\n';
  }
  return passed ? kOk : kVerifyFailed;
}

int cmd_cost(const Options& o, std::ostream& out, std::ostream& err) {
  BreakEvenReport report;
  if (o.paper_mode) {
    report = published_break_even_report();
  } else {
    if (o.config.empty()) throw Error(ErrorCode::InvalidArgument, "--config or --paper-mode is required");
    json j;
    try {
      j = json::parse(read_text(o.config));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, o.config + ": " + e.what());
    }
    const json& list = j.is_object() && j.contains("scenarios") ? j["scenarios"] : j;
    if (!list.is_array()) throw Error(ErrorCode::ParseError, o.config + ": expected an array of scenarios");
    std::vector<CostScenario> scenarios;
    for (const auto& s : list) scenarios.push_back(scenario_from_json(s));

    if (!o.dataset.empty()) {
      // Fill in token lengths the scenarios leave unset from the corpus and,
      // when given, the snapshot's selection.
      const Corpus corpus = load_dataset(o.dataset);
      std::vector<ExampleId> selection;
      if (!o.snapshot.empty()) selection = load_snapshot(o.snapshot).selected;
      const TokenStats ts = token_stats(corpus, selection);
      for (auto& s : scenarios) {
        if (s.avg_input_tokens == 0.0) s.avg_input_tokens = ts.avg_input_tokens;
        if (s.avg_example_tokens == 0.0) s.avg_example_tokens = ts.avg_example_tokens;
      }
    }
    report = scenario_break_even_report(scenarios, sisa_convention_from_string(o.convention));
  }
  const std::string text = to_json(report).dump(2) + "\n";
  if (!o.out.empty()) write_text(o.out, text);
  if (o.json_out) {
    out << text;
  } else {
    out << to_table(report);
  }
  (void)err;
  return kOk;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
  BenchConfig c;
  if (!o.sizes.empty()) c.sizes = o.sizes;
  if (o.trials > 0) c.trials = o.trials;
  if (o.deletions > 0) c.deletions_per_trial = o.deletions;
  if (o.deletion_fraction >= 0.0) c.deletion_fraction = o.deletion_fraction;
  if (o.spread > 0.0) c.mixture.spread = o.spread;
  if (!(o.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "--epsilon must be > 0");
  c.mixture.dim = o.dim;
  c.mixture.components = o.components;
  c.qkm = qkm_config(o);
  c.seed = o.seed;
  for (std::size_t s : c.sizes) {
    if (s <= c.qkm.k) throw Error(ErrorCode::TooFewExamples, "size " + std::to_string(s) + " <= k");
  }
  const BenchResult r = run_bench(c);
  const std::string csv = to_csv(r);
  if (!o.out.empty()) write_text(o.out, csv);
  if (o.json_out) {
    out << to_json(r).dump(2) << '\n';
  } else if (o.out.empty()) {
    out << csv;
  }
  if (r.fit_valid) {
    err << "log-log slope of retrain fraction: " << r.loglog.slope << '\n';
  } else {
    err << "log-log slope undefined (fewer than two sizes with retrains)\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Example selection with exact unlearning"};
  app.require_subcommand(1);
  Options o;

  auto add_data = [&](CLI::App* c) {
    c->add_option("--dataset", o.dataset, "JSON-lines dataset");
    c->add_option("--embeddings", o.embeddings, "embedding file (binary or JSON-lines)");
  };
  auto add_qkm = [&](CLI::App* c) {
    c->add_option("--k", o.k, "number of examples to select")->capture_default_str();
    c->add_option("--epsilon", o.epsilon, "lattice spacing")->capture_default_str();
    c->add_option("--iters", o.iters, "iterations")->capture_default_str();
    c->add_option("--gamma", o.gamma, "smoothing weight")->capture_default_str();
    c->add_option("--threads", o.threads, "assignment threads")->capture_default_str();
    c->add_option("--phase-cell", o.phase_cell, "phase range")->check(CLI::IsMember({"epsilon", "centered"}));
    c->add_option("--retrain-policy", o.retrain_policy, "randomness for a centroid-shift retrain")
        ->check(CLI::IsMember({"replay", "fresh"}));
  };
  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "root seed")->capture_default_str();
    c->add_option("--out", o.out, "output path");
    c->add_flag("--json", o.json_out, "machine-readable stdout");
  };

  auto* embed = app.add_subcommand("embed", "embed a dataset with the hashing test embedder");
  add_data(embed);
  add_common(embed);
  embed->add_option("--dim", o.dim, "embedding dimension")->required();
  embed->get_option("--seed")->required();
  embed->add_option("--format", o.format, "output format")->check(CLI::IsMember({"binary", "jsonl"}));

  std::vector<CLI::App*> trainers;
  for (const char* name : {"train", "select"}) {
    auto* c = app.add_subcommand(name, "train a selector and write its snapshot");
    add_data(c);
    add_qkm(c);
    add_common(c);
    c->add_option("--strategy", o.strategy, "erase, acot or random")
        ->check(CLI::IsMember({"erase", "acot", "random"}));
    c->add_option("--snapshot", o.snapshot, "snapshot output path");
    trainers.push_back(c);
  }

  auto* unlearn = app.add_subcommand("unlearn", "apply a deletion stream to a snapshot");
  add_data(unlearn);
  add_common(unlearn);
  unlearn->add_option("--snapshot", o.snapshot, "input snapshot")->required();
  unlearn->add_option("--stream", o.stream, "deletion stream")->required();
  unlearn->add_option("--report", o.report, "stream report output path");
  unlearn->add_flag("--check-prefixes", o.check_prefixes, "replay each prefix through serialized snapshots");

  auto* verify = app.add_subcommand("verify", "check unlearning exactness");
  add_data(verify);
  add_qkm(verify);
  add_common(verify);
  verify->add_option("--stream", o.stream, "deletion stream");
  verify->add_option("--trials", o.trials, "trials for the distributional check");
  verify->add_option("--instances", o.instances, "random instances (default suite)")->capture_default_str();

  auto* cost = app.add_subcommand("cost", "break-even analysis");
  add_common(cost);
  cost->add_flag("--paper-mode", o.paper_mode, "use the published per-task FLOPS");
  cost->add_option("--config", o.config, "scenario JSON");
  cost->add_option("--dataset", o.dataset, "dataset for token statistics");
  cost->add_option("--snapshot", o.snapshot, "snapshot whose selection sets example length");
  cost->add_option("--convention", o.convention, "SISA unlearning cost")
      ->check(CLI::IsMember({"expected-half", "per-shard"}));

  auto* bench = app.add_subcommand("bench", "deletion scaling benchmark");
  add_qkm(bench);
  add_common(bench);
  bench->add_option("--sizes", o.sizes, "dataset sizes")->delimiter(',');
  bench->add_option("--trials", o.trials, "datasets per size");
  bench->add_option("--dim", o.dim, "dimension")->capture_default_str();
  bench->add_option("--deletions", o.deletions, "minimum deletions per dataset");
  bench->add_option("--deletion-fraction", o.deletion_fraction, "deletions per dataset as a fraction of its size");
  bench->add_option("--spread", o.spread, "mixture standard deviation");
  bench->add_option("--components", o.components, "mixture components")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (embed->parsed()) return cmd_embed(o, out, err);
    for (auto* c : trainers) {
      if (c->parsed()) return cmd_train(o, out, err);
    }
    if (unlearn->parsed()) return cmd_unlearn(o, out, err);
    if (verify->parsed()) return cmd_verify(o, out, err);
    if (cost->parsed()) return cmd_cost(o, out, err);
    if (bench->parsed()) return cmd_bench(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::DeadVictim ? kStreamError : kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace erase::cli
