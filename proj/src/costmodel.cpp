#include "erase/costmodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "erase/errors.hpp"

namespace erase {
namespace {

using nlohmann::json;

constexpr std::array<PublishedTask, 4> kPublishedTasks = {{
    {"WinoWhy", 71e12, 14e12, 13.5e9, 54.2e9, 42.1e9, 55.5e9, 70.4e9},
    {"Timedial", 70e12, 14e12, 78.6e9, 314.4e9, 238.1e9, 323.7e9, 395.5e9},
    {"Sports Understanding", 71e12, 14e12, 7.0e9, 27.9e9, 20.7e9, 27.6e9, 34.5e9},
    {"Logical Fallacy Detection", 70e12, 14e12, 14.9e9, 59.7e9, 46.1e9, 61.5e9, 76.7e9},
}};

// As printed, including the Timedial row's "x 10^2" exponent.
constexpr std::array<PublishedBreakEven, 4> kPublishedBreakEven = {{
    {"WinoWhy", 1.4e3, 2.5e3, 1.7e3, 1.2e3},
    {"Timedial", 0.2e2, 0.4e2, 0.3e2, 0.2e2},
    {"Sports Understanding", 2.7e3, 5.2e3, 3.4e3, 2.6e3},
    {"Logical Fallacy Detection", 1.3e3, 2.2e3, 1.5e3, 1.1e3},
}};

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be finite and >= 0");
  }
}

BreakEvenEntry entry(std::string method, double u, double i, double u_base, double i_base) {
  BreakEvenEntry e{std::move(method), u, i, std::nullopt};
  if (i != i_base) e.break_even = break_even(u, i, u_base, i_base);
  return e;
}

}  // namespace

std::string_view to_string(SisaConvention c) {
  return c == SisaConvention::ExpectedHalf ? "expected-half" : "per-shard";
}

SisaConvention sisa_convention_from_string(std::string_view s) {
  if (s == "expected-half") return SisaConvention::ExpectedHalf;
  if (s == "per-shard") return SisaConvention::PerShardTrain;
  throw Error(ErrorCode::InvalidArgument, "unknown SISA convention '" + std::string(s) + "'");
}

std::string method_name(const Method& m) {
  if (const auto* s = std::get_if<Sisa>(&m)) return std::to_string(s->shards) + "-SISA";
  return std::to_string(std::get<InContext>(m).shots) + "-shot";
}

void validate(const CostScenario& s) {
  if (const auto* sisa = std::get_if<Sisa>(&s.method); sisa && sisa->shards == 0) {
    throw Error(ErrorCode::InvalidShards, "SISA needs at least one shard");
  }
  require_nonnegative(s.train_flops_full, "train_flops_full");
  require_nonnegative(s.per_token_flops, "per_token_flops");
  require_nonnegative(s.avg_input_tokens, "avg_input_tokens");
  require_nonnegative(s.avg_example_tokens, "avg_example_tokens");
  require_nonnegative(s.unlearn_flops_in_context, "unlearn_flops_in_context");
}

CostScenario scenario_from_json(const json& j) {
  try {
    CostScenario s;
    s.name = j.value("name", "");
    const auto& m = j.at("method");
    if (m.contains("sisa")) {
      s.method = Sisa{m.at("sisa").get<std::uint32_t>()};
    } else if (m.contains("in_context")) {
      s.method = InContext{m.at("in_context").get<std::uint32_t>()};
    } else {
      throw Error(ErrorCode::ParseError, "method must be {\"sisa\": n} or {\"in_context\": k}");
    }
    s.train_flops_full = j.at("train_flops_full").get<double>();
    s.per_token_flops = j.value("per_token_flops", kLlamaPerTokenFlops);
    s.avg_input_tokens = j.value("avg_input_tokens", 0.0);
    s.avg_example_tokens = j.value("avg_example_tokens", 0.0);
    s.unlearn_flops_in_context = j.value("unlearn_flops_in_context", 0.0);
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("cost scenario: ") + e.what());
  }
}

double sisa_unlearn_flops(double train_flops_full, std::uint32_t shards, SisaConvention convention) {
  if (shards == 0) throw Error(ErrorCode::InvalidShards, "SISA needs at least one shard");
  require_nonnegative(train_flops_full, "train_flops_full");
  const double per_shard = train_flops_full / static_cast<double>(shards);
  return convention == SisaConvention::ExpectedHalf ? per_shard / 2.0 : per_shard;
}

double unlearn_op_flops(const CostScenario& s, SisaConvention convention) {
  validate(s);
  if (const auto* sisa = std::get_if<Sisa>(&s.method)) {
    return sisa_unlearn_flops(s.train_flops_full, sisa->shards, convention);
  }
  return s.unlearn_flops_in_context;
}

double inference_flops(const CostScenario& s) {
  validate(s);
  if (const auto* sisa = std::get_if<Sisa>(&s.method)) {
    return static_cast<double>(sisa->shards) * s.per_token_flops * (1.0 + s.avg_input_tokens);
  }
  const double k = std::get<InContext>(s.method).shots;
  return s.per_token_flops * (1.0 + s.avg_input_tokens + k * s.avg_example_tokens);
}

double break_even(double unlearn_m, double inference_m, double unlearn_base, double inference_base) {
  if (inference_base == inference_m) {
    throw Error(ErrorCode::UndefinedBreakEven, "method and baseline have equal inference cost");
  }
  return (unlearn_m - unlearn_base) / (inference_base - inference_m);
}

double normalized_aggregate_score(double raw, double low, double high) {
  if (high == low) throw Error(ErrorCode::DegenerateRange, "high score equals low score");
  return 100.0 * (raw - low) / (high - low);
}

double calibrate_input_tokens(double inference_1sisa, double per_token_flops) {
  return inference_1sisa / per_token_flops - 1.0;
}

double calibrate_example_tokens(double inference_kshot, std::uint32_t shots, double avg_input_tokens,
                                double per_token_flops) {
  if (shots == 0) throw Error(ErrorCode::InvalidArgument, "need at least one shot to calibrate");
  return (inference_kshot / per_token_flops - 1.0 - avg_input_tokens) / static_cast<double>(shots);
}

std::string assemble_prompt(const Corpus& corpus, std::span<const ExampleId> selection, std::string_view query,
                            const PromptTemplate& tmpl) {
  std::string out;
  for (ExampleId id : selection) {
    const Example& ex = corpus.example(id);
    out += tmpl.input_marker + " " + ex.input + " " + tmpl.output_marker + " " + ex.output + " ";
  }
  out += tmpl.input_marker + " ";
  out += query;
  return out;
}

TokenStats token_stats(const Corpus& corpus, std::span<const ExampleId> selection, const PromptTemplate& tmpl,
                       std::span<const ExampleId> eval_ids) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "token statistics of an empty corpus");
  TokenStats stats;
  double total = 0.0;
  if (eval_ids.empty()) {
    for (const auto& ex : corpus.examples()) total += static_cast<double>(ex.input_tokens);
    stats.avg_input_tokens = total / static_cast<double>(corpus.size());
  } else {
    for (ExampleId id : eval_ids) total += static_cast<double>(corpus.example(id).input_tokens);
    stats.avg_input_tokens = total / static_cast<double>(eval_ids.size());
  }
  auto formatted = [&](const Example& ex) {
    return static_cast<double>(ex.input_tokens + ex.output_tokens + tmpl.framing_tokens);
  };
  total = 0.0;
  if (selection.empty()) {
    for (const auto& ex : corpus.examples()) total += formatted(ex);
    stats.avg_example_tokens = total / static_cast<double>(corpus.size());
  } else {
    for (ExampleId id : selection) total += formatted(corpus.example(id));
    stats.avg_example_tokens = total / static_cast<double>(selection.size());
  }
  return stats;
}

std::span<const PublishedTask> published_tasks() { return kPublishedTasks; }
std::span<const PublishedBreakEven> published_break_even() { return kPublishedBreakEven; }

BreakEvenReport published_break_even_report() {
  BreakEvenReport report{"published", "published", {}};
  for (const auto& t : kPublishedTasks) {
    BreakEvenTask task{std::string(t.name), t.unlearn_1sisa, t.infer_1sisa, {}};
    task.entries.push_back(entry("4-SISA", t.unlearn_4sisa, t.infer_4sisa, t.unlearn_1sisa, t.infer_1sisa));
    task.entries.push_back(entry("2-shot", 0.0, t.infer_2shot, t.unlearn_1sisa, t.infer_1sisa));
    task.entries.push_back(entry("3-shot", 0.0, t.infer_3shot, t.unlearn_1sisa, t.infer_1sisa));
    task.entries.push_back(entry("4-shot", 0.0, t.infer_4shot, t.unlearn_1sisa, t.infer_1sisa));
    report.tasks.push_back(std::move(task));
  }
  return report;
}

BreakEvenReport scenario_break_even_report(std::span<const CostScenario> scenarios, SisaConvention convention) {
  BreakEvenReport report{"scenarios", std::string(to_string(convention)), {}};
  for (const auto& s : scenarios) {
    CostScenario base = s;
    base.method = Sisa{1};
    const double u_base = unlearn_op_flops(base, convention);
    const double i_base = inference_flops(base);
    const std::string name = s.name.empty() ? "default" : s.name;
    BreakEvenTask* task = nullptr;
    for (auto& t : report.tasks) {
      if (t.task == name) task = &t;
    }
    if (task == nullptr) {
      report.tasks.push_back({name, u_base, i_base, {}});
      task = &report.tasks.back();
    }
    task->entries.push_back(entry(method_name(s.method), unlearn_op_flops(s, convention), inference_flops(s), u_base, i_base));
  }
  return report;
}

json to_json(const BreakEvenReport& report) {
  json tasks = json::array();
  for (const auto& t : report.tasks) {
    json entries = json::array();
    for (const auto& e : t.entries) {
      entries.push_back({{"method", e.method},
                         {"unlearn_flops", e.unlearn_flops},
                         {"inference_flops", e.inference_flops},
                         {"break_even", e.break_even ? json(*e.break_even) : json(nullptr)}});
    }
    tasks.push_back({{"task", t.task},
                     {"baseline", {{"method", "1-SISA"}, {"unlearn_flops", t.baseline_unlearn}, {"inference_flops", t.baseline_inference}}},
                     {"entries", std::move(entries)}});
  }
  return {{"report", "break_even"}, {"version", 1}, {"source", report.source}, {"sisa_convention", report.convention}, {"tasks", std::move(tasks)}};
}

std::string to_table(const BreakEvenReport& report) {
  std::vector<std::string> methods;
  for (const auto& t : report.tasks) {
    for (const auto& e : t.entries) {
      if (std::find(methods.begin(), methods.end(), e.method) == methods.end()) methods.push_back(e.method);
    }
  }
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s", "Method");
  out << buf;
  for (const auto& t : report.tasks) {
    std::snprintf(buf, sizeof buf, " %27s", t.task.c_str());
    out << buf;
  }
  out << '\n';
  for (const auto& m : methods) {
    std::snprintf(buf, sizeof buf, "%-10s", m.c_str());
    out << buf;
    for (const auto& t : report.tasks) {
      std::string cell = "-";
      for (const auto& e : t.entries) {
        if (e.method != m) continue;
        if (e.break_even) {
          std::snprintf(buf, sizeof buf, "%.1e (%.1f)", *e.break_even, *e.break_even);
          cell = buf;
        } else {
          cell = "undefined";
        }
      }
      std::snprintf(buf, sizeof buf, " %27s", cell.c_str());
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace erase
