#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "erase/corpus.hpp"

namespace erase {

// Measured forward-pass FLOPS per context token for LLaMA-7B.
inline constexpr double kLlamaPerTokenFlops = 264'996'864.0;

// How a SISA unlearning request is costed from the full training cost.
enum class SisaConvention {
  ExpectedHalf,   // train_full / (2n): half of one shard's run, in expectation
  PerShardTrain,  // train_full / n: one shard's full run
};

std::string_view to_string(SisaConvention c);
SisaConvention sisa_convention_from_string(std::string_view s);

struct Sisa {
  std::uint32_t shards = 1;
};
struct InContext {
  std::uint32_t shots = 0;
};
using Method = std::variant<Sisa, InContext>;

std::string method_name(const Method& m);  // "1-SISA", "2-shot"

struct CostScenario {
  std::string name;  // task label, optional
  Method method = Sisa{1};
  double train_flops_full = 0.0;
  double per_token_flops = kLlamaPerTokenFlops;
  double avg_input_tokens = 0.0;
  // Whole formatted example including the Input:/Output: markers.
  double avg_example_tokens = 0.0;
  double unlearn_flops_in_context = 0.0;
};

// Throws InvalidArgument on negative quantities or zero shards.
void validate(const CostScenario& s);
CostScenario scenario_from_json(const nlohmann::json& j);

// Throws InvalidShards when n == 0.
double sisa_unlearn_flops(double train_flops_full, std::uint32_t shards,
                          SisaConvention convention = SisaConvention::ExpectedHalf);
double unlearn_op_flops(const CostScenario& s, SisaConvention convention = SisaConvention::ExpectedHalf);
// n * p * (1 + t) for n-SISA, p * (1 + t + k * s) for k shots.
double inference_flops(const CostScenario& s);

// Inferences per unlearning request at which a method costs the same as the
// baseline: (U_m - U_base) / (I_base - I_m). Throws UndefinedBreakEven when
// the inference costs coincide.
double break_even(double unlearn_m, double inference_m, double unlearn_base, double inference_base);

// 100 * (raw - low) / (high - low). Throws DegenerateRange when high == low.
double normalized_aggregate_score(double raw, double low, double high);

// Cost of one d-dimensional squared distance (subtract, multiply, add).
inline double distance_eval_flops(std::size_t dim) { return 3.0 * static_cast<double>(dim); }

// Token inverse of the linear inference model.
double calibrate_input_tokens(double inference_1sisa, double per_token_flops = kLlamaPerTokenFlops);
double calibrate_example_tokens(double inference_kshot, std::uint32_t shots, double avg_input_tokens,
                                double per_token_flops = kLlamaPerTokenFlops);

struct PromptTemplate {
  std::string input_marker = "Input:";
  std::string output_marker = "Output:";
  // Marker tokens per formatted example under the whitespace tokenizer.
  std::uint64_t framing_tokens = 2;
};

// "Input: <in> Output: <out> ... Input: <query>"
std::string assemble_prompt(const Corpus& corpus, std::span<const ExampleId> selection, std::string_view query,
                            const PromptTemplate& tmpl = {});

struct TokenStats {
  double avg_input_tokens = 0.0;
  double avg_example_tokens = 0.0;
};

// avg_input_tokens over `eval_ids` (the whole corpus when empty);
// avg_example_tokens over `selection` (the whole corpus when empty).
// Throws EmptyCorpus.
TokenStats token_stats(const Corpus& corpus, std::span<const ExampleId> selection, const PromptTemplate& tmpl = {},
                       std::span<const ExampleId> eval_ids = {});

// Published per-task unlearning and inference FLOPS.
struct PublishedTask {
  std::string_view name;
  double unlearn_1sisa;
  double unlearn_4sisa;
  double infer_1sisa;
  double infer_4sisa;
  double infer_2shot;
  double infer_3shot;
  double infer_4shot;
};
std::span<const PublishedTask> published_tasks();

// Published break-even values (4-SISA, 2-, 3-, 4-shot) per task, exactly as
// printed.
struct PublishedBreakEven {
  std::string_view name;
  double sisa4;
  double shot2;
  double shot3;
  double shot4;
};
std::span<const PublishedBreakEven> published_break_even();

struct BreakEvenEntry {
  std::string method;
  double unlearn_flops = 0.0;
  double inference_flops = 0.0;
  std::optional<double> break_even;  // empty when undefined
};

struct BreakEvenTask {
  std::string task;
  double baseline_unlearn = 0.0;
  double baseline_inference = 0.0;
  std::vector<BreakEvenEntry> entries;
};

struct BreakEvenReport {
  std::string source;       // "published" or "scenarios"
  std::string convention;   // SISA unlearning convention used
  std::vector<BreakEvenTask> tasks;
};

BreakEvenReport published_break_even_report();
// Each scenario is compared with 1-SISA built from its own training cost,
// per-token cost and input length.
BreakEvenReport scenario_break_even_report(std::span<const CostScenario> scenarios, SisaConvention convention);

nlohmann::json to_json(const BreakEvenReport& report);
std::string to_table(const BreakEvenReport& report);

}  // namespace erase
