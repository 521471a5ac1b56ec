#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erase/rng.hpp"

namespace erase {

using ExampleId = std::uint64_t;

struct Example {
  ExampleId id = 0;
  std::string input;
  std::string output;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;

  bool operator==(const Example&) const = default;
};

struct EmbeddedExample {
  ExampleId id = 0;
  std::vector<float> vector;
};

// Splits on Unicode whitespace (UTF-8 input). Invalid UTF-8 bytes are kept
// inside tokens.
std::vector<std::string_view> whitespace_tokens(std::string_view text);
std::uint64_t whitespace_token_count(std::string_view text);

// Dense row-major view of a set of embedded examples, ids ascending.
struct PointSet {
  std::vector<ExampleId> ids;
  std::vector<float> data;
  std::size_t dim = 0;

  std::size_t size() const { return ids.size(); }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

// Examples indexed by id, optionally carrying one embedding per example.
// Read-only once built.
class Corpus {
 public:
  Corpus() = default;
  // Validates unique ids; sorts by id.
  explicit Corpus(std::vector<Example> examples);

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  std::size_t dim() const { return dim_; }
  bool has_embeddings() const { return dim_ > 0; }

  std::span<const Example> examples() const { return examples_; }
  std::vector<ExampleId> ids() const;
  bool contains(ExampleId id) const;
  // Throws UnknownId.
  std::size_t index_of(ExampleId id) const;
  const Example& example(ExampleId id) const { return examples_[index_of(id)]; }

  // Requires embeddings.
  std::span<const float> embedding(ExampleId id) const;
  std::span<const float> embedding_at(std::size_t index) const {
    return {matrix_.data() + index * dim_, dim_};
  }

  // Replaces all embeddings. Rows must cover exactly the example ids.
  void set_embeddings(std::vector<EmbeddedExample> rows);

  PointSet points() const;
  // Restricted to `ids` (any order; result is ascending). Throws UnknownId.
  PointSet points(std::span<const ExampleId> ids) const;

 private:
  std::vector<Example> examples_;
  std::vector<float> matrix_;
  std::size_t dim_ = 0;
};

Corpus load_dataset(const std::filesystem::path& path);
void save_dataset(const Corpus& corpus, const std::filesystem::path& path);

// Detects the binary format by its magic; otherwise parses JSON-lines.
Corpus load_embeddings(const std::filesystem::path& path, Corpus corpus);
void save_embeddings_binary(const Corpus& corpus, const std::filesystem::path& path);
void save_embeddings_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Bag-of-hashed-tokens embedding with unit l2 norm. Used when no encoder is
// available; the empty bag maps to the first basis vector.
Corpus test_embed(Corpus corpus, std::size_t dim, Seed seed);
std::vector<float> test_embed_text(std::string_view text, std::size_t dim, Seed seed);

}  // namespace erase
