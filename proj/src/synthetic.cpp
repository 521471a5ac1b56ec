#include "erase/synthetic.hpp"

#include <string>

#include "erase/errors.hpp"

namespace erase {

Corpus gaussian_mixture(const MixtureSpec& spec, Seed seed) {
  if (spec.size == 0 || spec.dim == 0 || spec.components == 0) {
    throw Error(ErrorCode::InvalidArgument, "mixture size, dim and components must be >= 1");
  }
  Rng rng(seed);
  std::vector<double> centers(spec.components * spec.dim);
  for (auto& c : centers) c = rng.uniform01() * spec.center_range;

  std::vector<Example> examples;
  std::vector<EmbeddedExample> rows;
  examples.reserve(spec.size);
  rows.reserve(spec.size);
  for (std::size_t i = 0; i < spec.size; ++i) {
    const ExampleId id = i + 1;
    const std::size_t comp = rng.uniform_below(spec.components);
    EmbeddedExample row{id, std::vector<float>(spec.dim)};
    for (std::size_t j = 0; j < spec.dim; ++j) {
      row.vector[j] = static_cast<float>(centers[comp * spec.dim + j] + spec.spread * rng.normal());
    }
    std::string text = "sample-" + std::to_string(id);
    examples.push_back({id, text, "c" + std::to_string(comp), 1, 1});
    rows.push_back(std::move(row));
  }
  Corpus corpus(std::move(examples));
  corpus.set_embeddings(std::move(rows));
  return corpus;
}

}  // namespace erase
