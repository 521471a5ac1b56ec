#pragma once

#include <cstddef>

#include "erase/corpus.hpp"
#include "erase/rng.hpp"

namespace erase {

// Isotropic Gaussian mixture used by the scaling benchmarks and the
// verification drivers. Component means are uniform in [0, center_range]^dim.
struct MixtureSpec {
  std::size_t size = 1024;
  std::size_t dim = 16;
  std::size_t components = 4;
  double spread = 0.01;
  double center_range = 1.0;
};

// Ids are 1..size; input text is "sample-<id>".
Corpus gaussian_mixture(const MixtureSpec& spec, Seed seed);

}  // namespace erase
