#include "erase/lattice.hpp"

#include <cmath>
#include <string>

#include "erase/errors.hpp"

namespace erase {

LatticeSpec sample_phase(std::size_t dim, double epsilon, Seed phase_seed, PhaseCell cell) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be a positive finite number");
  }
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be >= 1");
  LatticeSpec spec;
  spec.epsilon = epsilon;
  spec.seed_tag = phase_seed;
  spec.cell = cell;
  spec.theta.resize(dim);
  Rng rng(phase_seed);
  for (auto& t : spec.theta) {
    const double u = rng.uniform01();
    t = cell == PhaseCell::Epsilon ? u * epsilon : u - 0.5;
    // u * epsilon can round up to epsilon when u is within one ulp of 1.
    if (cell == PhaseCell::Epsilon && t >= epsilon) t = std::nextafter(epsilon, 0.0);
  }
  return spec;
}

double quantize_coord(double x, double epsilon, double theta) noexcept {
  return epsilon * std::round((x - theta) / epsilon) + theta;
}

void quantize_into(std::span<const double> point, const LatticeSpec& spec, std::span<double> out) {
  if (point.size() != spec.dim() || out.size() != spec.dim()) {
    throw Error(ErrorCode::DimMismatch, "point dim " + std::to_string(point.size()) +
                                            " vs lattice dim " + std::to_string(spec.dim()));
  }
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (!std::isfinite(point[i])) throw Error(ErrorCode::NonFiniteInput, "coordinate " + std::to_string(i));
    out[i] = quantize_coord(point[i], spec.epsilon, spec.theta[i]);
  }
}

std::vector<double> quantize(std::span<const double> point, const LatticeSpec& spec) {
  std::vector<double> out(point.size());
  quantize_into(point, spec, out);
  return out;
}

}  // namespace erase
