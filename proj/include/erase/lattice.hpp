#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "erase/rng.hpp"

namespace erase {

// Where the random phase is drawn from. Both choices give the same family of
// quantizers up to a lattice translation; the default keeps theta inside one
// fundamental cell of the epsilon-grid.
enum class PhaseCell {
  Epsilon,       // theta_i ~ U[0, epsilon)
  CenteredUnit,  // theta_i ~ U[-1/2, 1/2)
};

// The grid epsilon * Z^d + theta.
struct LatticeSpec {
  double epsilon = 0.0;
  std::vector<double> theta;
  Seed seed_tag = 0;  // seed of the stream that produced theta
  PhaseCell cell = PhaseCell::Epsilon;

  std::size_t dim() const { return theta.size(); }
  bool operator==(const LatticeSpec&) const = default;
};

LatticeSpec sample_phase(std::size_t dim, double epsilon, Seed phase_seed,
                         PhaseCell cell = PhaseCell::Epsilon);

// Nearest grid coordinate, ties rounded away from zero on the scaled value.
double quantize_coord(double x, double epsilon, double theta) noexcept;

// Throws NonFiniteInput / DimMismatch.
std::vector<double> quantize(std::span<const double> point, const LatticeSpec& spec);
void quantize_into(std::span<const double> point, const LatticeSpec& spec, std::span<double> out);

}  // namespace erase
