#pragma once

#include <cstdint>
#include <span>

namespace erase {

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of observed counts against category probabilities.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs);

// Two-sample homogeneity test on a 2 x K contingency table. Categories with
// zero total are dropped; dof = (#kept categories - 1).
ChiSquareResult chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

// Upper-tail critical value: P(X > c) = alpha for X ~ chi2(dof).
double chi_square_critical(std::size_t dof, double alpha);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace erase
