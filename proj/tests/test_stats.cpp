#include <doctest.h>

#include <cmath>
#include <vector>

#include "erase/errors.hpp"
#include "erase/stats.hpp"

using namespace erase;

TEST_CASE("goodness of fit statistic") {
  const std::vector<std::uint64_t> obs = {10, 20, 30};
  const std::vector<double> probs = {0.2, 0.3, 0.5};
  // Expected 12, 18, 30.
  const auto r = chi_square_gof(obs, probs);
  CHECK(r.statistic == doctest::Approx(4.0 / 12 + 4.0 / 18));
  CHECK(r.dof == 2);
  // Upper tail of chi2(2) is exp(-x / 2).
  CHECK(r.p_value == doctest::Approx(std::exp(-r.statistic / 2)));
}

TEST_CASE("homogeneity drops empty categories") {
  const std::vector<std::uint64_t> a = {10, 0, 10};
  const std::vector<std::uint64_t> b = {10, 0, 10};
  const auto r = chi_square_homogeneity(a, b);
  CHECK(r.statistic == doctest::Approx(0.0));
  CHECK(r.dof == 1);
  CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("homogeneity on a textbook table") {
  // 2 x 2 table [[20, 30], [30, 20]]: expected 25 everywhere, statistic 4.
  const std::vector<std::uint64_t> a = {20, 30};
  const std::vector<std::uint64_t> b = {30, 20};
  CHECK(chi_square_homogeneity(a, b).statistic == doctest::Approx(4.0));
}

TEST_CASE("critical values") {
  CHECK(chi_square_critical(14, 0.01) == doctest::Approx(29.1412).epsilon(1e-4));
  CHECK(chi_square_critical(9, 0.01) == doctest::Approx(21.6660).epsilon(1e-4));
  CHECK(chi_square_critical(1, 0.05) == doctest::Approx(3.8415).epsilon(1e-4));
}

TEST_CASE("least squares recovers a line") {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {3, 5, 7, 9};
  const auto f = least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
}
