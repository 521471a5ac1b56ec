#include "erase/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "erase/errors.hpp"

namespace erase {
namespace {

double upper_tail(double statistic, std::size_t dof) {
  if (dof == 0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(dof) / 2.0, statistic / 2.0);
}

}  // namespace

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs) {
  if (observed.size() != probs.size() || observed.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "chi-square needs matching category counts (>= 2)");
  }
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = total * probs[i];
    if (expected <= 0.0) throw Error(ErrorCode::InvalidArgument, "chi-square category with zero expectation");
    const double diff = static_cast<double>(observed[i]) - expected;
    r.statistic += diff * diff / expected;
  }
  r.dof = observed.size() - 1;
  r.p_value = upper_tail(r.statistic, r.dof);
  return r;
}

ChiSquareResult chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "contingency rows differ in length");
  double total_a = 0.0;
  double total_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    total_a += static_cast<double>(a[i]);
    total_b += static_cast<double>(b[i]);
  }
  const double total = total_a + total_b;
  ChiSquareResult r;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = static_cast<double>(a[i] + b[i]);
    if (col == 0.0) continue;
    ++kept;
    const double ea = col * total_a / total;
    const double eb = col * total_b / total;
    const double da = static_cast<double>(a[i]) - ea;
    const double db = static_cast<double>(b[i]) - eb;
    r.statistic += da * da / ea + db * db / eb;
  }
  r.dof = kept > 0 ? kept - 1 : 0;
  r.p_value = upper_tail(r.statistic, r.dof);
  return r;
}

double chi_square_critical(std::size_t dof, double alpha) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need >= 2 points to fit");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error(ErrorCode::InvalidArgument, "degenerate x values");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace erase
