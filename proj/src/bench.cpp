#include "erase/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "erase/errors.hpp"
#include "erase/selectors.hpp"
#include "erase/unlearn_engine.hpp"

namespace erase {

BenchResult run_bench(const BenchConfig& config) {
  if (config.sizes.empty() || config.trials == 0 || !(config.deletion_fraction >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bench needs at least one size and one trial");
  }
  BenchResult result;
  std::vector<double> xs, ys;
  for (std::size_t size : config.sizes) {
    BenchRow row;
    row.size = size;
    row.trials = config.trials;
    double cert_total = 0.0;
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const Seed trial_seed =
          derive_seed(config.seed, "bench:" + std::to_string(size) + ":" + std::to_string(trial));
      MixtureSpec mix = config.mixture;
      mix.size = size;
      const Corpus corpus = gaussian_mixture(mix, derive_seed(trial_seed, "data"));
      const SelectionModel model = select_erase(corpus, config.qkm, derive_seed(trial_seed, "model"));
      Rng stream_rng(derive_seed(trial_seed, labels::kStream));
      std::size_t m = std::max<std::size_t>(
          config.deletions_per_trial,
          static_cast<std::size_t>(std::ceil(config.deletion_fraction * static_cast<double>(size))));
      m = std::min(m, size > config.qkm.k ? size - config.qkm.k : 0);
      const auto requests = sample_uniform_stream(corpus, m, stream_rng);
      const auto run = run_stream(model, corpus, requests, {.unlearn_seed = derive_seed(trial_seed, labels::kUnlearn)});
      for (const auto& o : run.report.outcomes) {
        ++row.deletions;
        cert_total += static_cast<double>(o.certificate_evals);
        row.certificate_evals_max = std::max(row.certificate_evals_max, o.certificate_evals);
        if (o.kind == OutcomeKind::Retrained) {
          ++row.retrains;
          if (o.cause == RetrainCause::SeedHit) ++row.seed_hits;
          if (o.cause == RetrainCause::CentroidShift) ++row.centroid_shifts;
        } else {
          row.stable_evals_max = std::max(row.stable_evals_max, o.distance_evals);
        }
      }
    }
    if (row.deletions > 0) {
      row.retrain_fraction = static_cast<double>(row.retrains) / static_cast<double>(row.deletions);
      row.certificate_evals_mean = cert_total / static_cast<double>(row.deletions);
    }
    if (row.retrains > 0) {
      xs.push_back(std::log(static_cast<double>(size)));
      ys.push_back(std::log(row.retrain_fraction));
    }
    result.rows.push_back(row);
  }
  if (xs.size() >= 2) {
    result.loglog = least_squares(xs, ys);
    result.fit_valid = true;
  }
  return result;
}

std::string to_csv(const BenchResult& result) {
  std::ostringstream out;
  out << "size,trials,deletions,retrains,seed_hits,centroid_shifts,retrain_fraction,"
         "certificate_evals_mean,certificate_evals_max,stable_evals_max\n";
  char buf[64];
  for (const auto& r : result.rows) {
    out << r.size << ',' << r.trials << ',' << r.deletions << ',' << r.retrains << ',' << r.seed_hits << ','
        << r.centroid_shifts << ',';
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", r.retrain_fraction, r.certificate_evals_mean);
    out << buf << ',' << r.certificate_evals_max << ',' << r.stable_evals_max << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const BenchResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"size", r.size},
                    {"trials", r.trials},
                    {"deletions", r.deletions},
                    {"retrains", r.retrains},
                    {"seed_hits", r.seed_hits},
                    {"centroid_shifts", r.centroid_shifts},
                    {"retrain_fraction", r.retrain_fraction},
                    {"certificate_evals_mean", r.certificate_evals_mean},
                    {"certificate_evals_max", r.certificate_evals_max},
                    {"stable_evals_max", r.stable_evals_max}});
  }
  nlohmann::json out = {{"report", "bench"}, {"version", 1}, {"rows", std::move(rows)}};
  if (result.fit_valid) out["loglog_slope"] = result.loglog.slope;
  return out;
}

}  // namespace erase
