#include "dictminimax/experiment.hpp"

#include <cmath>
#include <stdexcept>

#include "dictminimax/info_bounds.hpp"
#include "dictminimax/learners.hpp"

namespace dictminimax {

Rng grid_point_rng(std::uint64_t master_seed, std::size_t series_index, std::size_t grid_index,
                   std::size_t grid_size) {
  const auto stream = static_cast<std::uint64_t>(series_index * grid_size + grid_index);
  return Rng(GeneratorSeed{master_seed, stream});
}

void run_mse_curve(const ExperimentConfig& config, const RunOptions& options,
                   std::vector<ResultRow>& rows) {
  const std::size_t grid_size = config.n_grid.size();
  std::size_t series_index = 0;
  for (const auto& spec : config.dictionaries) {
    const Dictionary truth = build_dictionary(spec, config.m, options.base_dir);
    const std::size_t p = truth.atom_count();
    const double r = config.radius(p);
    for (const double snr_db : config.snr_db) {
      const double sigma = config.noise_sigma(snr_db);
      Learner learner;
      if (config.learner == LearnerKind::itkm) {
        config.itkm.validate(p);
        learner = [settings = config.itkm, &truth](const ObservationBatch& batch, Rng& rng) {
          const Dictionary init = make_itkm_init(settings, truth, batch.config, rng);
          return itkm_learn(batch, settings, init);
        };
      } else {
        learner = [](const ObservationBatch& batch, Rng&) {
          return oracle_ls_learn(batch).dictionary;
        };
      }

      for (std::size_t grid_index = 0; grid_index < grid_size; ++grid_index) {
        const std::size_t n = config.n_grid[grid_index];
        // Oracle setting: the reference D0 is the generating dictionary.
        const ProblemConfig problem = make_problem_config(truth, config.s, config.sigma_a, sigma, r, n);
        const BoundReport bound =
            theorem1_bound(BoundParameters{config.m, p, config.s, snr_from_db(snr_db), n, r});
        const Rng cell_rng = grid_point_rng(config.master_seed, series_index, grid_index, grid_size);
        const MseEstimate estimate =
            empirical_mse(problem, truth, learner, config.trials, cell_rng, options.threads);

        ResultRow base;
        base.experiment_id = config.experiment_id;
        base.dictionary_kind = spec.label();
        base.m = config.m;
        base.p = p;
        base.s = config.s;
        base.snr_db = snr_db;
        base.n_samples = n;
        base.bound_value = bound.value;
        base.bound_conditions_met = bound.conditions_met;

        for (std::size_t t = 0; t < config.trials; ++t) {
          ResultRow row = base;
          row.trial = t;
          row.mse = estimate.per_trial[t];
          row.seed = cell_rng.split(t).key();
          rows.push_back(std::move(row));
        }
        ResultRow aggregate = base;
        aggregate.mse = estimate.mean;
        aggregate.mse_std_error = estimate.std_error;
        aggregate.seed = config.master_seed;
        rows.push_back(std::move(aggregate));
      }
      ++series_index;
    }
  }
}

double loglog_slope(const std::vector<ResultRow>& series_rows) {
  std::vector<std::pair<double, double>> points;
  for (const auto& row : series_rows) {
    if (row.is_aggregate() && row.mse > 0.0) {
      points.emplace_back(std::log2(static_cast<double>(row.n_samples)), std::log2(row.mse));
    }
  }
  if (points.size() < 2) throw std::domain_error("slope needs at least two aggregate points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [x, y] : points) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (sxx == 0.0) throw std::domain_error("slope needs distinct N values");
  return sxy / sxx;
}

}  // namespace dictminimax
