#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dictminimax/config.hpp"

namespace dictminimax {

/// One CSV row. trial == std::nullopt marks the per-grid-point aggregate
/// ("mean"); mse_std_error is only set on aggregate rows.
struct ResultRow {
  std::string experiment_id;
  std::string dictionary_kind;
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t s = 0;
  double snr_db = 0.0;
  std::size_t n_samples = 0;
  std::optional<std::size_t> trial;
  double mse = 0.0;
  std::optional<double> mse_std_error;
  double bound_value = 0.0;
  bool bound_conditions_met = false;
  std::uint64_t seed = 0;

  [[nodiscard]] bool is_aggregate() const { return !trial.has_value(); }
};

struct RunOptions {
  std::size_t threads = 1;
  std::filesystem::path base_dir;  // resolves relative dictionary file paths
};

/// Random stream for one (series, grid point) cell. The stream id is the
/// experiment-scoped counter series_index * grid_size + grid_index.
Rng grid_point_rng(std::uint64_t master_seed, std::size_t series_index, std::size_t grid_index,
                   std::size_t grid_size);

/// MSE-vs-N sweep. Series are (dictionary, snr) in config order; within a
/// series, grid points in n_grid order, each as its trial rows followed by
/// the aggregate row. Rows are appended to `rows` as each grid point
/// completes, so a thrown exception leaves the finished prefix in place.
void run_mse_curve(const ExperimentConfig& config, const RunOptions& options,
                   std::vector<ResultRow>& rows);

/// Least-squares slope of log2(mse) against log2(N) over aggregate rows.
double loglog_slope(const std::vector<ResultRow>& series_rows);

}  // namespace dictminimax
