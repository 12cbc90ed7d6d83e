#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dictminimax/experiment.hpp"

namespace dictminimax {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvHeader =
    "experiment_id,dictionary_kind,m,p,s,snr_db,n_samples,trial,mse,mse_std_error,"
    "bound_value,bound_conditions_met,seed";

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// Header plus one LF-terminated line per row. Trial rows leave
/// mse_std_error empty; aggregate rows write "mean" in the trial column.
std::string format_csv(const std::vector<ResultRow>& rows);

/// log2(N) vs log2(mse) plot: one solid polyline (class "series") per
/// (dictionary_kind, snr_db) over the aggregate rows, and a dashed polyline
/// (class "bound") with the bound value for the same series.
std::string render_svg(const std::vector<ResultRow>& rows);

/// Throw std::domain_error for empty rows and IoError when the file cannot be written.
void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
void emit_plot_svg(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

}  // namespace dictminimax
