#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dictminimax/core_model.hpp"
#include "dictminimax/learners.hpp"

namespace dictminimax {

/// Parse or validation failure; message lists every problem, one per line,
/// each naming the line number (when known) and the key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);

  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class DictionaryKind { identity, dirac_hadamard, file };

struct DictionarySpec {
  DictionaryKind kind = DictionaryKind::identity;
  std::filesystem::path path;  // only for DictionaryKind::file

  /// Value of the dictionary_kind CSV column: "identity", "dirac_hadamard" or
  /// "file:<stem>".
  [[nodiscard]] std::string label() const;
  /// Atom count for signal dimension m; std::nullopt for files.
  [[nodiscard]] std::optional<std::size_t> atom_count(std::size_t m) const;
};

/// Builds the dictionary. Relative file paths resolve against base_dir.
Dictionary build_dictionary(const DictionarySpec& spec, std::size_t m,
                            const std::filesystem::path& base_dir = {});

/// Reads a whitespace- or comma-separated matrix, one row per line, '#'
/// comments allowed. Columns must be unit-norm to 1e-6; they are then
/// renormalized exactly. Throws std::runtime_error on I/O or format problems.
Dictionary load_dictionary_file(const std::filesystem::path& path);

enum class LearnerKind { itkm, oracle_ls };

const char* to_string(LearnerKind kind);

struct ExperimentConfig {
  std::string experiment_id = "mse_curve";

  // model.*
  std::size_t m = 0;
  std::optional<std::size_t> p;
  std::size_t s = 0;
  double sigma_a = 1.0;
  std::optional<double> sigma;  // set instead of snr_db
  std::vector<double> snr_db;   // one series per value (single value if sigma is set)
  std::optional<double> r;      // defaults to 1/sqrt(p) per series
  std::vector<DictionarySpec> dictionaries;

  // experiment.*
  std::vector<std::size_t> n_grid;
  std::size_t trials = 50;
  std::uint64_t master_seed = 1;
  LearnerKind learner = LearnerKind::itkm;

  // itkm.*
  ItkmSettings itkm;

  // bound.*
  double c0 = 1.0;

  // output.*
  std::string csv_path;
  std::string svg_path;

  /// Noise standard deviation for a series at the given SNR.
  [[nodiscard]] double noise_sigma(double series_snr_db) const;
  /// Radius for a dictionary with p atoms.
  [[nodiscard]] double radius(std::size_t atom_count) const;
};

/// Parses line-oriented `key = value` text with '#' comments and dotted keys.
///
/// Required: model.m, model.s, model.dictionary, experiment.n_grid and exactly
/// one of model.snr_db / model.sigma. Lists are comma separated, optionally in
/// brackets; integers in n_grid may be written 2^k. Unknown and duplicate keys
/// are errors. All problems are collected into one ConfigError.
ExperimentConfig parse_config(std::string_view text);

}  // namespace dictminimax
