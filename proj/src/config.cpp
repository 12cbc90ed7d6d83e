#include "dictminimax/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace dictminimax {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out = "invalid experiment config:";
  for (const auto& line : lines) out += "\n  " + line;
  return out;
}

std::string_view trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string_view> split_list(std::string_view value) {
  value = trim(value);
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
    value = trim(value.substr(1, value.size() - 2));
  }
  std::vector<std::string_view> items;
  while (!value.empty()) {
    const auto comma = value.find(',');
    items.push_back(trim(value.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    value = value.substr(comma + 1);
  }
  return items;
}

std::size_t parse_size(std::string_view text) {
  text = trim(text);
  std::size_t value = 0;
  const auto caret = text.find('^');
  if (caret != std::string_view::npos) {
    const std::size_t base = parse_size(text.substr(0, caret));
    const std::size_t exponent = parse_size(text.substr(caret + 1));
    if (exponent >= 64) throw std::invalid_argument("exponent too large");
    value = 1;
    for (std::size_t i = 0; i < exponent; ++i) {
      if (value > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(base, 1)) {
        throw std::invalid_argument("integer overflow");
      }
      value *= base;
    }
    return value;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_u64(std::string_view text) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("expected an unsigned 64-bit integer, got '" + std::string(text) +
                                "'");
  }
  return value;
}

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() ||
      !std::isfinite(value)) {
    throw std::invalid_argument("expected a finite number, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(text) + "'");
}

DictionarySpec parse_dictionary(std::string_view text) {
  text = trim(text);
  if (text == "identity") return {DictionaryKind::identity, {}};
  if (text == "dirac_hadamard") return {DictionaryKind::dirac_hadamard, {}};
  constexpr std::string_view prefix = "file:";
  std::string_view path = text.substr(0, prefix.size()) == prefix ? text.substr(prefix.size()) : text;
  path = trim(path);
  if (path.empty()) throw std::invalid_argument("empty dictionary path");
  return {DictionaryKind::file, std::filesystem::path(std::string(path))};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_lines(problems)), problems_(std::move(problems)) {}

std::string DictionarySpec::label() const {
  switch (kind) {
    case DictionaryKind::identity: return "identity";
    case DictionaryKind::dirac_hadamard: return "dirac_hadamard";
    case DictionaryKind::file: return "file:" + path.stem().string();
  }
  return "unknown";
}

std::optional<std::size_t> DictionarySpec::atom_count(std::size_t m) const {
  switch (kind) {
    case DictionaryKind::identity: return m;
    case DictionaryKind::dirac_hadamard: return 2 * m;
    case DictionaryKind::file: return std::nullopt;
  }
  return std::nullopt;
}

Dictionary load_dictionary_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dictionary file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      try {
        row.push_back(parse_double(token));
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_number) + ": " +
                                 e.what());
      }
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                               ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("dictionary file " + path.string() + " is empty");
  Eigen::MatrixXd entries(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  if (max_column_norm_deviation(entries) > 1e-6) {
    throw std::runtime_error("dictionary file " + path.string() +
                             " has columns that are not unit-norm");
  }
  return Dictionary::from_columns(std::move(entries));
}

Dictionary build_dictionary(const DictionarySpec& spec, std::size_t m,
                            const std::filesystem::path& base_dir) {
  switch (spec.kind) {
    case DictionaryKind::identity: return make_identity_dictionary(m);
    case DictionaryKind::dirac_hadamard: return make_dirac_hadamard_dictionary(m);
    case DictionaryKind::file: {
      const auto path = spec.path.is_absolute() || base_dir.empty() ? spec.path : base_dir / spec.path;
      Dictionary dict = load_dictionary_file(path);
      if (dict.signal_dim() != m) {
        throw std::domain_error("dictionary file " + path.string() + " has " +
                                std::to_string(dict.signal_dim()) + " rows, expected m=" +
                                std::to_string(m));
      }
      return dict;
    }
  }
  throw std::domain_error("unknown dictionary kind");
}

const char* to_string(LearnerKind kind) {
  return kind == LearnerKind::itkm ? "itkm" : "oracle_ls";
}

double ExperimentConfig::noise_sigma(double series_snr_db) const {
  if (sigma) return *sigma;
  return sigma_a * std::pow(10.0, -series_snr_db / 20.0);
}

double ExperimentConfig::radius(std::size_t atom_count) const {
  return r.value_or(1.0 / std::sqrt(static_cast<double>(atom_count)));
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::vector<std::string> problems;
  std::map<std::string, std::size_t, std::less<>> seen;  // key -> line

  using Handler = std::function<void(std::string_view)>;
  const std::map<std::string, Handler, std::less<>> handlers = {
      {"experiment.id",
       [&](std::string_view v) {
         v = trim(v);
         if (v.empty() || v.find_first_of(",\"\n") != std::string_view::npos) {
           throw std::invalid_argument("id must be non-empty without commas or quotes");
         }
         config.experiment_id = std::string(v);
       }},
      {"model.m", [&](std::string_view v) { config.m = parse_size(v); }},
      {"model.p", [&](std::string_view v) { config.p = parse_size(v); }},
      {"model.s", [&](std::string_view v) { config.s = parse_size(v); }},
      {"model.sigma_a", [&](std::string_view v) { config.sigma_a = parse_double(v); }},
      {"model.sigma", [&](std::string_view v) { config.sigma = parse_double(v); }},
      {"model.snr_db",
       [&](std::string_view v) {
         for (const auto item : split_list(v)) config.snr_db.push_back(parse_double(item));
       }},
      {"model.r", [&](std::string_view v) { config.r = parse_double(v); }},
      {"model.dictionary",
       [&](std::string_view v) {
         for (const auto item : split_list(v)) config.dictionaries.push_back(parse_dictionary(item));
       }},
      {"experiment.n_grid",
       [&](std::string_view v) {
         for (const auto item : split_list(v)) config.n_grid.push_back(parse_size(item));
       }},
      {"experiment.trials", [&](std::string_view v) { config.trials = parse_size(v); }},
      {"experiment.master_seed", [&](std::string_view v) { config.master_seed = parse_u64(v); }},
      {"experiment.learner",
       [&](std::string_view v) {
         v = trim(v);
         if (v == "itkm") {
           config.learner = LearnerKind::itkm;
         } else if (v == "oracle_ls") {
           config.learner = LearnerKind::oracle_ls;
         } else {
           throw std::invalid_argument("learner must be itkm or oracle_ls");
         }
       }},
      {"itkm.s_tilde", [&](std::string_view v) { config.itkm.s_tilde = parse_size(v); }},
      {"itkm.iterations", [&](std::string_view v) { config.itkm.iterations = parse_size(v); }},
      {"itkm.tolerance", [&](std::string_view v) { config.itkm.tolerance = parse_double(v); }},
      {"itkm.init",
       [&](std::string_view v) {
         v = trim(v);
         if (v == "oracle") {
           config.itkm.init = ItkmInit::oracle;
         } else if (v == "reference") {
           config.itkm.init = ItkmInit::reference;
         } else if (v == "random-in-ball" || v == "random_in_ball") {
           config.itkm.init = ItkmInit::random_in_ball;
         } else {
           throw std::invalid_argument("init must be oracle, reference or random-in-ball");
         }
       }},
      {"itkm.normalize_signals",
       [&](std::string_view v) { config.itkm.normalize_signals = parse_bool(v); }},
      {"bound.c0", [&](std::string_view v) { config.c0 = parse_double(v); }},
      {"output.csv_path", [&](std::string_view v) { config.csv_path = std::string(trim(v)); }},
      {"output.svg_path", [&](std::string_view v) { config.svg_path = std::string(trim(v)); }},
  };

  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_number;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_number);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back(where + ": expected 'key = value', got '" + std::string(line) + "'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto handler = handlers.find(key);
    if (handler == handlers.end()) {
      problems.push_back(where + ": unknown key '" + key + "'");
      continue;
    }
    if (const auto previous = seen.find(key); previous != seen.end()) {
      problems.push_back(where + ": duplicate key '" + key + "' (first set on line " +
                         std::to_string(previous->second) + ")");
      continue;
    }
    seen.emplace(key, line_number);
    try {
      handler->second(value);
    } catch (const std::exception& e) {
      problems.push_back(where + ": key '" + key + "': " + e.what());
    }
  }

  for (const char* required : {"model.m", "model.s", "model.dictionary", "experiment.n_grid"}) {
    if (!seen.contains(required)) problems.push_back(std::string("missing required key '") + required + "'");
  }
  const bool has_snr = seen.contains("model.snr_db");
  const bool has_sigma = seen.contains("model.sigma");
  if (!has_snr && !has_sigma) {
    problems.push_back("missing required key 'model.snr_db' (or 'model.sigma')");
  } else if (has_snr && has_sigma) {
    problems.push_back("line " + std::to_string(seen["model.sigma"]) +
                       ": key 'model.sigma' conflicts with 'model.snr_db'; set only one");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));

  auto at = [&](const char* key) { return "line " + std::to_string(seen[key]) + ": key '" + key + "': "; };

  if (config.m == 0) problems.push_back(at("model.m") + "must be >= 1");
  if (config.s == 0 || config.s > config.m) problems.push_back(at("model.s") + "must satisfy 1 <= s <= m");
  if (!(config.sigma_a > 0.0)) {
    problems.push_back((seen.contains("model.sigma_a") ? at("model.sigma_a") : std::string("model.sigma_a: ")) +
                       "must be > 0");
  }
  if (has_sigma) {
    if (!(*config.sigma > 0.0)) {
      problems.push_back(at("model.sigma") + "must be > 0");
    } else {
      config.snr_db = {snr_to_db((config.sigma_a / *config.sigma) * (config.sigma_a / *config.sigma))};
    }
  }
  if (config.r && !(*config.r > 0.0)) problems.push_back(at("model.r") + "must be > 0");
  if (config.n_grid.empty()) problems.push_back(at("experiment.n_grid") + "must list at least one N");
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    if (config.n_grid[i] == 0) problems.push_back(at("experiment.n_grid") + "values must be >= 1");
    if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]) {
      problems.push_back(at("experiment.n_grid") + "values must be strictly increasing");
      break;
    }
  }
  if (config.trials < 2) {
    problems.push_back(at("experiment.trials") + "must be >= 2");
  }
  if (!(config.c0 > 0.0)) problems.push_back(at("bound.c0") + "must be > 0");
  if (config.itkm.iterations == 0) problems.push_back(at("itkm.iterations") + "must be >= 1");
  if (!(config.itkm.tolerance >= 0.0)) problems.push_back(at("itkm.tolerance") + "must be >= 0");

  for (const auto& spec : config.dictionaries) {
    const auto atoms = spec.atom_count(config.m);
    if (spec.kind == DictionaryKind::dirac_hadamard && config.m > 0 &&
        (config.m < 2 || (config.m & (config.m - 1)) != 0)) {
      problems.push_back(at("model.dictionary") + "dirac_hadamard needs m to be a power of two");
    }
    if (config.p && atoms && *atoms != *config.p) {
      problems.push_back(at("model.p") + "p=" + std::to_string(*config.p) + " does not match " +
                         spec.label() + " with p=" + std::to_string(*atoms));
    }
    if (atoms && (config.itkm.s_tilde == 0 || config.itkm.s_tilde > *atoms)) {
      problems.push_back((seen.contains("itkm.s_tilde") ? at("itkm.s_tilde") : std::string("itkm.s_tilde: ")) +
                         "must satisfy 1 <= s_tilde <= p");
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return config;
}

}  // namespace dictminimax
