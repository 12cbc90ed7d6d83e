#include "dictminimax/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dictminimax/config.hpp"
#include "dictminimax/core_model.hpp"
#include "dictminimax/experiment.hpp"
#include "dictminimax/info_bounds.hpp"
#include "dictminimax/parallel.hpp"
#include "dictminimax/report_io.hpp"
#include "dictminimax/rng.hpp"

namespace dictminimax {

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}

  void put(const std::string& key, const std::string& value) { out_ << key << ',' << value << '\n'; }
  void put(const std::string& key, double value) { put(key, format_double(value)); }
  void put(const std::string& key, std::size_t value) { put(key, std::to_string(value)); }
  void put(const std::string& key, bool value) { put(key, std::string(value ? "true" : "false")); }
  void put(const std::string& key, const char* value) { put(key, std::string(value)); }
  void hash(const std::string& key, std::uint64_t value) {
    std::ostringstream text;
    text << std::hex;
    text.width(16);
    text.fill('0');
    text << value;
    put(key, text.str());
  }

 private:
  std::ostream& out_;
};

struct ModelFlags {
  std::optional<std::size_t> m;
  std::optional<std::size_t> p;
  std::size_t s = 1;
  double sigma_a = 1.0;
  std::optional<double> snr_db;
  std::optional<double> sigma;
  std::size_t n = 1;
  std::optional<double> r;
  std::string dictionary = "identity";
  std::string dictionary_file;
  std::uint64_t seed = 1;
};

void add_reference_flags(CLI::App& cmd, ModelFlags& flags) {
  cmd.add_option("--m", flags.m, "signal dimension")->check(CLI::PositiveNumber);
  cmd.add_option("--p", flags.p, "number of atoms")->check(CLI::PositiveNumber);
  cmd.add_option("--dictionary", flags.dictionary, "reference dictionary")
      ->check(CLI::IsMember({"identity", "dirac_hadamard", "random"}));
  cmd.add_option("--dictionary-file", flags.dictionary_file, "reference dictionary from a matrix file")
      ->check(CLI::ExistingFile);
  cmd.add_option("--r", flags.r, "neighborhood radius (default 1/sqrt(p))")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", flags.seed, "master seed");
}

void add_noise_flags(CLI::App& cmd, ModelFlags& flags) {
  cmd.add_option("--s", flags.s, "sparsity")->check(CLI::PositiveNumber);
  cmd.add_option("--sigma-a", flags.sigma_a, "coefficient standard deviation")->check(CLI::PositiveNumber);
  auto* snr = cmd.add_option("--snr-db", flags.snr_db, "signal-to-noise ratio in dB");
  auto* sigma = cmd.add_option("--sigma", flags.sigma, "noise standard deviation")->check(CLI::PositiveNumber);
  snr->excludes(sigma);
  cmd.add_option("--n", flags.n, "number of observations")->check(CLI::PositiveNumber);
}

Dictionary reference_dictionary(const ModelFlags& flags) {
  if (!flags.dictionary_file.empty()) {
    Dictionary dict = load_dictionary_file(flags.dictionary_file);
    if ((flags.m && *flags.m != dict.signal_dim()) || (flags.p && *flags.p != dict.atom_count())) {
      throw UsageError("--m/--p disagree with the dictionary file shape");
    }
    return dict;
  }
  if (flags.dictionary == "identity") {
    const std::size_t m = flags.m.value_or(flags.p.value_or(0));
    if (m == 0) throw UsageError("identity dictionary needs --m or --p");
    if (flags.p && *flags.p != m) throw UsageError("identity dictionary needs p = m");
    return make_identity_dictionary(m);
  }
  if (flags.dictionary == "dirac_hadamard") {
    if (!flags.m) throw UsageError("dirac_hadamard dictionary needs --m");
    if (flags.p && *flags.p != 2 * *flags.m) throw UsageError("dirac_hadamard dictionary needs p = 2m");
    return make_dirac_hadamard_dictionary(*flags.m);
  }
  if (!flags.m || !flags.p) throw UsageError("random dictionary needs --m and --p");
  Rng rng(GeneratorSeed{flags.seed, 0xD1C7ULL});
  return make_random_dictionary(*flags.m, *flags.p, rng);
}

ProblemConfig problem_from_flags(const ModelFlags& flags, const Dictionary& reference,
                                 double default_snr_db) {
  const std::size_t p = reference.atom_count();
  const double r = flags.r.value_or(1.0 / std::sqrt(static_cast<double>(p)));
  double sigma = 0.0;
  if (flags.sigma) {
    sigma = *flags.sigma;
  } else {
    sigma = flags.sigma_a * std::pow(10.0, -flags.snr_db.value_or(default_snr_db) / 20.0);
  }
  return make_problem_config(reference, flags.s, flags.sigma_a, sigma, r, flags.n);
}

void print_conditions(Report& report, const BoundReport& bound) {
  for (const auto& check : bound.condition_details) {
    report.put("condition." + check.name + ".lhs", check.lhs);
    report.put("condition." + check.name + ".rhs", check.rhs);
    report.put("condition." + check.name + ".passed", check.passed);
  }
}

void print_mi(Report& report, const MiBoundReport& mi) {
  report.put("mi_bound_nats", mi.upper_bound_nats);
  report.put("mi_bound_bits", mi.upper_bound_bits());
  report.put("mi_support_expectation", to_string(mi.support_expectation_mode));
  report.put("mi_supports_evaluated", mi.supports_evaluated);
  report.put("mi_std_error_nats", mi.std_error_nats);
}

int cmd_bound(Report& report, std::size_t m, std::size_t p, std::size_t s, double snr_db, std::size_t n,
              std::optional<double> r) {
  BoundParameters params{m, p, s, snr_from_db(snr_db), n,
                         r.value_or(1.0 / std::sqrt(static_cast<double>(p)))};
  const BoundReport bound = theorem1_bound(params);
  report.put("value", bound.value);
  report.put("branch", to_string(bound.branch));
  report.put("radius_term", bound.radius_term);
  report.put("sample_size_term", bound.sample_size_term);
  report.put("snr", params.snr);
  report.put("r", params.r);
  report.put("log_base", bound.log_base);
  report.put("conditions_met", bound.conditions_met);
  print_conditions(report, bound);
  return kExitOk;
}

int cmd_check_conditions(Report& report, std::size_t m, std::size_t p, std::size_t s, std::optional<double> r,
                         double c0) {
  if (s > p) throw UsageError("--s must not exceed --p");
  const double radius = r.value_or(1.0 / std::sqrt(static_cast<double>(p)));
  // SNR and N do not enter the validity conditions.
  const BoundReport bound = theorem1_bound(BoundParameters{m, p, s, 1.0, 1, radius});
  report.put("conditions_met", bound.conditions_met);
  print_conditions(report, bound);
  report.put("cs_condition.c0", c0);
  report.put("cs_condition.rhs", c0 * static_cast<double>(s) * std::log(static_cast<double>(p) / static_cast<double>(s)));
  report.put("cs_condition.passed", cs_condition(m, p, s, c0));
  report.put("packing_cardinality", lemma1_cardinality(p));
  report.put("proof_chain", proof_chain_check(p, std::exp(static_cast<double>(p) / 32.0)));
  return kExitOk;
}

int cmd_packing(Report& report, std::ostream& err, const ModelFlags& flags, std::optional<double> epsilon_flag,
                std::optional<std::size_t> L_flag, std::size_t attempts, bool verify) {
  const Dictionary reference = reference_dictionary(flags);
  const std::size_t p = reference.atom_count();
  const double r = flags.r.value_or(1.0 / std::sqrt(static_cast<double>(p)));
  const double epsilon = epsilon_flag.value_or(r * r / 32.0);
  const std::size_t L = L_flag.value_or(lemma1_cardinality(p));
  if (epsilon <= 0.0) throw UsageError("--epsilon must be positive");

  Rng rng(GeneratorSeed{flags.seed, 0});
  Rng packing_rng = rng.split(0);
  const PackingResult packing = build_packing(reference, r, epsilon, L, attempts, packing_rng);

  report.put("m", reference.signal_dim());
  report.put("p", p);
  report.put("r", r);
  report.put("epsilon", epsilon);
  report.put("target_size", packing.target_size);
  report.put("size", packing.ensemble.size());
  report.put("attempts", packing.attempts);
  report.put("complete", packing.complete);
  report.put("required_separation", packing.required_separation);
  report.put("separation", packing.ensemble.separation());
  report.put("separation_margin", packing.ensemble.separation() - packing.required_separation);
  report.hash("ensemble_hash", packing.ensemble.fingerprint());
  if (!packing.complete) {
    err << "packing infeasible: " << packing.ensemble.size() << " of " << packing.target_size
        << " members after " << packing.attempts << " attempts\n";
    return kExitPackingInfeasible;
  }
  if (verify) {
    const ProblemConfig config = problem_from_flags(flags, reference, 20.0);
    if (config.s > p) throw UsageError("--s must not exceed p");
    const SupportCodec codec(p, config.s);
    Rng mi_rng = rng.split(1);
    const Lemma1Check check = verify_lemma1_desiderata(packing.ensemble, config, epsilon, codec, mi_rng);
    report.put("sigma", config.sigma);
    report.put("n_samples", config.n_samples);
    print_mi(report, check.mi);
    report.put("eta", check.eta);
    report.put("mi_margin", check.mi_margin);
    report.put("separation_ok", check.separation_ok);
    report.put("mi_ok", check.mi_ok);
    report.put("desiderata_met", check.passed());
  }
  return kExitOk;
}

int cmd_instance_bound(Report& report, const ModelFlags& flags, std::size_t L, std::size_t attempts,
                       std::size_t steps) {
  const Dictionary reference = reference_dictionary(flags);
  const ProblemConfig config = problem_from_flags(flags, reference, 20.0);
  if (config.s > config.p) throw UsageError("--s must not exceed p");
  Rng rng(GeneratorSeed{flags.seed, 0});
  InstanceBoundOptions options;
  options.bisection_steps = steps;
  const InstanceBound result = instance_bound_search(config, L, attempts, rng, options);

  report.put("m", config.m);
  report.put("p", config.p);
  report.put("s", config.s);
  report.put("sigma", config.sigma);
  report.put("n_samples", config.n_samples);
  report.put("r", config.r);
  report.put("target_size", L);
  report.put("epsilon", result.epsilon);
  report.put("certified", result.certified);
  report.put("threshold_bits", result.threshold_bits);
  print_mi(report, result.mi);
  report.put("probes", result.probes);
  report.put("certified_probes", result.certified_probes);
  if (result.ensemble) {
    report.put("separation", result.ensemble->separation());
    report.hash("ensemble_hash", result.ensemble->fingerprint());
  }
  if (!result.diagnostics.empty()) report.put("diagnostics", result.diagnostics);
  return kExitOk;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

int cmd_mse_curve(std::ostream& out, std::ostream& err, const std::string& config_path,
                  const std::string& csv_flag, const std::string& svg_flag, std::optional<std::size_t> threads) {
  const ExperimentConfig config = parse_config(read_text(config_path));
  const std::string csv_path = csv_flag.empty() ? config.csv_path : csv_flag;
  const std::string svg_path = svg_flag.empty() ? config.svg_path : svg_flag;

  RunOptions options;
  options.threads = threads.value_or(configured_thread_count());
  if (options.threads == 0) options.threads = configured_thread_count();
  options.base_dir = std::filesystem::path(config_path).parent_path();

  std::vector<ResultRow> rows;
  auto flush = [&] {
    if (rows.empty()) return;
    if (csv_path.empty()) {
      out << format_csv(rows);
    } else {
      emit_csv(rows, csv_path);
    }
    if (!svg_path.empty()) emit_plot_svg(rows, svg_path);
  };
  try {
    run_mse_curve(config, options, rows);
  } catch (...) {
    try {
      flush();
      if (!rows.empty()) err << "wrote " << rows.size() << " rows before aborting\n";
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
    }
    throw;
  }
  flush();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dictionary-learning minimax bounds workbench", "dictminimax"};
  app.require_subcommand(1);

  // bound
  std::size_t bound_m = 0;
  std::size_t bound_p = 0;
  std::size_t bound_s = 0;
  double bound_snr_db = 0.0;
  std::size_t bound_n = 0;
  std::optional<double> bound_r;
  auto* bound = app.add_subcommand("bound", "evaluate the closed-form minimax lower bound");
  bound->add_option("--m", bound_m, "signal dimension")->required()->check(CLI::PositiveNumber);
  bound->add_option("--p", bound_p, "number of atoms")->required()->check(CLI::PositiveNumber);
  bound->add_option("--s", bound_s, "sparsity")->required()->check(CLI::PositiveNumber);
  bound->add_option("--snr-db", bound_snr_db, "signal-to-noise ratio in dB")->required();
  bound->add_option("--n", bound_n, "number of observations")->required()->check(CLI::PositiveNumber);
  bound->add_option("--r", bound_r, "neighborhood radius (default 1/sqrt(p))")->check(CLI::PositiveNumber);

  // check-conditions
  std::size_t cc_m = 0;
  std::size_t cc_p = 0;
  std::size_t cc_s = 0;
  std::optional<double> cc_r;
  double cc_c0 = 1.0;
  auto* check = app.add_subcommand("check-conditions", "report the bound's validity conditions");
  check->add_option("--m", cc_m, "signal dimension")->required()->check(CLI::PositiveNumber);
  check->add_option("--p", cc_p, "number of atoms")->required()->check(CLI::PositiveNumber);
  check->add_option("--s", cc_s, "sparsity")->required()->check(CLI::PositiveNumber);
  check->add_option("--r", cc_r, "neighborhood radius (default 1/sqrt(p))")->check(CLI::PositiveNumber);
  check->add_option("--c0", cc_c0, "constant in m >= c0 s ln(p/s)")->check(CLI::PositiveNumber);

  // packing
  ModelFlags packing_flags;
  std::optional<double> packing_epsilon;
  std::optional<std::size_t> packing_L;
  std::size_t packing_attempts = 100000;
  auto* packing = app.add_subcommand("packing", "build a separated ensemble around a reference dictionary");
  add_reference_flags(*packing, packing_flags);
  add_noise_flags(*packing, packing_flags);
  packing->add_option("--epsilon", packing_epsilon, "risk level (default r^2/32)")->check(CLI::PositiveNumber);
  packing->add_option("--L", packing_L, "ensemble size (default floor(e^{p/32}))")->check(CLI::Range(2UL, SIZE_MAX));
  packing->add_option("--attempts", packing_attempts, "rejection sampling budget")->check(CLI::PositiveNumber);
  auto* verify_flag = packing->add_flag("--verify", "also check the mutual information requirement");

  // instance-bound
  ModelFlags instance_flags;
  std::size_t instance_L = 8;
  std::size_t instance_attempts = 10000;
  std::size_t instance_steps = 40;
  auto* instance = app.add_subcommand("instance-bound", "certify an instance-specific minimax lower bound");
  add_reference_flags(*instance, instance_flags);
  add_noise_flags(*instance, instance_flags);
  instance->add_option("--L", instance_L, "ensemble size")->check(CLI::Range(3UL, SIZE_MAX));
  instance->add_option("--attempts", instance_attempts, "rejection sampling budget per probe")
      ->check(CLI::PositiveNumber);
  instance->add_option("--steps", instance_steps, "bisection steps")->check(CLI::PositiveNumber);

  // mse-curve
  std::string curve_config;
  std::string curve_csv;
  std::string curve_svg;
  std::optional<std::size_t> curve_threads;
  auto* curve = app.add_subcommand("mse-curve", "run an MSE-vs-N experiment from a config file");
  curve->add_option("config", curve_config, "experiment config file")->required();
  curve->add_option("--csv", curve_csv, "CSV output path (default: config, else stdout)");
  curve->add_option("--svg", curve_svg, "SVG output path");
  curve->add_option("--threads", curve_threads, "worker threads (0 = auto; default DICTMINIMAX_THREADS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Report report(out);
  try {
    if (*bound) return cmd_bound(report, bound_m, bound_p, bound_s, bound_snr_db, bound_n, bound_r);
    if (*check) return cmd_check_conditions(report, cc_m, cc_p, cc_s, cc_r, cc_c0);
    if (*packing) {
      return cmd_packing(report, err, packing_flags, packing_epsilon, packing_L, packing_attempts,
                         verify_flag->count() > 0);
    }
    if (*instance) {
      return cmd_instance_bound(report, instance_flags, instance_L, instance_attempts, instance_steps);
    }
    return cmd_mse_curve(out, err, curve_config, curve_csv, curve_svg, curve_threads);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error:\n" << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace dictminimax
