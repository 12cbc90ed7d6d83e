#include "dictminimax/info_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace dictminimax {

namespace {

/// Cholesky factor and log-determinant of an SPD covariance.
struct GaussianFactor {
  Eigen::MatrixXd lower;
  double log_det = 0.0;
};

GaussianFactor factor_known_spd(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("Cholesky factorization failed on a conditional covariance", 0.0, 0.0);
  }
  GaussianFactor factor{llt.matrixL(), 0.0};
  factor.log_det = 2.0 * factor.lower.diagonal().array().log().sum();
  return factor;
}

/// KL(N(0, A) || N(0, B)) from Cholesky factors:
/// tr(B^{-1} A) = || L_B^{-1} L_A ||_F^2.
double kl_from_factors(const GaussianFactor& a, const GaussianFactor& b) {
  const Eigen::MatrixXd whitened =
      b.lower.triangularView<Eigen::Lower>().solve(a.lower);
  const auto m = static_cast<double>(a.lower.rows());
  const double kl = 0.5 * (whitened.squaredNorm() - m + b.log_det - a.log_det);
  return std::max(kl, 0.0);
}

void check_spd(const Eigen::MatrixXd& cov, const char* label) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw NumericError(std::string(label) + " is not a non-empty square matrix", 0.0, 0.0);
  }
  if (!cov.allFinite()) {
    throw NumericError(std::string(label) + " has non-finite entries", 0.0, 0.0);
  }
  const double scale = std::max(cov.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericError(std::string(label) + " is not symmetric", 0.0, 0.0);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * hi) || !(hi > 0.0)) {
    std::ostringstream msg;
    msg << label << " is not positive definite (eigenvalues in [" << lo << ", " << hi
        << "], condition limit 1e12)";
    throw NumericError(msg.str(), lo, hi);
  }
}

double positive_finite(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::domain_error(std::string(name) + " must be positive and finite");
  }
  return value;
}

/// Average pairwise KL over all ordered member pairs for one support, i.e.
/// (1/L^2) sum_{l != l'} KL(Sigma^(l) || Sigma^(l')).
double support_pairwise_kl(const Ensemble& ensemble, const Support& support,
                           const ProblemConfig& config) {
  const std::size_t L = ensemble.size();
  std::vector<GaussianFactor> factors;
  factors.reserve(L);
  for (const auto& member : ensemble.members()) {
    factors.push_back(
        factor_known_spd(conditional_covariance(member, support, config.sigma_a, config.sigma)));
  }
  double total = 0.0;
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = 0; b < L; ++b) {
      if (a != b) total += kl_from_factors(factors[a], factors[b]);
    }
  }
  return total / static_cast<double>(L * L);
}

}  // namespace

Eigen::MatrixXd conditional_covariance(const Dictionary& dict, const Support& support,
                                       double sigma_a, double sigma) {
  const Eigen::MatrixXd atoms = dict.restrict_to(support);
  Eigen::MatrixXd cov = (sigma_a * sigma_a) * (atoms * atoms.transpose());
  cov.diagonal().array() += sigma * sigma;
  return cov;
}

double gaussian_kl(const Eigen::MatrixXd& cov_a, const Eigen::MatrixXd& cov_b) {
  check_spd(cov_a, "cov_a");
  check_spd(cov_b, "cov_b");
  if (cov_a.rows() != cov_b.rows()) {
    throw NumericError("covariance dimensions differ", 0.0, 0.0);
  }
  return kl_from_factors(factor_known_spd(cov_a), factor_known_spd(cov_b));
}

const char* to_string(SupportExpectation mode) {
  switch (mode) {
    case SupportExpectation::automatic: return "automatic";
    case SupportExpectation::exact: return "exact";
    case SupportExpectation::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

double MiBoundReport::upper_bound_bits() const { return upper_bound_nats / std::numbers::ln2; }

MiBoundReport mi_upper_bound(const Ensemble& ensemble, const ProblemConfig& config,
                             const SupportCodec& codec, Rng& rng, const MiBoundOptions& options) {
  config.validate();
  if (!(config.sigma > 0.0)) {
    throw std::domain_error("mutual information bound needs sigma > 0");
  }
  if (codec.p() != config.p || codec.s() != config.s) {
    throw std::domain_error("support codec does not match the config");
  }
  for (const auto& member : ensemble.members()) {
    if (member.signal_dim() != config.m || member.atom_count() != config.p) {
      throw std::domain_error("ensemble member shape does not match the config");
    }
  }

  MiBoundReport report;
  const std::size_t L = ensemble.size();
  const std::size_t pairs_per_support = L * (L - 1);
  const auto n = static_cast<double>(config.n_samples);

  bool exact = options.mode == SupportExpectation::exact;
  if (options.mode == SupportExpectation::automatic) {
    exact = codec.count() <= options.exact_threshold;
  }

  if (L < 2) {
    report.support_expectation_mode =
        exact ? SupportExpectation::exact : SupportExpectation::monte_carlo;
    return report;
  }

  if (exact) {
    report.support_expectation_mode = SupportExpectation::exact;
    double sum = 0.0;
    for (std::uint64_t rank = 0; rank < codec.count(); ++rank) {
      sum += support_pairwise_kl(ensemble, codec.unrank(rank), config);
    }
    report.supports_evaluated = static_cast<std::size_t>(codec.count());
    report.upper_bound_nats = n * sum / static_cast<double>(codec.count());
  } else {
    report.support_expectation_mode = SupportExpectation::monte_carlo;
    const std::size_t draws = std::max<std::size_t>(options.monte_carlo_supports, 2);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < draws; ++k) {
      const double term = support_pairwise_kl(ensemble, codec.unrank(rng.below(codec.count())), config);
      const double delta = term - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (term - mean);
    }
    const double variance = m2 / static_cast<double>(draws - 1);
    report.supports_evaluated = draws;
    report.upper_bound_nats = n * mean;
    report.std_error_nats = n * std::sqrt(variance / static_cast<double>(draws));
  }
  report.pairs_evaluated = report.supports_evaluated * pairs_per_support;
  return report;
}

BoundParameters bound_parameters(const ProblemConfig& config) {
  return {config.m, config.p, config.s, config.snr(), config.n_samples, config.r};
}

const char* to_string(BoundBranch branch) {
  return branch == BoundBranch::radius ? "radius" : "sample_size";
}

BoundReport theorem1_bound(const BoundParameters& params) {
  if (params.m == 0 || params.p == 0 || params.s == 0 || params.n_samples == 0) {
    throw std::domain_error("m, p, s and N must be positive");
  }
  if (params.s > params.p) throw std::domain_error("s must not exceed p");
  positive_finite(params.snr, "SNR");
  positive_finite(params.r, "r");

  const auto m = static_cast<double>(params.m);
  const auto p = static_cast<double>(params.p);
  const auto s = static_cast<double>(params.s);
  const auto n = static_cast<double>(params.n_samples);

  BoundReport report;
  report.radius_term = params.r * params.r / 16.0;
  report.sample_size_term = (p * p) / (params.snr * 5120.0 * n * s);
  if (report.radius_term <= report.sample_size_term) {
    report.value = report.radius_term;
    report.branch = BoundBranch::radius;
  } else {
    report.value = report.sample_size_term;
    report.branch = BoundBranch::sample_size;
  }

  const double m_required = 192.0 * s * (9.0 + 2.0 * std::log(p / s));
  const double r_max = 1.0 / std::sqrt(p);
  report.condition_details = {
      {"p > 64", p, 64.0, params.p > 64},
      {"m >= 192 s (9 + 2 ln(p/s))", m, m_required, m >= m_required},
      {"r <= 1/sqrt(p)", params.r, r_max, params.r <= r_max},
  };
  report.conditions_met = std::all_of(report.condition_details.begin(),
                                      report.condition_details.end(),
                                      [](const ConditionCheck& c) { return c.passed; });
  return report;
}

BoundReport theorem1_bound(const ProblemConfig& config) {
  return theorem1_bound(bound_parameters(config));
}

bool cs_condition(std::size_t m, std::size_t p, std::size_t s, double c0) {
  positive_finite(c0, "c0");
  if (s == 0 || p == 0 || s > p) throw std::domain_error("cs_condition needs 1 <= s <= p");
  const auto sd = static_cast<double>(s);
  return static_cast<double>(m) >= c0 * sd * std::log(static_cast<double>(p) / sd);
}

bool cs_condition(const ProblemConfig& config, double c0) {
  return cs_condition(config.m, config.p, config.s, c0);
}

double packing_separation(double epsilon) { return std::sqrt(8.0 * epsilon); }

std::size_t lemma1_cardinality(std::size_t p) {
  const double value = std::floor(std::exp(static_cast<double>(p) / 32.0));
  if (value >= static_cast<double>(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(value);
}

double lemma1_eta(const ProblemConfig& config, double epsilon) {
  return 32.0 * epsilon * static_cast<double>(config.n_samples) * static_cast<double>(config.s) *
         config.snr() / static_cast<double>(config.p);
}

PackingResult build_packing(const Dictionary& reference, double r, double epsilon,
                            std::size_t target_L, std::size_t max_attempts, Rng& rng,
                            const PackingOptions& options) {
  positive_finite(r, "r");
  positive_finite(epsilon, "epsilon");
  if (target_L < 2) throw std::domain_error("packing needs target_L >= 2");

  const double separation = packing_separation(epsilon);
  const double sampling_radius = std::min(r, options.sampling_radius.value_or(r));
  positive_finite(sampling_radius, "sampling radius");
  if (separation > 2.0 * r * (1.0 + 1e-12)) {
    // No two points of the ball are that far apart.
    max_attempts = std::min<std::size_t>(max_attempts, 1);
  }

  std::vector<Dictionary> members;
  std::size_t attempts = 0;
  while (members.size() < target_L && attempts < max_attempts) {
    ++attempts;
    Dictionary candidate = sample_dictionary_in_ball(reference, sampling_radius, rng);
    const bool separated = std::all_of(members.begin(), members.end(), [&](const Dictionary& d) {
      return frobenius_distance(candidate, d) >= separation;
    });
    if (separated) members.push_back(std::move(candidate));
  }
  const bool complete = members.size() == target_L;
  return PackingResult{Ensemble(std::move(members), reference, r), complete, attempts, target_L,
                       separation};
}

Lemma1Check verify_lemma1_desiderata(const Ensemble& ensemble, const ProblemConfig& config,
                                     double epsilon, const SupportCodec& codec, Rng& rng,
                                     const MiBoundOptions& options) {
  if (!(epsilon >= 0.0)) throw std::domain_error("epsilon must be >= 0");
  Lemma1Check check;
  check.separation = ensemble.separation();
  check.required_separation = packing_separation(epsilon);
  check.separation_margin = check.separation - check.required_separation;
  check.separation_ok = check.separation >= check.required_separation;
  check.mi = mi_upper_bound(ensemble, config, codec, rng, options);
  check.eta = lemma1_eta(config, epsilon);
  check.mi_margin = check.eta - check.mi.upper_bound_nats;
  check.mi_ok = check.mi.upper_bound_nats <= check.eta;
  return check;
}

std::size_t min_distance_detect(const Dictionary& estimate, const Ensemble& ensemble) {
  if (ensemble.size() == 0) throw std::domain_error("cannot detect within an empty ensemble");
  std::size_t best = 0;
  double best_distance = frobenius_distance(estimate, ensemble[0]);
  for (std::size_t l = 1; l < ensemble.size(); ++l) {
    const double distance = frobenius_distance(estimate, ensemble[l]);
    if (distance < best_distance) {
      best = l;
      best_distance = distance;
    }
  }
  return best;
}

double lemma2_threshold(std::size_t L) {
  if (L == 0) throw std::domain_error("lemma2_threshold needs L >= 1");
  return 0.5 * std::log2(static_cast<double>(L)) - 1.0;
}

InstanceBound instance_bound_search(const ProblemConfig& config, std::size_t target_L,
                                    std::size_t attempts, Rng& rng,
                                    const InstanceBoundOptions& options) {
  config.validate();
  if (target_L < 3) throw std::domain_error("instance bound search needs target_L >= 3");
  if (!(config.sigma > 0.0)) throw std::domain_error("instance bound search needs sigma > 0");
  positive_finite(config.r, "r");
  if (config.r > 1.0 / std::sqrt(static_cast<double>(config.p))) {
    throw std::domain_error("instance bound search needs r <= 1/sqrt(p)");
  }
  if (attempts == 0) throw std::domain_error("attempt budget must be positive");

  InstanceBound result;
  result.threshold_bits = lemma2_threshold(target_L);
  if (!(result.threshold_bits > 0.0)) {
    result.diagnostics = "threshold (1/2)log2(L)-1 is not positive for L=" +
                         std::to_string(target_L) + "; no epsilon can certify";
    return result;
  }

  const SupportCodec codec(config.p, config.s);
  double lo = 0.0;
  double hi = config.r * config.r / 16.0;
  std::size_t incomplete = 0;
  std::size_t over_threshold = 0;
  for (std::size_t step = 0; step < options.bisection_steps; ++step) {
    const double epsilon = 0.5 * (lo + hi);
    Rng probe_rng = rng.split(step);
    ++result.probes;
    PackingOptions packing_options;
    packing_options.sampling_radius = std::min(config.r, packing_separation(epsilon));
    PackingResult packing = build_packing(config.reference, config.r, epsilon, target_L,
                                          attempts, probe_rng, packing_options);
    if (!packing.complete) {
      ++incomplete;
      hi = epsilon;
      continue;
    }
    MiBoundReport mi = mi_upper_bound(packing.ensemble, config, codec, probe_rng, options.mi);
    if (mi.upper_bound_bits() < result.threshold_bits) {
      lo = epsilon;
      ++result.certified_probes;
      result.certified = true;
      result.epsilon = epsilon;
      result.mi = mi;
      result.ensemble.emplace(std::move(packing.ensemble));
    } else {
      ++over_threshold;
      hi = epsilon;
    }
  }

  std::ostringstream diag;
  diag << result.probes << " probes, " << result.certified_probes << " certified, "
       << incomplete << " packing failures, " << over_threshold << " over MI threshold";
  if (result.certified && result.mi.support_expectation_mode == SupportExpectation::monte_carlo) {
    diag << "; support expectation estimated by Monte Carlo";
  }
  result.diagnostics = diag.str();
  return result;
}

bool proof_chain_check(std::size_t p, double L) {
  if (!(L >= 1.0)) return false;
  const auto pd = static_cast<double>(p);
  const bool first = 0.5 * std::log2(L) - 1.0 >= 0.7 * pd / 32.0 - 1.0;
  // 0.7 p/32 - 1 >= 0.2 p/32  <=>  p >= 64, compared exactly in integers.
  const bool second = 7 * p >= 320 + 2 * p;
  return first && second;
}

}  // namespace dictminimax
