#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dictminimax/core_model.hpp"
#include "dictminimax/rng.hpp"

namespace dictminimax {

/// A covariance failed the SPD check.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double min_eigenvalue, double max_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue), max_eigenvalue_(max_eigenvalue) {}

  [[nodiscard]] double min_eigenvalue() const { return min_eigenvalue_; }
  [[nodiscard]] double max_eigenvalue() const { return max_eigenvalue_; }

 private:
  double min_eigenvalue_;
  double max_eigenvalue_;
};

/// sigma_a^2 D_S D_S^T + sigma^2 I, the covariance of y given its support.
Eigen::MatrixXd conditional_covariance(const Dictionary& dict, const Support& support,
                                       double sigma_a, double sigma);

/// KL(Normal(0, cov_a) || Normal(0, cov_b)) in nats.
///
/// Inputs must be symmetric positive definite with
/// lambda_min > 1e-12 * lambda_max; anything else throws NumericError carrying
/// the offending eigenvalue range. Tiny negative round-off is clamped to 0.
double gaussian_kl(const Eigen::MatrixXd& cov_a, const Eigen::MatrixXd& cov_b);

enum class SupportExpectation { automatic, exact, monte_carlo };

const char* to_string(SupportExpectation mode);

struct MiBoundOptions {
  SupportExpectation mode = SupportExpectation::automatic;
  std::uint64_t exact_threshold = 10000;  // automatic mode enumerates up to this many supports
  std::size_t monte_carlo_supports = 1000;
};

struct MiBoundReport {
  double upper_bound_nats = 0.0;
  SupportExpectation support_expectation_mode = SupportExpectation::exact;
  std::size_t pairs_evaluated = 0;
  std::size_t supports_evaluated = 0;
  double std_error_nats = 0.0;  // 0 in exact mode

  [[nodiscard]] double upper_bound_bits() const;
};

/// Upper bound on I(Y; l | i) for l uniform over the ensemble:
///
///   N * E_i[ (1/L^2) sum_{l,l'} KL(Sigma^(l)_{y|i} || Sigma^(l')_{y|i}) ]
///
/// The mixture-vs-component convexity bound applied per support, summed over
/// the N independent columns. E_i is exact when the support count is at most
/// the threshold (or mode is exact), otherwise a Monte Carlo mean over
/// uniformly drawn supports with its standard error. Requires sigma > 0.
MiBoundReport mi_upper_bound(const Ensemble& ensemble, const ProblemConfig& config,
                             const SupportCodec& codec, Rng& rng,
                             const MiBoundOptions& options = {});

/// The scalar inputs of the closed-form minimax bound.
struct BoundParameters {
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t s = 0;
  double snr = 0.0;
  std::size_t n_samples = 0;
  double r = 0.0;
};

BoundParameters bound_parameters(const ProblemConfig& config);

enum class BoundBranch { radius, sample_size };

const char* to_string(BoundBranch branch);

struct ConditionCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = false;
};

struct BoundReport {
  double value = 0.0;
  BoundBranch branch = BoundBranch::radius;
  double radius_term = 0.0;       // r^2 / 16
  double sample_size_term = 0.0;  // p^2 / (SNR * 5120 * N * s)
  bool conditions_met = false;
  std::vector<ConditionCheck> condition_details;
  std::string log_base = "e";
};

/// min{ r^2/16, p^2 / (SNR 5120 N s) }, reported whether or not the validity
/// conditions p > 64, m >= 192 s (9 + 2 ln(p/s)) and r <= 1/sqrt(p) hold.
/// Throws std::domain_error for non-positive or non-finite inputs.
BoundReport theorem1_bound(const BoundParameters& params);
BoundReport theorem1_bound(const ProblemConfig& config);

/// m >= c0 s ln(p/s).
bool cs_condition(std::size_t m, std::size_t p, std::size_t s, double c0);
bool cs_condition(const ProblemConfig& config, double c0);

/// sqrt(8 epsilon), the pairwise separation a packing at level epsilon needs.
double packing_separation(double epsilon);

/// floor(e^{p/32}), saturating at SIZE_MAX.
std::size_t lemma1_cardinality(std::size_t p);

/// 32 epsilon N s SNR / p.
double lemma1_eta(const ProblemConfig& config, double epsilon);

struct PackingOptions {
  /// Candidates are drawn from X(reference, sampling_radius); defaults to r.
  /// Values above r are clamped to r.
  std::optional<double> sampling_radius;
};

struct PackingResult {
  Ensemble ensemble;  // partial when !complete
  bool complete = false;
  std::size_t attempts = 0;
  std::size_t target_size = 0;
  double required_separation = 0.0;
};

/// Greedy rejection sampling: draw candidates in the ball and keep those at
/// least sqrt(8 epsilon) from every accepted member, until target_L members
/// exist or the attempt budget runs out. When sqrt(8 epsilon) exceeds the ball
/// diameter 2r the search stops after the first member.
PackingResult build_packing(const Dictionary& reference, double r, double epsilon,
                            std::size_t target_L, std::size_t max_attempts, Rng& rng,
                            const PackingOptions& options = {});

struct Lemma1Check {
  double separation = 0.0;
  double required_separation = 0.0;
  double separation_margin = 0.0;  // separation - required
  bool separation_ok = false;
  MiBoundReport mi;
  double eta = 0.0;
  double mi_margin = 0.0;  // eta - bound
  bool mi_ok = false;

  [[nodiscard]] bool passed() const { return separation_ok && mi_ok; }
};

Lemma1Check verify_lemma1_desiderata(const Ensemble& ensemble, const ProblemConfig& config,
                                     double epsilon, const SupportCodec& codec, Rng& rng,
                                     const MiBoundOptions& options = {});

/// Index of the closest member in Frobenius distance, lowest index on ties.
std::size_t min_distance_detect(const Dictionary& estimate, const Ensemble& ensemble);

/// (1/2) log2(L) - 1, in bits.
double lemma2_threshold(std::size_t L);

struct InstanceBoundOptions {
  std::size_t bisection_steps = 40;
  MiBoundOptions mi;
};

struct InstanceBound {
  double epsilon = 0.0;  // certified lower bound on the minimax risk, 0 if none
  bool certified = false;
  std::optional<Ensemble> ensemble;
  MiBoundReport mi;
  double threshold_bits = 0.0;
  std::size_t probes = 0;
  std::size_t certified_probes = 0;
  std::string diagnostics;
};

/// Bisection over epsilon in (0, r^2/16) for the largest level at which a
/// packing of target_L members exists and its MI bound, converted to bits,
/// stays strictly below lemma2_threshold(target_L). Candidates are sampled in
/// a ball of radius min(r, sqrt(8 epsilon)) so the ensemble is no more spread
/// out than the separation requires.
InstanceBound instance_bound_search(const ProblemConfig& config, std::size_t target_L,
                                    std::size_t attempts, Rng& rng,
                                    const InstanceBoundOptions& options = {});

/// The closing arithmetic chain
///   (1/2) log2(L) - 1 >= 0.7 p/32 - 1 >= 0.2 p/32.
bool proof_chain_check(std::size_t p, double L);

}  // namespace dictminimax
