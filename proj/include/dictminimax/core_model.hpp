#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dictminimax/rng.hpp"

namespace dictminimax {

/// Size-s subset of atom indices, strictly increasing, 0-based.
using Support = std::vector<std::size_t>;

/// m x p matrix with unit-norm columns (a point on the oblique manifold), p >= m.
class Dictionary {
 public:
  static constexpr double kUnitTolerance = 1e-12;

  /// Throws std::domain_error unless every column has norm 1 +- kUnitTolerance
  /// and the matrix has at least as many columns as rows.
  explicit Dictionary(Eigen::MatrixXd entries);

  /// Rescales every column to unit norm first. Zero columns are a domain error.
  static Dictionary from_columns(Eigen::MatrixXd entries);

  [[nodiscard]] const Eigen::MatrixXd& entries() const { return entries_; }
  [[nodiscard]] std::size_t signal_dim() const { return static_cast<std::size_t>(entries_.rows()); }
  [[nodiscard]] std::size_t atom_count() const { return static_cast<std::size_t>(entries_.cols()); }
  [[nodiscard]] auto atom(std::size_t j) const { return entries_.col(static_cast<Eigen::Index>(j)); }

  /// Columns of the dictionary restricted to a support, m x s.
  [[nodiscard]] Eigen::MatrixXd restrict_to(const Support& support) const;

  bool operator==(const Dictionary& other) const { return entries_ == other.entries_; }

 private:
  Eigen::MatrixXd entries_;
};

/// Largest |norm - 1| over all columns.
double max_column_norm_deviation(const Eigen::MatrixXd& entries);

double snr_from_db(double snr_db);
double snr_to_db(double snr);

/// Full model parameterization. The reference dictionary is D0, the center of
/// the neighborhood X(D0, r).
struct ProblemConfig {
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t s = 1;
  double sigma_a = 1.0;
  double sigma = 1.0;
  double r = 0.0;
  Dictionary reference;
  std::size_t n_samples = 1;

  /// (sigma_a / sigma)^2. Infinite for noiseless configurations.
  [[nodiscard]] double snr() const;

  /// Throws std::domain_error on out-of-range fields or a reference of the wrong shape.
  void validate() const;
};

/// Builds and validates a config with p and m taken from the reference.
ProblemConfig make_problem_config(Dictionary reference, std::size_t s, double sigma_a,
                                  double sigma, double r, std::size_t n_samples);

/// Colexicographic bijection between {0, ..., C(p,s)-1} and size-s subsets of
/// {0, ..., p-1}: rank({c_1 < ... < c_s}) = sum_k C(c_k, k).
class SupportCodec {
 public:
  /// Throws std::domain_error if s > p, s == 0, or C(p, s) does not fit in 64 bits.
  SupportCodec(std::size_t p, std::size_t s);

  [[nodiscard]] std::size_t p() const { return p_; }
  [[nodiscard]] std::size_t s() const { return s_; }
  [[nodiscard]] std::uint64_t count() const { return count_; }

  [[nodiscard]] Support unrank(std::uint64_t rank) const;
  [[nodiscard]] std::uint64_t rank(const Support& subset) const;

 private:
  [[nodiscard]] std::uint64_t choose(std::size_t n, std::size_t k) const;

  std::size_t p_;
  std::size_t s_;
  std::uint64_t count_;
  // binom_[n * (s_ + 1) + k] = C(n, k), saturating at uint64 max.
  std::vector<std::uint64_t> binom_;
};

/// Exact binomial coefficient, saturating at uint64 max on overflow.
std::uint64_t binomial_saturating(std::size_t n, std::size_t k);

/// Finite family of dictionaries inside X(reference, radius).
class Ensemble {
 public:
  /// Throws std::domain_error if a member has the wrong shape or lies outside
  /// the ball (tolerance 1e-12).
  Ensemble(std::vector<Dictionary> members, Dictionary reference, double radius);

  [[nodiscard]] const std::vector<Dictionary>& members() const { return members_; }
  [[nodiscard]] std::size_t size() const { return members_.size(); }
  [[nodiscard]] const Dictionary& operator[](std::size_t l) const { return members_[l]; }
  [[nodiscard]] const Dictionary& reference() const { return reference_; }
  [[nodiscard]] double radius() const { return radius_; }
  /// Minimum pairwise Frobenius distance, +inf for fewer than two members.
  [[nodiscard]] double separation() const { return separation_; }

  /// FNV-1a over the raw member entries; identifies an ensemble in reports.
  [[nodiscard]] std::uint64_t fingerprint() const;

 private:
  std::vector<Dictionary> members_;
  Dictionary reference_;
  double radius_;
  double separation_ = std::numeric_limits<double>::infinity();
};

/// Observations Y plus the hidden ground truth they were drawn from.
struct ObservationBatch {
  Eigen::MatrixXd observations;         // m x N
  std::vector<std::uint64_t> supports;  // support rank per column
  Eigen::MatrixXd coefficients;         // p x N, pre-normalization values
  ProblemConfig config;
  bool normalized = false;
  std::size_t zero_columns = 0;  // columns left untouched by normalization

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(observations.cols()); }
};

Dictionary make_identity_dictionary(std::size_t m);

/// Sylvester-Hadamard matrix with F_2 = [[1,1],[1,-1]] and F_m = F_2 (x) F_{m/2}.
/// Entries are exactly +-1. Throws std::domain_error unless m is a power of two >= 2.
Eigen::MatrixXd make_hadamard(std::size_t m);

/// [ I  F_m / sqrt(m) ], an m x 2m union of two orthonormal bases.
Dictionary make_dirac_hadamard_dictionary(std::size_t m);

/// Gaussian columns rescaled to unit norm.
Dictionary make_random_dictionary(std::size_t m, std::size_t p, Rng& rng);

/// Gaussian perturbation of every column followed by column renormalization.
/// The initial per-entry scale targets a Frobenius distance near r; while the
/// result is farther than r from the reference the scale is halved and the
/// same perturbation direction is reused. Always terminates.
Dictionary sample_dictionary_in_ball(const Dictionary& reference, double r, Rng& rng);

double frobenius_distance(const Dictionary& a, const Dictionary& b);
double frobenius_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Flips column j of the estimate iff that strictly reduces its distance to
/// column j of the truth.
Dictionary sign_align(const Dictionary& estimate, const Dictionary& truth);

}  // namespace dictminimax
