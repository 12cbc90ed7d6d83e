#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dictminimax/core_model.hpp"
#include "dictminimax/rng.hpp"

namespace dictminimax {

enum class ItkmInit { oracle, reference, random_in_ball };

const char* to_string(ItkmInit init);

struct ItkmSettings {
  std::size_t s_tilde = 1;
  std::size_t iterations = 50;
  double tolerance = 1e-8;  // early stop once successive iterates are this close
  ItkmInit init = ItkmInit::oracle;
  bool normalize_signals = true;

  void validate(std::size_t p) const;
};

/// Iterative thresholding and K-means with signed means.
///
/// Each round selects, for every signal, the s_tilde atoms with the largest
/// |<d_j, y_k>| (lowest index wins ties), replaces each atom by
/// sum_k sign(<d_j, y_k>) y_k over the signals that selected it, and rescales
/// to unit norm. Atoms selected by no signal keep their previous value. Signals
/// are normalized first when settings.normalize_signals is set.
Dictionary itkm_learn(const ObservationBatch& batch, const ItkmSettings& settings,
                      const Dictionary& init_dict);

/// Starting point for ITKM: the generating dictionary (oracle), the reference
/// D0, or a random draw from X(D0, r).
Dictionary make_itkm_init(const ItkmSettings& settings, const Dictionary& truth,
                          const ProblemConfig& config, Rng& rng);

struct OracleLsResult {
  Dictionary dictionary;
  std::vector<std::size_t> flagged_atoms;  // fell back to the reference atom
};

/// Least-squares dictionary given the true coefficients: D = Y X_A^T (X_A X_A^T)^{-1}
/// over the atoms A that are active at least once, columns renormalized.
/// Atoms never active, or all of A when the normal equations are singular,
/// take the reference atom and are flagged.
OracleLsResult oracle_ls_learn(const ObservationBatch& batch);

struct MseEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::vector<double> per_trial;
};

/// Estimator under test: maps observations (and a private stream) to a dictionary.
using Learner = std::function<Dictionary(const ObservationBatch&, Rng&)>;

/// Mean of ||sign_align(learner(Y), D) - D||_F^2 over fresh observation
/// batches. Trial t uses the stream rng.split(t): observations are drawn from
/// it first, then it is handed to the learner. Results do not depend on the
/// thread count.
MseEstimate empirical_mse(const ProblemConfig& config, const Dictionary& dict,
                          const Learner& learner, std::size_t trials, const Rng& rng,
                          std::size_t threads = 1);

}  // namespace dictminimax
