#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "dictminimax/core_model.hpp"
#include "dictminimax/rng.hpp"

namespace dictminimax {

struct CoefficientDraw {
  std::uint64_t support_rank = 0;
  Eigen::VectorXd coefficients;  // length p, zero off the support
};

/// Uniform support rank, then i.i.d. Normal(0, sigma_a^2) on the support.
/// Consumes exactly 1 + 2s generator words.
CoefficientDraw sample_coefficients(const ProblemConfig& config, const SupportCodec& codec,
                                    Rng& rng);

/// N columns y_k = D x_k + w_k, w_k ~ Normal(0, sigma^2 I). Per column the
/// coefficients are drawn first, then the m noise entries.
ObservationBatch generate_observations(const ProblemConfig& config, const Dictionary& dict,
                                       Rng& rng);

/// Scales every observation column to unit norm. Zero columns are left as is
/// and counted in zero_columns. Ground truth is carried through unchanged.
ObservationBatch normalize_signals(ObservationBatch batch);

}  // namespace dictminimax
