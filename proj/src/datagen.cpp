#include "dictminimax/datagen.hpp"

#include <stdexcept>

namespace dictminimax {

CoefficientDraw sample_coefficients(const ProblemConfig& config, const SupportCodec& codec,
                                    Rng& rng) {
  CoefficientDraw draw;
  draw.support_rank = rng.below(codec.count());
  draw.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.p));
  for (const std::size_t j : codec.unrank(draw.support_rank)) {
    draw.coefficients(static_cast<Eigen::Index>(j)) = config.sigma_a * rng.normal();
  }
  return draw;
}

ObservationBatch generate_observations(const ProblemConfig& config, const Dictionary& dict,
                                       Rng& rng) {
  config.validate();
  if (dict.signal_dim() != config.m || dict.atom_count() != config.p) {
    throw std::domain_error("generating dictionary shape does not match the config");
  }
  const SupportCodec codec(config.p, config.s);
  const auto n = static_cast<Eigen::Index>(config.n_samples);
  const auto m = static_cast<Eigen::Index>(config.m);
  const auto p = static_cast<Eigen::Index>(config.p);

  ObservationBatch batch{Eigen::MatrixXd(m, n), {}, Eigen::MatrixXd(p, n), config};
  batch.supports.reserve(config.n_samples);
  Eigen::VectorXd noise(m);
  for (Eigen::Index k = 0; k < n; ++k) {
    CoefficientDraw draw = sample_coefficients(config, codec, rng);
    for (Eigen::Index i = 0; i < m; ++i) noise(i) = config.sigma * rng.normal();
    batch.observations.col(k) = dict.entries() * draw.coefficients + noise;
    batch.coefficients.col(k) = draw.coefficients;
    batch.supports.push_back(draw.support_rank);
  }
  return batch;
}

ObservationBatch normalize_signals(ObservationBatch batch) {
  batch.zero_columns = 0;
  for (Eigen::Index k = 0; k < batch.observations.cols(); ++k) {
    const double norm = batch.observations.col(k).norm();
    if (norm > 0.0) {
      batch.observations.col(k) /= norm;
    } else {
      ++batch.zero_columns;
    }
  }
  batch.normalized = true;
  return batch;
}

}  // namespace dictminimax
