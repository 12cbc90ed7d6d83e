#include "dictminimax/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dictminimax/datagen.hpp"
#include "dictminimax/parallel.hpp"

namespace dictminimax {

const char* to_string(ItkmInit init) {
  switch (init) {
    case ItkmInit::oracle: return "oracle";
    case ItkmInit::reference: return "reference";
    case ItkmInit::random_in_ball: return "random-in-ball";
  }
  return "unknown";
}

void ItkmSettings::validate(std::size_t p) const {
  if (s_tilde == 0 || s_tilde > p) {
    throw std::domain_error("ITKM needs 1 <= s_tilde <= p, got s_tilde=" +
                            std::to_string(s_tilde));
  }
  if (iterations == 0) throw std::domain_error("ITKM needs at least one iteration");
  if (!(tolerance >= 0.0)) throw std::domain_error("ITKM tolerance must be >= 0");
}

Dictionary itkm_learn(const ObservationBatch& batch, const ItkmSettings& settings,
                      const Dictionary& init_dict) {
  const std::size_t p = init_dict.atom_count();
  settings.validate(p);
  if (batch.size() == 0) throw std::domain_error("ITKM needs at least one signal");
  if (static_cast<std::size_t>(batch.observations.rows()) != init_dict.signal_dim()) {
    throw std::domain_error("initial dictionary does not match the signal dimension");
  }

  Eigen::MatrixXd signals = batch.observations;
  if (settings.normalize_signals && !batch.normalized) {
    for (Eigen::Index k = 0; k < signals.cols(); ++k) {
      const double norm = signals.col(k).norm();
      if (norm > 0.0) signals.col(k) /= norm;
    }
  }

  const auto n = signals.cols();
  Eigen::MatrixXd atoms = init_dict.entries();
  Eigen::MatrixXd next(atoms.rows(), atoms.cols());
  Eigen::MatrixXd correlations;
  std::vector<char> selected(p);
  std::vector<std::size_t> order(p);

  for (std::size_t round = 0; round < settings.iterations; ++round) {
    correlations.noalias() = atoms.transpose() * signals;
    next.setZero();
    std::fill(selected.begin(), selected.end(), 0);

    for (Eigen::Index k = 0; k < n; ++k) {
      const auto column = correlations.col(k);
      if (settings.s_tilde == 1) {
        Eigen::Index best = 0;
        double best_value = std::abs(column(0));
        for (Eigen::Index j = 1; j < column.size(); ++j) {
          const double value = std::abs(column(j));
          if (value > best_value) {
            best = j;
            best_value = value;
          }
        }
        next.col(best) += (column(best) >= 0.0 ? 1.0 : -1.0) * signals.col(k);
        selected[static_cast<std::size_t>(best)] = 1;
        continue;
      }
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(settings.s_tilde),
                        order.end(), [&](std::size_t a, std::size_t b) {
                          const double ca = std::abs(column(static_cast<Eigen::Index>(a)));
                          const double cb = std::abs(column(static_cast<Eigen::Index>(b)));
                          return ca > cb || (ca == cb && a < b);
                        });
      for (std::size_t t = 0; t < settings.s_tilde; ++t) {
        const auto j = static_cast<Eigen::Index>(order[t]);
        next.col(j) += (column(j) >= 0.0 ? 1.0 : -1.0) * signals.col(k);
        selected[order[t]] = 1;
      }
    }

    for (std::size_t j = 0; j < p; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      const double norm = next.col(col).norm();
      if (selected[j] && norm > 0.0) {
        next.col(col) /= norm;
      } else {
        next.col(col) = atoms.col(col);
      }
    }
    const double change = (next - atoms).norm();
    atoms.swap(next);
    if (change < settings.tolerance) break;
  }
  return Dictionary(std::move(atoms));
}

Dictionary make_itkm_init(const ItkmSettings& settings, const Dictionary& truth,
                          const ProblemConfig& config, Rng& rng) {
  switch (settings.init) {
    case ItkmInit::oracle: return truth;
    case ItkmInit::reference: return config.reference;
    case ItkmInit::random_in_ball: return sample_dictionary_in_ball(config.reference, config.r, rng);
  }
  throw std::domain_error("unknown ITKM initialization");
}

OracleLsResult oracle_ls_learn(const ObservationBatch& batch) {
  const Dictionary& reference = batch.config.reference;
  const std::size_t p = reference.atom_count();
  if (static_cast<std::size_t>(batch.coefficients.rows()) != p ||
      batch.coefficients.cols() != batch.observations.cols()) {
    throw std::domain_error("oracle least squares needs the ground-truth coefficients");
  }

  std::vector<Eigen::Index> active;
  std::vector<std::size_t> flagged;
  for (std::size_t j = 0; j < p; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    if ((batch.coefficients.row(row).array() != 0.0).any()) {
      active.push_back(row);
    } else {
      flagged.push_back(j);
    }
  }

  Eigen::MatrixXd atoms = reference.entries();
  if (!active.empty()) {
    const auto a = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd masked(a, batch.coefficients.cols());
    for (Eigen::Index i = 0; i < a; ++i) masked.row(i) = batch.coefficients.row(active[i]);

    const Eigen::MatrixXd gram = masked * masked.transpose();
    const Eigen::LDLT<Eigen::MatrixXd> normal(gram);
    const double rcond = normal.info() == Eigen::Success ? normal.rcond() : 0.0;
    if (rcond > 1e-12) {
      // (X_A X_A^T) Z = X_A Y^T, then D_A = Z^T.
      const Eigen::MatrixXd fitted =
          normal.solve(masked * batch.observations.transpose()).transpose();
      for (Eigen::Index i = 0; i < a; ++i) {
        const double norm = fitted.col(i).norm();
        if (norm > 0.0 && std::isfinite(norm)) {
          atoms.col(active[static_cast<std::size_t>(i)]) = fitted.col(i) / norm;
        } else {
          flagged.push_back(static_cast<std::size_t>(active[static_cast<std::size_t>(i)]));
        }
      }
    } else {
      for (const auto j : active) flagged.push_back(static_cast<std::size_t>(j));
    }
  }
  std::sort(flagged.begin(), flagged.end());
  return OracleLsResult{Dictionary(std::move(atoms)), std::move(flagged)};
}

MseEstimate empirical_mse(const ProblemConfig& config, const Dictionary& dict,
                          const Learner& learner, std::size_t trials, const Rng& rng,
                          std::size_t threads) {
  if (trials < 2) throw std::domain_error("empirical MSE needs at least two trials");
  MseEstimate estimate;
  estimate.trials = trials;
  estimate.per_trial.assign(trials, 0.0);

  parallel_for(trials, threads, [&](std::size_t t) {
    Rng trial_rng = rng.split(t);
    const ObservationBatch batch = generate_observations(config, dict, trial_rng);
    const Dictionary learned = learner(batch, trial_rng);
    const Dictionary aligned = sign_align(learned, dict);
    estimate.per_trial[t] = (aligned.entries() - dict.entries()).squaredNorm();
  });

  double sum = 0.0;
  for (const double e : estimate.per_trial) sum += e;
  estimate.mean = sum / static_cast<double>(trials);
  double squares = 0.0;
  for (const double e : estimate.per_trial) squares += (e - estimate.mean) * (e - estimate.mean);
  const double variance = squares / static_cast<double>(trials - 1);
  estimate.std_error = std::sqrt(variance / static_cast<double>(trials));
  return estimate;
}

}  // namespace dictminimax
