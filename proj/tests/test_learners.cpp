#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dictminimax/core_model.hpp"
#include "dictminimax/datagen.hpp"
#include "dictminimax/learners.hpp"
#include "dictminimax/rng.hpp"

using namespace dictminimax;

namespace {

Dictionary random_orthonormal(std::size_t m, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return Dictionary::from_columns(qr.householderQ() * Eigen::MatrixXd::Identity(n, n));
}

double aligned_distance(const Dictionary& estimate, const Dictionary& truth) {
  return frobenius_distance(sign_align(estimate, truth), truth);
}

}  // namespace

TEST_CASE("ITKM settings validation") {
  ItkmSettings settings;
  CHECK_NOTHROW(settings.validate(4));
  settings.s_tilde = 5;
  CHECK_THROWS_AS(settings.validate(4), std::domain_error);
  settings.s_tilde = 0;
  CHECK_THROWS_AS(settings.validate(4), std::domain_error);
  settings.s_tilde = 1;
  settings.iterations = 0;
  CHECK_THROWS_AS(settings.validate(4), std::domain_error);
}

TEST_CASE("ITKM fixed point on noiseless single-atom data") {
  Rng rng(GeneratorSeed{40, 0});
  for (const bool hadamard : {false, true}) {
    const Dictionary truth = hadamard ? Dictionary(make_hadamard(8) / std::sqrt(8.0)) : random_orthonormal(8, rng);
    const ProblemConfig config = make_problem_config(truth, 1, 1.0, 0.0, 0.1, 400);
    const ObservationBatch batch = generate_observations(config, truth, rng);
    for (const std::size_t iterations : {1UL, 50UL}) {
      ItkmSettings settings;
      settings.iterations = iterations;
      const Dictionary learned = itkm_learn(batch, settings, truth);
      CHECK(aligned_distance(learned, truth) < 1e-10);
      CHECK(max_column_norm_deviation(learned.entries()) <= 1e-12);
    }
  }
}

TEST_CASE("ITKM tie-breaking and empty atoms") {
  const Dictionary identity = make_identity_dictionary(2);
  const ProblemConfig config = make_problem_config(identity, 1, 1.0, 0.1, 0.1, 1);
  ObservationBatch batch{Eigen::MatrixXd(2, 1), {0}, Eigen::MatrixXd::Zero(2, 1), config};
  batch.observations << 1.0, 1.0;
  ItkmSettings settings;
  settings.iterations = 1;
  const Dictionary learned = itkm_learn(batch, settings, identity);
  const double h = 1.0 / std::sqrt(2.0);
  // The lowest index wins the tie; atom 1 is never selected and stays put.
  CHECK(learned.atom(0)(0) == doctest::Approx(h));
  CHECK(learned.atom(0)(1) == doctest::Approx(h));
  CHECK(learned.atom(1)(0) == 0.0);
  CHECK(learned.atom(1)(1) == 1.0);

  // Negative correlation contributes the flipped signal.
  batch.observations << -2.0, 0.5;
  const Dictionary flipped = itkm_learn(batch, settings, identity);
  CHECK(flipped.atom(0)(0) > 0.0);
  CHECK(flipped.atom(0)(1) < 0.0);
}

TEST_CASE("ITKM output stays on the manifold") {
  Rng rng(GeneratorSeed{41, 0});
  const Dictionary truth = make_dirac_hadamard_dictionary(8);
  const ProblemConfig config = make_problem_config(truth, 2, 1.0, 0.3, 0.25, 300);
  for (const std::size_t s_tilde : {1UL, 2UL, 3UL}) {
    for (const ItkmInit init : {ItkmInit::oracle, ItkmInit::reference, ItkmInit::random_in_ball}) {
      ItkmSettings settings;
      settings.s_tilde = s_tilde;
      settings.init = init;
      settings.iterations = 10;
      const ObservationBatch batch = generate_observations(config, truth, rng);
      const Dictionary start = make_itkm_init(settings, truth, config, rng);
      const Dictionary learned = itkm_learn(batch, settings, start);
      CHECK(max_column_norm_deviation(learned.entries()) <= 1e-12);
    }
  }
  ItkmSettings settings;
  ObservationBatch empty = generate_observations(make_problem_config(truth, 2, 1.0, 0.3, 0.25, 1), truth, rng);
  empty.observations.resize(8, 0);
  CHECK_THROWS_AS(itkm_learn(empty, settings, truth), std::domain_error);
}

TEST_CASE("ITKM is more accurate at higher SNR") {
  const Dictionary truth = make_identity_dictionary(8);
  const Learner itkm = [](const ObservationBatch& batch, Rng&) {
    return itkm_learn(batch, ItkmSettings{}, batch.config.reference);
  };
  const Rng rng(GeneratorSeed{42, 0});
  const std::size_t n = 1 << 14;
  const MseEstimate low = empirical_mse(make_problem_config(truth, 2, 1.0, 0.1, 0.25, n), truth, itkm, 6, rng);
  const MseEstimate high = empirical_mse(make_problem_config(truth, 2, 1.0, 0.01, 0.25, n), truth, itkm, 6, rng);
  CHECK(high.mean < low.mean);
}

TEST_CASE("oracle least squares") {
  Rng rng(GeneratorSeed{50, 0});
  const Dictionary truth = make_random_dictionary(4, 6, rng);

  SUBCASE("noiseless recovery") {
    const ProblemConfig config = make_problem_config(truth, 2, 1.0, 0.0, 0.3, 200);
    const OracleLsResult result = oracle_ls_learn(generate_observations(config, truth, rng));
    CHECK(result.flagged_atoms.empty());
    CHECK(frobenius_distance(result.dictionary, truth) < 1e-10);
  }

  SUBCASE("inactive atoms fall back to the reference and are flagged") {
    const ProblemConfig config = make_problem_config(truth, 1, 1.0, 0.0, 0.3, 4);
    ObservationBatch batch = generate_observations(config, truth, rng);
    batch.coefficients.setZero();
    batch.coefficients(0, 0) = 1.0;
    batch.coefficients(2, 1) = -2.0;
    batch.coefficients(2, 2) = 0.5;
    batch.coefficients(3, 3) = 1.5;
    batch.observations = truth.entries() * batch.coefficients;
    const OracleLsResult result = oracle_ls_learn(batch);
    CHECK(result.flagged_atoms == std::vector<std::size_t>{1, 4, 5});
    for (const std::size_t j : {0UL, 2UL, 3UL}) CHECK((result.dictionary.atom(j) - truth.atom(j)).norm() < 1e-12);
    for (const std::size_t j : result.flagged_atoms) CHECK(result.dictionary.atom(j) == config.reference.atom(j));
  }

  SUBCASE("error shrinks with N") {
    const Learner ls = [](const ObservationBatch& batch, Rng&) { return oracle_ls_learn(batch).dictionary; };
    const Rng base(GeneratorSeed{51, 0});
    double previous = std::numeric_limits<double>::infinity();
    for (const std::size_t n : {64UL, 512UL, 4096UL}) {
      const ProblemConfig config = make_problem_config(truth, 2, 1.0, 0.1, 0.3, n);
      const MseEstimate mse = empirical_mse(config, truth, ls, 10, base);
      CHECK(mse.mean < previous);
      previous = mse.mean;
    }
  }
}

TEST_CASE("empirical MSE") {
  Rng rng(GeneratorSeed{60, 0});
  const Dictionary truth = make_dirac_hadamard_dictionary(4);
  const ProblemConfig config = make_problem_config(truth, 2, 1.0, 0.1, 0.5, 50);
  const Rng base(GeneratorSeed{60, 1});

  const Learner perfect = [&](const ObservationBatch&, Rng&) { return truth; };
  const MseEstimate zero = empirical_mse(config, truth, perfect, 5, base);
  CHECK(zero.mean == 0.0);
  CHECK(zero.std_error == 0.0);
  CHECK(zero.trials == 5);

  const Dictionary fixed = sample_dictionary_in_ball(truth, 0.2, rng);
  const double d = frobenius_distance(fixed, truth);
  const Learner constant = [&](const ObservationBatch&, Rng&) { return fixed; };
  const MseEstimate exact = empirical_mse(config, truth, constant, 4, base);
  CHECK(exact.mean == doctest::Approx(d * d).epsilon(1e-14));
  CHECK(exact.std_error == 0.0);

  CHECK_THROWS_AS((void)empirical_mse(config, truth, perfect, 1, base), std::domain_error);

  const Learner itkm = [](const ObservationBatch& batch, Rng&) {
    return itkm_learn(batch, ItkmSettings{}, batch.config.reference);
  };
  const MseEstimate serial = empirical_mse(config, truth, itkm, 8, base, 1);
  const MseEstimate threaded = empirical_mse(config, truth, itkm, 8, base, 3);
  CHECK(serial.per_trial == threaded.per_trial);
  CHECK(serial.mean == threaded.mean);
  CHECK(serial.mean >= 0.0);
  CHECK(std::isfinite(serial.mean));

  double sum = 0.0;
  for (const double e : serial.per_trial) sum += e;
  const double mean = sum / 8.0;
  double sq = 0.0;
  for (const double e : serial.per_trial) sq += (e - mean) * (e - mean);
  CHECK(serial.std_error == doctest::Approx(std::sqrt(sq / 7.0 / 8.0)).epsilon(1e-12));
}
