#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dictminimax/core_model.hpp"
#include "dictminimax/rng.hpp"

using namespace dictminimax;

namespace {

// Colex order on s-subsets of {0..p-1} is the numeric order of their bitmasks.
std::vector<Support> colex_enumeration(std::size_t p, std::size_t s) {
  std::vector<Support> out;
  for (std::uint32_t mask = 0; mask < (1U << p); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != s) continue;
    Support subset;
    for (std::size_t j = 0; j < p; ++j) {
      if (mask & (1U << j)) subset.push_back(j);
    }
    out.push_back(subset);
  }
  return out;
}

double sum_of_squares_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double d = a(i, j) - b(i, j);
      total += d * d;
    }
  }
  return std::sqrt(total);
}

}  // namespace

TEST_CASE("support codec worked values") {
  const SupportCodec codec(4, 2);
  CHECK(codec.count() == 6);
  CHECK(codec.unrank(0) == Support{0, 1});
  CHECK(codec.unrank(5) == Support{2, 3});
  CHECK(codec.rank({2, 3}) == 5);
  CHECK(codec.rank({0, 1}) == 0);
  CHECK(codec.rank({3, 2}) == 5);

  const SupportCodec single(1, 1);
  CHECK(single.unrank(0) == Support{0});

  const SupportCodec singletons(6, 1);
  for (std::size_t k = 0; k < 6; ++k) CHECK(singletons.rank({k}) == k);
}

TEST_CASE("support codec rejects invalid input") {
  const SupportCodec codec(4, 2);
  CHECK_THROWS_AS((void)codec.unrank(6), std::domain_error);
  CHECK_THROWS_AS((void)codec.rank({1}), std::domain_error);
  CHECK_THROWS_AS((void)codec.rank({1, 4}), std::domain_error);
  CHECK_THROWS_AS((void)codec.rank({2, 2}), std::domain_error);
  CHECK_THROWS_AS(SupportCodec(3, 4), std::domain_error);
  CHECK_THROWS_AS(SupportCodec(3, 0), std::domain_error);
}

TEST_CASE("support codec matches the bitmask colex enumeration for p <= 12") {
  for (std::size_t p = 1; p <= 12; ++p) {
    for (std::size_t s = 1; s <= p; ++s) {
      const SupportCodec codec(p, s);
      const auto expected = colex_enumeration(p, s);
      REQUIRE(codec.count() == expected.size());
      for (std::uint64_t rank = 0; rank < codec.count(); ++rank) {
        const Support subset = codec.unrank(rank);
        CHECK(subset == expected[rank]);
        CHECK(codec.rank(subset) == rank);
      }
    }
  }
}

TEST_CASE("binomial coefficients saturate instead of overflowing") {
  CHECK(binomial_saturating(4, 2) == 6);
  CHECK(binomial_saturating(64, 32) == 1832624140942590534ULL);
  CHECK(binomial_saturating(200, 100) == UINT64_MAX);
  CHECK(binomial_saturating(3, 5) == 0);
}

TEST_CASE("identity dictionaries") {
  CHECK(make_identity_dictionary(1).entries() == Eigen::MatrixXd::Identity(1, 1));
  CHECK(make_identity_dictionary(2).entries() == Eigen::MatrixXd::Identity(2, 2));
  CHECK(make_identity_dictionary(8).entries() == Eigen::MatrixXd::Identity(8, 8));
}

TEST_CASE("Hadamard construction") {
  Eigen::MatrixXd f2(2, 2);
  f2 << 1, 1, 1, -1;
  CHECK(make_hadamard(2) == f2);

  Eigen::MatrixXd f4(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) f4.block(2 * i, 2 * j, 2, 2) = f2(i, j) * f2;
  }
  CHECK(make_hadamard(4) == f4);

  SUBCASE("orthogonality in integer arithmetic up to m = 64") {
    for (std::size_t m = 2; m <= 64; m *= 2) {
      const Eigen::MatrixXd f = make_hadamard(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
          long long dot = 0;
          for (std::size_t j = 0; j < m; ++j) {
            const auto a = static_cast<long long>(f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            const auto b = static_cast<long long>(f(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)));
            REQUIRE((a == 1 || a == -1));
            dot += a * b;
          }
          CHECK(dot == (i == k ? static_cast<long long>(m) : 0));
        }
      }
      CHECK(max_column_norm_deviation(f / std::sqrt(static_cast<double>(m))) <= 1e-12);
    }
  }

  CHECK_THROWS_AS(make_hadamard(6), std::domain_error);
  CHECK_THROWS_AS(make_hadamard(1), std::domain_error);
  CHECK_THROWS_AS(make_hadamard(0), std::domain_error);
}

TEST_CASE("Dirac-Hadamard dictionary") {
  const Dictionary d = make_dirac_hadamard_dictionary(2);
  const double h = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd expected(2, 4);
  expected << 1, 0, h, h, 0, 1, h, -h;
  CHECK((d.entries() - expected).cwiseAbs().maxCoeff() <= 1e-15);

  const Dictionary d8 = make_dirac_hadamard_dictionary(8);
  CHECK(d8.signal_dim() == 8);
  CHECK(d8.atom_count() == 16);
  CHECK(max_column_norm_deviation(d8.entries()) <= 1e-12);
  CHECK_THROWS_AS(make_dirac_hadamard_dictionary(12), std::domain_error);
}

TEST_CASE("Dictionary enforces the oblique manifold") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(0, 0) = 1.0 + 1e-9;
  CHECK_THROWS_AS(Dictionary{bad}, std::domain_error);
  CHECK_THROWS_AS(Dictionary{Eigen::MatrixXd::Identity(3, 2)}, std::domain_error);
  Eigen::MatrixXd nan_entries = Eigen::MatrixXd::Identity(2, 2);
  nan_entries(0, 1) = std::nan("");
  CHECK_THROWS_AS(Dictionary{nan_entries}, std::domain_error);
  CHECK_THROWS_AS(Dictionary::from_columns(Eigen::MatrixXd::Zero(2, 2)), std::domain_error);

  Eigen::MatrixXd scaled(2, 2);
  scaled << 3, 0, 4, 2;
  const Dictionary d = Dictionary::from_columns(scaled);
  CHECK(d.atom(0)(0) == doctest::Approx(0.6));
  CHECK(d.atom(1)(1) == doctest::Approx(1.0));
}

TEST_CASE("constructors land on the manifold") {
  Rng rng(GeneratorSeed{11, 0});
  for (int trial = 0; trial < 20; ++trial) {
    const Dictionary d = make_random_dictionary(5, 9, rng);
    CHECK(max_column_norm_deviation(d.entries()) <= 1e-12);
    const Dictionary near = sample_dictionary_in_ball(d, 0.3, rng);
    CHECK(max_column_norm_deviation(near.entries()) <= 1e-12);
  }
}

TEST_CASE("sampling in the ball respects the radius") {
  Rng rng(GeneratorSeed{5, 1});
  const Dictionary identity = make_identity_dictionary(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Dictionary out = sample_dictionary_in_ball(identity, 0.1, rng);
    CHECK(frobenius_distance(out, identity) <= 0.1);
    Eigen::MatrixXd off = out.entries();
    off.diagonal().setZero();
    CHECK(off.norm() <= 0.1);
  }
  for (const double r : {1e-3, 0.05, 0.5, 2.0}) {
    const Dictionary reference = make_random_dictionary(6, 10, rng);
    for (int trial = 0; trial < 50; ++trial) {
      CHECK(frobenius_distance(sample_dictionary_in_ball(reference, r, rng), reference) <= r);
    }
  }
  const Dictionary tiny = sample_dictionary_in_ball(identity, 1e-300, rng);
  CHECK(frobenius_distance(tiny, identity) <= 1e-300);
}

TEST_CASE("Frobenius distance") {
  Rng rng(GeneratorSeed{3, 3});
  const Dictionary a = make_random_dictionary(4, 6, rng);
  const Dictionary b = make_random_dictionary(4, 6, rng);
  CHECK(frobenius_distance(a, a) == 0.0);
  CHECK(frobenius_distance(a, b) == doctest::Approx(sum_of_squares_distance(a.entries(), b.entries())).epsilon(1e-14));

  Eigen::MatrixXd flipped = a.entries();
  flipped.col(2) *= -1.0;
  CHECK(frobenius_distance(a, Dictionary(flipped)) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS((void)frobenius_distance(a, make_random_dictionary(4, 5, rng)), std::domain_error);
}

TEST_CASE("sign alignment") {
  Rng rng(GeneratorSeed{8, 8});
  const Dictionary truth = make_random_dictionary(6, 8, rng);
  CHECK(sign_align(Dictionary(-truth.entries()), truth) == truth);
  CHECK(sign_align(truth, truth) == truth);
  CHECK_THROWS_AS((void)sign_align(truth, make_identity_dictionary(6)), std::domain_error);

  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd mixed = sample_dictionary_in_ball(truth, 1.5, rng).entries();
    for (Eigen::Index j = 0; j < mixed.cols(); ++j) {
      if (rng.below(2) == 1) mixed.col(j) *= -1.0;
    }
    const Dictionary estimate(mixed);
    const Dictionary aligned = sign_align(estimate, truth);
    CHECK(frobenius_distance(aligned, truth) <= frobenius_distance(estimate, truth));
    CHECK(sign_align(aligned, truth) == aligned);
    // Each column is the better of its two signs.
    for (std::size_t j = 0; j < truth.atom_count(); ++j) {
      const double kept = (aligned.atom(j) - truth.atom(j)).norm();
      const double other = (-aligned.atom(j) - truth.atom(j)).norm();
      CHECK(kept <= other);
    }
  }
}

TEST_CASE("problem config") {
  const ProblemConfig config = make_problem_config(make_identity_dictionary(8), 2, 1.0, 0.1, 0.2, 100);
  CHECK(config.m == 8);
  CHECK(config.p == 8);
  CHECK(config.snr() == doctest::Approx(100.0));
  CHECK(snr_from_db(20.0) == doctest::Approx(100.0));
  CHECK(snr_to_db(100.0) == doctest::Approx(20.0));
  CHECK(std::isinf(make_problem_config(make_identity_dictionary(2), 1, 1.0, 0.0, 0.1, 1).snr()));

  CHECK_THROWS_AS(make_problem_config(make_identity_dictionary(4), 0, 1.0, 0.1, 0.2, 10), std::domain_error);
  CHECK_THROWS_AS(make_problem_config(make_identity_dictionary(4), 5, 1.0, 0.1, 0.2, 10), std::domain_error);
  CHECK_THROWS_AS(make_problem_config(make_identity_dictionary(4), 1, 1.0, -0.1, 0.2, 10), std::domain_error);
  CHECK_THROWS_AS(make_problem_config(make_identity_dictionary(4), 1, 1.0, 0.1, 0.2, 0), std::domain_error);
}

TEST_CASE("ensembles") {
  const Dictionary reference = make_identity_dictionary(3);
  Rng rng(GeneratorSeed{2, 0});
  std::vector<Dictionary> members;
  for (int l = 0; l < 4; ++l) members.push_back(sample_dictionary_in_ball(reference, 0.2, rng));
  const Ensemble ensemble(members, reference, 0.2);
  double expected = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      expected = std::min(expected, sum_of_squares_distance(members[a].entries(), members[b].entries()));
    }
  }
  CHECK(ensemble.separation() == doctest::Approx(expected).epsilon(1e-14));
  CHECK(ensemble.fingerprint() == Ensemble(members, reference, 0.2).fingerprint());
  std::vector<Dictionary> swapped{members[1], members[0], members[2], members[3]};
  CHECK(ensemble.fingerprint() != Ensemble(swapped, reference, 0.2).fingerprint());

  CHECK(std::isinf(Ensemble({reference}, reference, 0.1).separation()));
  CHECK_THROWS_AS(Ensemble({Dictionary(-reference.entries())}, reference, 0.5), std::domain_error);
  CHECK_THROWS_AS(Ensemble({make_identity_dictionary(4)}, reference, 10.0), std::domain_error);
}
