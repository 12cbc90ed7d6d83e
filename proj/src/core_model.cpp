#include "dictminimax/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace dictminimax {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();
__extension__ using uint128 = unsigned __int128;

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return (a > kSaturated - b) ? kSaturated : a + b;
}

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::domain_error(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                            "x" + std::to_string(b.cols()) + ")");
  }
}

}  // namespace

double max_column_norm_deviation(const Eigen::MatrixXd& entries) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < entries.cols(); ++j) {
    worst = std::max(worst, std::abs(entries.col(j).norm() - 1.0));
  }
  return worst;
}

Dictionary::Dictionary(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.cols() < entries_.rows()) {
    throw std::domain_error("dictionary must have at least as many atoms as rows, got " +
                            std::to_string(entries_.rows()) + "x" +
                            std::to_string(entries_.cols()));
  }
  if (!entries_.allFinite()) {
    throw std::domain_error("dictionary has non-finite entries");
  }
  const double deviation = max_column_norm_deviation(entries_);
  if (deviation > kUnitTolerance) {
    throw std::domain_error("dictionary columns are not unit-norm (max deviation " +
                            std::to_string(deviation) + ")");
  }
}

Dictionary Dictionary::from_columns(Eigen::MatrixXd entries) {
  for (Eigen::Index j = 0; j < entries.cols(); ++j) {
    const double norm = entries.col(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::domain_error("column " + std::to_string(j) + " cannot be normalized");
    }
    entries.col(j) /= norm;
  }
  return Dictionary(std::move(entries));
}

Eigen::MatrixXd Dictionary::restrict_to(const Support& support) const {
  Eigen::MatrixXd out(entries_.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = atom(support[k]);
  }
  return out;
}

double snr_from_db(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

double snr_to_db(double snr) { return 10.0 * std::log10(snr); }

double ProblemConfig::snr() const {
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = sigma_a / sigma;
  return ratio * ratio;
}

void ProblemConfig::validate() const {
  if (m == 0 || p == 0) throw std::domain_error("m and p must be positive");
  if (p < m) throw std::domain_error("p must be at least m");
  if (s == 0 || s > m || s > p) {
    throw std::domain_error("sparsity s must satisfy 1 <= s <= m, got s=" + std::to_string(s));
  }
  if (!(sigma_a >= 0.0) || !std::isfinite(sigma_a)) throw std::domain_error("sigma_a must be >= 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::domain_error("sigma must be >= 0");
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::domain_error("r must be >= 0");
  if (n_samples == 0) throw std::domain_error("n_samples must be >= 1");
  if (reference.signal_dim() != m || reference.atom_count() != p) {
    throw std::domain_error("reference dictionary shape does not match (m, p)");
  }
}

ProblemConfig make_problem_config(Dictionary reference, std::size_t s, double sigma_a,
                                  double sigma, double r, std::size_t n_samples) {
  const std::size_t m = reference.signal_dim();
  const std::size_t p = reference.atom_count();
  ProblemConfig config{m, p, s, sigma_a, sigma, r, std::move(reference), n_samples};
  config.validate();
  return config;
}

std::uint64_t binomial_saturating(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // C(n, i) = C(n, i-1) * (n - i + 1) / i stays integral at every step.
  uint128 value = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    value = value * (n - k + i) / i;
    if (value > kSaturated) return kSaturated;
  }
  return static_cast<std::uint64_t>(value);
}

SupportCodec::SupportCodec(std::size_t p, std::size_t s) : p_(p), s_(s), count_(0) {
  if (s == 0 || s > p) {
    throw std::domain_error("support codec needs 1 <= s <= p, got p=" + std::to_string(p) +
                            " s=" + std::to_string(s));
  }
  count_ = binomial_saturating(p, s);
  if (count_ == kSaturated) {
    throw std::domain_error("C(p, s) exceeds the 64-bit rank range");
  }
  // Pascal's rule with saturation; rows 0..p-1 are all rank/unrank ever reads.
  const std::size_t width = s_ + 1;
  binom_.assign(p_ * width, 0);
  for (std::size_t n = 0; n < p_; ++n) {
    binom_[n * width] = 1;
    for (std::size_t k = 1; k <= std::min(n, s_); ++k) {
      const std::uint64_t left = binom_[(n - 1) * width + k - 1];
      const std::uint64_t up = (k <= n - 1) ? binom_[(n - 1) * width + k] : 0;
      binom_[n * width + k] = saturating_add(left, up);
    }
  }
}

std::uint64_t SupportCodec::choose(std::size_t n, std::size_t k) const {
  if (k > n) return 0;
  return binom_[n * (s_ + 1) + k];
}

Support SupportCodec::unrank(std::uint64_t rank) const {
  if (rank >= count_) {
    throw std::domain_error("support rank " + std::to_string(rank) + " out of range [0, " +
                            std::to_string(count_) + ")");
  }
  Support subset(s_);
  std::size_t candidate = p_;
  for (std::size_t k = s_; k >= 1; --k) {
    // Largest c < candidate with C(c, k) <= rank; C(k-1, k) = 0 guarantees a hit.
    do {
      --candidate;
    } while (choose(candidate, k) > rank);
    subset[k - 1] = candidate;
    rank -= choose(candidate, k);
  }
  return subset;
}

std::uint64_t SupportCodec::rank(const Support& subset) const {
  if (subset.size() != s_) {
    throw std::domain_error("support has " + std::to_string(subset.size()) +
                            " indices, expected " + std::to_string(s_));
  }
  Support sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::domain_error("support has repeated indices");
  }
  if (sorted.back() >= p_) {
    throw std::domain_error("support index " + std::to_string(sorted.back()) +
                            " out of range for p=" + std::to_string(p_));
  }
  std::uint64_t result = 0;
  for (std::size_t k = 0; k < s_; ++k) {
    result += choose(sorted[k], k + 1);
  }
  return result;
}

Ensemble::Ensemble(std::vector<Dictionary> members, Dictionary reference, double radius)
    : members_(std::move(members)), reference_(std::move(reference)), radius_(radius) {
  for (std::size_t l = 0; l < members_.size(); ++l) {
    const auto& member = members_[l];
    if (member.signal_dim() != reference_.signal_dim() ||
        member.atom_count() != reference_.atom_count()) {
      throw std::domain_error("ensemble member " + std::to_string(l) + " has the wrong shape");
    }
    const double distance = frobenius_distance(member, reference_);
    if (distance > radius_ + 1e-12) {
      throw std::domain_error("ensemble member " + std::to_string(l) + " lies at distance " +
                              std::to_string(distance) + " outside radius " +
                              std::to_string(radius_));
    }
  }
  for (std::size_t a = 0; a < members_.size(); ++a) {
    for (std::size_t b = a + 1; b < members_.size(); ++b) {
      separation_ = std::min(separation_, frobenius_distance(members_[a], members_[b]));
    }
  }
}

std::uint64_t Ensemble::fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const auto& member : members_) {
    const auto& entries = member.entries();
    const auto* bytes = reinterpret_cast<const unsigned char*>(entries.data());
    const std::size_t n = static_cast<std::size_t>(entries.size()) * sizeof(double);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= bytes[i];
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

Dictionary make_identity_dictionary(std::size_t m) {
  if (m == 0) throw std::domain_error("identity dictionary needs m >= 1");
  const auto n = static_cast<Eigen::Index>(m);
  return Dictionary(Eigen::MatrixXd::Identity(n, n));
}

Eigen::MatrixXd make_hadamard(std::size_t m) {
  if (m < 2 || (m & (m - 1)) != 0) {
    throw std::domain_error("Hadamard order must be a power of two >= 2, got " +
                            std::to_string(m));
  }
  Eigen::MatrixXd base(2, 2);
  base << 1, 1, 1, -1;
  Eigen::MatrixXd current = base;
  while (static_cast<std::size_t>(current.rows()) < m) {
    const Eigen::Index h = current.rows();
    Eigen::MatrixXd next(2 * h, 2 * h);
    // F_2 (x) F_h
    next.topLeftCorner(h, h) = current;
    next.topRightCorner(h, h) = current;
    next.bottomLeftCorner(h, h) = current;
    next.bottomRightCorner(h, h) = -current;
    current = std::move(next);
  }
  return current;
}

Dictionary make_dirac_hadamard_dictionary(std::size_t m) {
  const Eigen::MatrixXd hadamard = make_hadamard(m);
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd entries(n, 2 * n);
  entries.leftCols(n).setIdentity();
  entries.rightCols(n) = hadamard / std::sqrt(static_cast<double>(m));
  return Dictionary::from_columns(std::move(entries));
}

Dictionary make_random_dictionary(std::size_t m, std::size_t p, Rng& rng) {
  Eigen::MatrixXd entries(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < entries.cols(); ++j) {
    for (Eigen::Index i = 0; i < entries.rows(); ++i) entries(i, j) = rng.normal();
  }
  return Dictionary::from_columns(std::move(entries));
}

Dictionary sample_dictionary_in_ball(const Dictionary& reference, double r, Rng& rng) {
  if (!(r > 0.0)) throw std::domain_error("ball radius must be positive");
  const Eigen::MatrixXd& center = reference.entries();
  Eigen::MatrixXd direction(center.rows(), center.cols());
  for (Eigen::Index j = 0; j < direction.cols(); ++j) {
    for (Eigen::Index i = 0; i < direction.rows(); ++i) direction(i, j) = rng.normal();
  }
  double scale = r / std::sqrt(static_cast<double>(center.size()));
  for (;;) {
    Eigen::MatrixXd candidate = center + scale * direction;
    bool usable = true;
    for (Eigen::Index j = 0; j < candidate.cols(); ++j) {
      const double norm = candidate.col(j).norm();
      if (!(norm > 0.0)) {
        usable = false;
        break;
      }
      candidate.col(j) /= norm;
    }
    if (usable && frobenius_distance(candidate, center) <= r) {
      return Dictionary(std::move(candidate));
    }
    scale *= 0.5;
    if (scale == 0.0) return reference;
  }
}

double frobenius_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_same_shape(a, b, "frobenius_distance");
  return (a - b).norm();
}

double frobenius_distance(const Dictionary& a, const Dictionary& b) {
  return frobenius_distance(a.entries(), b.entries());
}

Dictionary sign_align(const Dictionary& estimate, const Dictionary& truth) {
  require_same_shape(estimate.entries(), truth.entries(), "sign_align");
  Eigen::MatrixXd aligned = estimate.entries();
  for (Eigen::Index j = 0; j < aligned.cols(); ++j) {
    const double keep = (aligned.col(j) - truth.entries().col(j)).squaredNorm();
    const double flip = (aligned.col(j) + truth.entries().col(j)).squaredNorm();
    if (flip < keep) aligned.col(j) = -aligned.col(j);
  }
  return Dictionary(std::move(aligned));
}

}  // namespace dictminimax
