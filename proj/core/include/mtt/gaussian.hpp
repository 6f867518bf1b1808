#pragma once

#include <Eigen/Dense>

#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace mtt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Random source used throughout the library. Every stochastic operation takes
/// one explicitly so runs are reproducible per seed.
using Rng = std::mt19937_64;

/// Raised when a matrix that must be inverted stays singular after jitter.
class NumericalSingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when vector/matrix dimensions disagree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mean and covariance of a multivariate normal.
struct GaussianState {
    Vec mean;
    Mat cov;

    [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
};

/// A Gaussian hypothesis for one target together with the probability that
/// the target exists.
struct GaussianParticle {
    double weight = 0.0;
    GaussianState state;
};

enum class MergeCovariance {
    moment_match,  ///< mixture covariance including the spread of the means
    sum,     ///< plain sum of the component covariances
};

/// Absolute tolerance used by the PSD / symmetry checks.
inline constexpr double kPsdTolerance = 1e-9;

[[nodiscard]] Mat symmetrize(const Mat& m);

/// True when `m` is square, symmetric within `tol` and has no eigenvalue
/// below `-tol`.
[[nodiscard]] bool is_symmetric_psd(const Mat& m, double tol = kPsdTolerance);

/// Throws DimensionError unless mean and cov agree in size.
void check_dimensions(const GaussianState& g);

/// Cholesky factorization with a single jitter retry.
///
/// On failure `1e-12 * trace(m) / n` (floored at 1e-12 when the trace
/// vanishes) is added to the diagonal and the factorization is retried once.
/// A second failure raises NumericalSingularityError.
[[nodiscard]] Eigen::LLT<Mat> robust_cholesky(const Mat& m);

[[nodiscard]] double log_pdf(const Vec& x, const Vec& mean, const Mat& cov);
[[nodiscard]] double log_pdf(const GaussianState& g, const Vec& x);

/// (a - b)^T M (a - b).
[[nodiscard]] double mahalanobis_sq(const Vec& a, const Vec& b, const Mat& m);

/// Collapses weighted Gaussians into one particle. The returned weight is the
/// total weight clamped to 1; the moments use the unclamped total.
[[nodiscard]] GaussianParticle moment_match_merge(
    std::span<const GaussianParticle> particles,
    MergeCovariance mode = MergeCovariance::moment_match);

/// Draws from N(mean, cov) for a PSD (possibly singular) covariance.
class GaussianSampler {
public:
    GaussianSampler() = default;
    GaussianSampler(Vec mean, const Mat& cov);

    /// Zero-mean sampler.
    explicit GaussianSampler(const Mat& cov);

    [[nodiscard]] Vec operator()(Rng& rng) const;

    /// Sample with the mean replaced by `mean`.
    [[nodiscard]] Vec sample_around(const Vec& mean, Rng& rng) const;

    [[nodiscard]] const Mat& factor() const { return factor_; }

private:
    Vec mean_;
    Mat factor_;
};

}  // namespace mtt
