#include "mtt/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mtt {

Mat symmetrize(const Mat& m) {
    return 0.5 * (m + m.transpose());
}

bool is_symmetric_psd(const Mat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    if (!m.allFinite()) return false;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(m), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= -tol;
}

void check_dimensions(const GaussianState& g) {
    if (g.cov.rows() != g.mean.size() || g.cov.cols() != g.mean.size()) {
        throw DimensionError("gaussian: mean has dimension " + std::to_string(g.mean.size()) +
                             " but covariance is " + std::to_string(g.cov.rows()) + "x" +
                             std::to_string(g.cov.cols()));
    }
}

Eigen::LLT<Mat> robust_cholesky(const Mat& m) {
    if (m.rows() != m.cols()) throw DimensionError("robust_cholesky: matrix is not square");
    Eigen::LLT<Mat> llt(m);
    if (llt.info() == Eigen::Success && m.allFinite()) return llt;

    const auto n = static_cast<double>(m.rows());
    double jitter = 1e-12 * m.trace() / n;
    if (!(jitter > 0.0)) jitter = 1e-12;
    llt.compute(m + jitter * Mat::Identity(m.rows(), m.cols()));
    if (llt.info() != Eigen::Success || !m.allFinite()) {
        throw NumericalSingularityError("covariance is singular or not positive definite after jitter");
    }
    return llt;
}

double log_pdf(const Vec& x, const Vec& mean, const Mat& cov) {
    if (x.size() != mean.size() || cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw DimensionError("log_pdf: dimension mismatch");
    }
    const auto llt = robust_cholesky(cov);
    const Vec diff = x - mean;
    const Vec white = llt.matrixL().solve(diff);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const auto n = static_cast<double>(x.size());
    return -0.5 * (white.squaredNorm() + log_det + n * std::log(2.0 * std::numbers::pi));
}

double log_pdf(const GaussianState& g, const Vec& x) {
    return log_pdf(x, g.mean, g.cov);
}

double mahalanobis_sq(const Vec& a, const Vec& b, const Mat& m) {
    if (a.size() != b.size() || m.rows() != a.size() || m.cols() != a.size()) {
        throw DimensionError("mahalanobis_sq: dimension mismatch");
    }
    const Vec d = a - b;
    return std::max(0.0, d.dot(m * d));
}

GaussianParticle moment_match_merge(std::span<const GaussianParticle> particles, MergeCovariance mode) {
    if (particles.empty()) throw std::invalid_argument("moment_match_merge: empty particle list");
    const auto n = particles.front().state.dim();
    double total = 0.0;
    for (const auto& p : particles) {
        check_dimensions(p.state);
        if (p.state.dim() != n) throw DimensionError("moment_match_merge: particles differ in dimension");
        total += p.weight;
    }
    if (!(total > 0.0)) throw std::invalid_argument("moment_match_merge: total weight is zero");
    if (particles.size() == 1) return particles.front();

    Vec mean = Vec::Zero(n);
    for (const auto& p : particles) mean += p.weight * p.state.mean;
    mean /= total;

    Mat cov = Mat::Zero(n, n);
    for (const auto& p : particles) {
        if (mode == MergeCovariance::sum) {
            cov += p.state.cov;
        } else {
            const Vec d = p.state.mean - mean;
            cov += (p.weight / total) * (p.state.cov + d * d.transpose());
        }
    }

    return {std::min(total, 1.0), {std::move(mean), symmetrize(cov)}};
}

namespace {

Mat psd_factor(const Mat& cov) {
    if (cov.rows() != cov.cols()) throw DimensionError("GaussianSampler: covariance is not square");
    if (cov.size() == 0) return cov;
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    // Singular PSD (e.g. zero process noise): fall back to the eigen square root.
    Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(cov));
    const Vec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

GaussianSampler::GaussianSampler(Vec mean, const Mat& cov) : mean_(std::move(mean)), factor_(psd_factor(cov)) {
    if (mean_.size() != factor_.rows()) throw DimensionError("GaussianSampler: dimension mismatch");
}

GaussianSampler::GaussianSampler(const Mat& cov) : GaussianSampler(Vec::Zero(cov.rows()), cov) {}

Vec GaussianSampler::operator()(Rng& rng) const {
    return sample_around(mean_, rng);
}

Vec GaussianSampler::sample_around(const Vec& mean, Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec u(factor_.cols());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
    return mean + factor_ * u;
}

}  // namespace mtt
