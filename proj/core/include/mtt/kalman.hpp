#pragma once

#include "mtt/gaussian.hpp"

namespace mtt {

/// x_k = F x_{k-1} + B u_k + v,  v ~ N(0, Q)
/// z_k = H x_k + w,              w ~ N(0, R)
struct LinearGaussianModel {
    Mat F;
    Mat B;  ///< may be empty (no control)
    Mat Q;
    Mat H;
    Mat R;

    [[nodiscard]] Eigen::Index state_dim() const { return F.rows(); }
    [[nodiscard]] Eigen::Index measurement_dim() const { return H.rows(); }

    /// Throws DimensionError / std::invalid_argument on inconsistent shapes or
    /// non-PSD noise covariances.
    void validate() const;
};

/// Everything produced by one measurement update.
struct KalmanUpdate {
    GaussianState posterior;
    Vec residual;
    Mat innovation_cov;
    Mat gain;
};

/// Prediction step. An empty `u` means no control input.
[[nodiscard]] GaussianState kf_predict(const GaussianState& prior, const LinearGaussianModel& model,
                                       const Vec& u = Vec());

[[nodiscard]] GaussianState kf_predict(const GaussianState& prior, const Mat& F, const Mat& Q);

/// Measurement update with an explicit measurement matrix and noise.
/// The covariance is computed in Joseph form and symmetrized.
[[nodiscard]] KalmanUpdate kf_update(const GaussianState& pred, const Mat& H, const Mat& R, const Vec& z);

[[nodiscard]] KalmanUpdate kf_update(const GaussianState& pred, const LinearGaussianModel& model, const Vec& z);

}  // namespace mtt
