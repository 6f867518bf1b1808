#include "mtt/kalman.hpp"

namespace mtt {

void LinearGaussianModel::validate() const {
    const auto n = F.rows();
    if (F.cols() != n) throw DimensionError("model: F must be square");
    if (Q.rows() != n || Q.cols() != n) throw DimensionError("model: Q must be n x n");
    if (B.size() != 0 && B.rows() != n) throw DimensionError("model: B must have n rows");
    if (H.cols() != n) throw DimensionError("model: H must have n columns");
    if (R.rows() != H.rows() || R.cols() != H.rows()) throw DimensionError("model: R must be r x r");
    if (!is_symmetric_psd(Q)) throw std::invalid_argument("model: Q is not symmetric PSD");
    if (!is_symmetric_psd(R)) throw std::invalid_argument("model: R is not symmetric PSD");
}

GaussianState kf_predict(const GaussianState& prior, const Mat& F, const Mat& Q) {
    check_dimensions(prior);
    if (F.rows() != prior.dim() || F.cols() != prior.dim() || Q.rows() != prior.dim() || Q.cols() != prior.dim()) {
        throw DimensionError("kf_predict: dimension mismatch");
    }
    return {F * prior.mean, symmetrize(F * prior.cov * F.transpose() + Q)};
}

GaussianState kf_predict(const GaussianState& prior, const LinearGaussianModel& model, const Vec& u) {
    auto out = kf_predict(prior, model.F, model.Q);
    if (u.size() != 0 && model.B.size() != 0) {
        if (model.B.cols() != u.size()) throw DimensionError("kf_predict: control dimension mismatch");
        out.mean += model.B * u;
    }
    return out;
}

KalmanUpdate kf_update(const GaussianState& pred, const Mat& H, const Mat& R, const Vec& z) {
    check_dimensions(pred);
    const auto n = pred.dim();
    if (H.cols() != n || H.rows() != z.size() || R.rows() != z.size() || R.cols() != z.size()) {
        throw DimensionError("kf_update: dimension mismatch");
    }

    KalmanUpdate out;
    out.residual = z - H * pred.mean;
    out.innovation_cov = symmetrize(H * pred.cov * H.transpose() + R);
    const Mat PHt = pred.cov * H.transpose();
    // K = P H^T S^-1, solved as S K^T = H P.
    out.gain = robust_cholesky(out.innovation_cov).solve(PHt.transpose()).transpose();

    const Mat I_KH = Mat::Identity(n, n) - out.gain * H;
    out.posterior.mean = pred.mean + out.gain * out.residual;
    out.posterior.cov =
        symmetrize(I_KH * pred.cov * I_KH.transpose() + out.gain * R * out.gain.transpose());
    return out;
}

KalmanUpdate kf_update(const GaussianState& pred, const LinearGaussianModel& model, const Vec& z) {
    return kf_update(pred, model.H, model.R, z);
}

}  // namespace mtt
