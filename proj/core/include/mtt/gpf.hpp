#pragma once

#include "mtt/gaussian.hpp"
#include "mtt/kalman.hpp"
#include "mtt/sensors.hpp"
#include "mtt/workspace.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mtt {

/// Multi-target belief: each particle is one Gaussian target hypothesis whose
/// weight is the probability that the target exists.
struct GpfParticleSet {
    std::vector<GaussianParticle> particles;
    int step = 0;

    [[nodiscard]] std::size_t size() const { return particles.size(); }
};

/// Sensor field of view. No rectangles means the whole workspace is visible.
/// Membership is tested on the particle mean position, boundary included.
struct FovRegion {
    std::vector<Rect> rects;

    static FovRegion full_workspace() { return {}; }

    [[nodiscard]] bool is_full() const { return rects.empty(); }
    [[nodiscard]] bool contains(double x, double y) const;
};

/// One hypothesis about which FOV particles are present when interpreting a
/// measurement.
struct ExistenceCombination {
    std::vector<bool> bits;
    /// prod w_i^e_i (1 - w_i)^(1 - e_i)
    double prior = 0.0;
    /// log of the unnormalized weight prior * likelihood
    double log_weight = 0.0;
    /// normalized weight across the combination family
    double posterior_weight = 0.0;
    /// conditional posterior of every active particle; empty where e_i = 0
    std::vector<std::optional<GaussianState>> updated_states;

    [[nodiscard]] int active_count() const;
};

struct FovPartition {
    std::vector<std::size_t> in_fov;
    std::vector<std::size_t> out_of_fov;
};

/// Raised when the number of FOV particles makes 2^s enumeration unsafe.
class CombinatorialBlowupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GpfConfig {
    // Target motion.
    Mat F;
    Mat Q;

    /// 2 x n matrix extracting the (x, y) position; drives FOV membership and
    /// the merge distance.
    Mat position_projection;

    // Mean-of-states sensor: z = P * mean(x_i) + w, w ~ N(0, R).
    Mat measurement_projection;
    Mat R;
    FovRegion fov;
    /// Likelihood assigned to the all-absent combination.
    double clutter_density = 1.0 / 144.0;

    /// Grid sensor; required when updating with cell returns.
    std::optional<GridSensorModel> grid;

    double epsilon = 1e-3;
    std::size_t s_max = 20;
    double d_thresh = 1.0;
    MergeCovariance merge_cov = MergeCovariance::moment_match;
    double w_prune = 1e-3;
    std::size_t n_max = 200;
    double w_birth = 0.1;

    void validate() const;
};

struct GpfStepResult {
    GpfParticleSet set;
    /// Update skipped because no combination cleared epsilon (or every
    /// combination had zero likelihood).
    bool degenerate = false;
    /// Combination family of the mean-sensor update (empty for grid updates).
    std::vector<ExistenceCombination> combinations;
};

/// mu <- F mu, Sigma <- F Sigma F^T + Q; weights untouched; step advances.
[[nodiscard]] GpfParticleSet gpf_predict(const GpfParticleSet& set, const Mat& F, const Mat& Q);

[[nodiscard]] FovPartition select_fov_particles(const GpfParticleSet& set, const FovRegion& fov,
                                                const Mat& position_projection);

/// Every existence vector whose Bernoulli prior exceeds `epsilon`, in
/// depth-first order with the "present" branch first. Throws
/// CombinatorialBlowupError when there are more than `s_max` particles.
[[nodiscard]] std::vector<ExistenceCombination> enumerate_combinations(
    std::span<const GaussianParticle> fov_particles, double epsilon, std::size_t s_max = 20);

/// Kalman update of active particle `j` treating the other active particles
/// as part of the measurement condition:
///   H = P / s_e,  z' = z - P sum_{i!=j} e_i mu_i / s_e,
///   R_eff = P (sum_{i!=j} e_i Sigma_i) P^T / s_e^2 + R,   s_e = sum e_i.
[[nodiscard]] KalmanUpdate conditional_kf_update(std::size_t j, const std::vector<bool>& bits,
                                                 std::span<const GaussianParticle> fov_particles, const Vec& z,
                                                 const Mat& R, const Mat& measurement_projection);

/// log of prior * N(z; mu_c, Sigma_c) using the predicted moments, with
/// mu_c = P sum e_i mu_i / s_e and Sigma_c = P (sum e_i Sigma_i) P^T / s_e^2 + R.
/// The all-absent combination scores log(prior * clutter_density).
[[nodiscard]] double combination_log_weight(const ExistenceCombination& combination,
                                            std::span<const GaussianParticle> fov_particles, const Vec& z,
                                            const Mat& R, const Mat& measurement_projection, double clutter_density);

[[nodiscard]] double combination_weight(const ExistenceCombination& combination,
                                        std::span<const GaussianParticle> fov_particles, const Vec& z, const Mat& R,
                                        const Mat& measurement_projection, double clutter_density);

/// Sets posterior_weight from log_weight so the family sums to 1. Returns
/// false (weights left at zero) when every log weight is -inf.
bool normalize_combinations(std::vector<ExistenceCombination>& combinations);

/// Posterior existence of particle i is the total normalized weight of the
/// combinations where it is present; its state is the moment-matched mixture
/// of its conditional posteriors over those combinations. Particles that are
/// never present keep their predicted weight and state.
[[nodiscard]] std::vector<GaussianParticle> marginalize_existence(
    std::span<const ExistenceCombination> combinations, std::span<const GaussianParticle> fov_particles);

/// Greedily merges the closest pair (position Mahalanobis distance with
/// M = (Sigma_i + Sigma_j)^-1) while that distance is below `d_thresh`.
[[nodiscard]] GpfParticleSet merge_close_particles(const GpfParticleSet& set, double d_thresh,
                                                   const Mat& position_projection,
                                                   MergeCovariance mode = MergeCovariance::moment_match);

/// Sum of existence weights.
[[nodiscard]] double estimate_cardinality(const GpfParticleSet& set);

/// Appends births, drops weights below `w_prune`, then keeps the `n_max`
/// heaviest particles (original order preserved among survivors).
[[nodiscard]] GpfParticleSet birth_and_prune(const GpfParticleSet& set, std::span<const GaussianParticle> births,
                                             double w_prune, std::size_t n_max);

/// Per-cell Bayes update of existence weights from binary returns. A particle
/// whose mean lies in a measured cell explains a detection with probability
/// p_d; otherwise the cell behaves as empty (false-alarm rate).
[[nodiscard]] GpfParticleSet grid_existence_update(const GpfParticleSet& set, std::span<const CellReturn> returns,
                                                   const GridSensorModel& grid, const Mat& position_projection);

/// One particle per positive return at the cell center, zero velocity,
/// covariance diag(w^2/12, 1, h^2/12, 1). Assumes the (x, vx, y, vy) layout.
[[nodiscard]] std::vector<GaussianParticle> grid_births(std::span<const CellReturn> returns,
                                                        const GridSensorModel& grid, double w_birth);

/// Measurement update only (no prediction).
[[nodiscard]] GpfStepResult gpf_update(const GpfParticleSet& predicted, const Measurement& measurement,
                                       const GpfConfig& config);

/// gpf_predict followed by gpf_update.
[[nodiscard]] GpfStepResult gpf_step(const GpfParticleSet& set, const Measurement& measurement,
                                     const GpfConfig& config);

}  // namespace mtt
