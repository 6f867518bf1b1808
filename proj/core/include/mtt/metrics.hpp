#pragma once

#include "mtt/gaussian.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mtt {

struct MetricConfig {
    /// Particles at or above this existence weight count as target estimates.
    double extraction_threshold = 0.5;
    /// Distance cap c: matched errors are capped at c, missed truths cost c.
    double cutoff = 5.0;
    /// Also compute OSPA (order 2, cutoff c).
    bool ospa = false;
};

struct StepMetrics {
    double rmse = 0.0;
    double cardinality_error = 0.0;
    std::optional<double> ospa;
};

struct MetricReport {
    std::vector<StepMetrics> steps;
};

/// sqrt((sum over an optimal truth/estimate matching of min(d, c)^2
///        + c^2 * unmatched truths) / n_truths); 0 when there are no truths.
[[nodiscard]] double assignment_rmse(std::span<const Eigen::Vector2d> truths,
                                     std::span<const Eigen::Vector2d> estimates, double cutoff);

/// OSPA distance of order 2.
[[nodiscard]] double ospa_distance(std::span<const Eigen::Vector2d> truths,
                                   std::span<const Eigen::Vector2d> estimates, double cutoff);

/// (x, y) position of an (x, vx, y, vy) state.
[[nodiscard]] Eigen::Vector2d position_xy(const Vec& state);

/// Metrics for a single step given true states and the filter's particle summary.
[[nodiscard]] StepMetrics evaluate_step(std::span<const Vec> truth, std::span<const GaussianParticle> estimate,
                                        const MetricConfig& config);

}  // namespace mtt
