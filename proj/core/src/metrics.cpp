#include "mtt/metrics.hpp"

#include "mtt/assignment.hpp"
#include "mtt/sensors.hpp"

#include <algorithm>
#include <cmath>

namespace mtt {

namespace {

Eigen::MatrixXd capped_sq_distances(std::span<const Eigen::Vector2d> truths,
                                    std::span<const Eigen::Vector2d> estimates, double cutoff) {
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(truths.size()), static_cast<Eigen::Index>(estimates.size()));
    const double cap_sq = cutoff * cutoff;
    for (std::size_t i = 0; i < truths.size(); ++i)
        for (std::size_t j = 0; j < estimates.size(); ++j)
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::min((truths[i] - estimates[j]).squaredNorm(), cap_sq);
    return cost;
}

}  // namespace

Eigen::Vector2d position_xy(const Vec& state) {
    return {state(kPosX), state(kPosY)};
}

double assignment_rmse(std::span<const Eigen::Vector2d> truths, std::span<const Eigen::Vector2d> estimates,
                       double cutoff) {
    if (truths.empty()) return 0.0;
    const auto cost = capped_sq_distances(truths, estimates, cutoff);
    const auto assignment = solve_assignment(cost);
    // Per-truth costs summed in sorted order, so that equally good
    // assignments give bit-identical totals.
    std::vector<double> per_truth(truths.size(), cutoff * cutoff);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const int j = assignment.row_to_col[i];
        if (j >= 0) per_truth[i] = cost(static_cast<Eigen::Index>(i), j);
    }
    std::sort(per_truth.begin(), per_truth.end());
    double total = 0.0;
    for (double c : per_truth) total += c;
    return std::min(cutoff, std::sqrt(total / static_cast<double>(truths.size())));
}

double ospa_distance(std::span<const Eigen::Vector2d> truths, std::span<const Eigen::Vector2d> estimates,
                     double cutoff) {
    const auto n = std::max(truths.size(), estimates.size());
    if (n == 0) return 0.0;
    const auto assignment = solve_assignment(capped_sq_distances(truths, estimates, cutoff));
    const double unmatched = static_cast<double>(n - std::min(truths.size(), estimates.size()));
    return std::sqrt((assignment.cost + unmatched * cutoff * cutoff) / static_cast<double>(n));
}

StepMetrics evaluate_step(std::span<const Vec> truth, std::span<const GaussianParticle> estimate,
                          const MetricConfig& config) {
    std::vector<Eigen::Vector2d> truths;
    truths.reserve(truth.size());
    for (const auto& x : truth) truths.push_back(position_xy(x));

    std::vector<Eigen::Vector2d> extracted;
    double cardinality = 0.0;
    for (const auto& p : estimate) {
        cardinality += p.weight;
        if (p.weight >= config.extraction_threshold) extracted.push_back(position_xy(p.state.mean));
    }

    StepMetrics out;
    out.rmse = assignment_rmse(truths, extracted, config.cutoff);
    out.cardinality_error = std::abs(cardinality - static_cast<double>(truth.size()));
    if (config.ospa) out.ospa = ospa_distance(truths, extracted, config.cutoff);
    return out;
}

}  // namespace mtt
