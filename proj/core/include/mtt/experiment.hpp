#pragma once

#include "mtt/gpf.hpp"
#include "mtt/metrics.hpp"
#include "mtt/particle_filter.hpp"
#include "mtt/scenario.hpp"
#include "mtt/sensors.hpp"

#include <array>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mtt {

enum class FilterKind { gpf, classical_pf, kalman };
enum class SensorKind { mean, grid };

struct SensorConfig {
    SensorKind kind = SensorKind::grid;
    /// Mean sensor noise: R = diag(r_diag) on (x, y).
    std::array<double, 2> r_diag{1.0, 1.0};
    GridSensorModel grid;
    CellSelection selection;
};

struct GpfParams {
    double epsilon = 1e-3;
    double d_thresh = 1.0;
    double w_prune = 1e-3;
    std::size_t n_max = 200;
    double w_birth = 0.1;
    std::size_t s_max = 20;
    MergeCovariance merge_cov = MergeCovariance::moment_match;
    /// 0 means 1 / workspace area.
    double clutter_density = 0.0;
    FovRegion fov;
};

struct PfParams {
    std::size_t n_particles = 2000;
    ResamplingScheme resampling = ResamplingScheme::multinomial;
};

/// Initial belief for filters that start from known target states.
struct InitParams {
    double pos_var = 1.0;
    double vel_var = 1.0;
    double weight = 1.0;
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    SensorConfig sensor;
    FilterKind filter = FilterKind::gpf;
    GpfParams gpf;
    PfParams pf;
    InitParams init;
    MetricConfig metrics;

    void validate() const;
};

/// Raised for filter/sensor/scenario combinations the runner cannot execute.
class UnsupportedCombinationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct StepRecord {
    int step = 0;
    std::vector<Vec> truth;
    Measurement measurement;
    /// Filter output as weighted Gaussians (a single weight-1 Gaussian for
    /// the single-target filters).
    std::vector<GaussianParticle> estimate;
    double cardinality_estimate = 0.0;
    bool degenerate = false;
};

struct TrackingLog {
    int n_targets = 0;
    std::vector<StepRecord> steps;
};

/// GPF configuration derived from an experiment configuration.
[[nodiscard]] GpfConfig make_gpf_config(const ExperimentConfig& config);

/// Truth for an experiment. Uses the same random stream layout as
/// run_experiment, so `simulate` and `track` agree for one seed.
[[nodiscard]] Truth simulate_truth(const ScenarioConfig& scenario, Rng& rng);

/// Truth step -> measurement -> filter step -> log record, for every step.
/// The filter's initial belief refers to step 0, which receives an update
/// without a preceding prediction.
[[nodiscard]] TrackingLog run_experiment(const ExperimentConfig& config, FilterKind filter, SensorKind sensor,
                                         Rng& rng);

[[nodiscard]] TrackingLog run_experiment(const ExperimentConfig& config, Rng& rng);

/// Per-step metrics. Throws std::invalid_argument when step counts disagree.
[[nodiscard]] MetricReport evaluate_metrics(const Truth& truth, const TrackingLog& log, const MetricConfig& config);

[[nodiscard]] std::string_view to_string(FilterKind kind);
[[nodiscard]] std::string_view to_string(SensorKind kind);

}  // namespace mtt
