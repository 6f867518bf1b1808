#include "mtt/experiment.hpp"

#include "mtt/kalman.hpp"

#include <cmath>
#include <memory>

namespace mtt {

namespace {

Mat xy_projection() {
    Mat P = Mat::Zero(2, 4);
    P(0, kPosX) = 1.0;
    P(1, kPosY) = 1.0;
    return P;
}

Mat measurement_noise(const SensorConfig& sensor) {
    Mat R = Mat::Zero(2, 2);
    R(0, 0) = sensor.r_diag[0];
    R(1, 1) = sensor.r_diag[1];
    return R;
}

GaussianState initial_belief(const Vec& truth, const InitParams& init) {
    GaussianState g{truth, Mat::Zero(4, 4)};
    g.cov.diagonal() << init.pos_var, init.vel_var, init.pos_var, init.vel_var;
    return g;
}

/// p(returns | single target at x) for the grid sensor.
double grid_likelihood(const Vec& x, const std::vector<CellReturn>& returns, const GridSensorModel& grid) {
    const int cell = grid.cell_of(x(kPosX), x(kPosY));
    double l = 1.0;
    for (const auto& r : returns) {
        const double p = detection_prob(r.cell_index == cell ? 1 : 0, grid.p_d, grid.snr);
        l *= r.value == 1 ? p : 1.0 - p;
    }
    return l;
}

struct TrackerOutput {
    std::vector<GaussianParticle> estimate;
    double cardinality = 0.0;
    bool degenerate = false;
};

class Tracker {
public:
    virtual ~Tracker() = default;
    virtual TrackerOutput step(int k, const Measurement& measurement) = 0;
};

class KalmanTracker final : public Tracker {
public:
    KalmanTracker(const ExperimentConfig& config, const Vec& x0)
        : belief_(initial_belief(x0, config.init)) {
        model_.F = cv_transition(config.scenario.tau);
        model_.Q = process_noise(config.scenario);
        model_.H = xy_projection();
        model_.R = measurement_noise(config.sensor);
        model_.validate();
    }

    TrackerOutput step(int k, const Measurement& measurement) override {
        if (k > 0) belief_ = kf_predict(belief_, model_);
        belief_ = kf_update(belief_, model_, std::get<MeanMeasurement>(measurement).z).posterior;
        return {{{1.0, belief_}}, 1.0, false};
    }

private:
    LinearGaussianModel model_;
    GaussianState belief_;
};

class ParticleTracker final : public Tracker {
public:
    ParticleTracker(const ExperimentConfig& config, const Vec& x0, Rng& rng)
        : rng_(rng), grid_(config.sensor.grid) {
        model_.F = cv_transition(config.scenario.tau);
        model_.Q = process_noise(config.scenario);
        model_.H = xy_projection();
        model_.R = measurement_noise(config.sensor);
        options_.resampling = config.pf.resampling;
        set_ = PointParticleSet::sample(initial_belief(x0, config.init), config.pf.n_particles, rng_);
    }

    TrackerOutput step(int k, const Measurement& measurement) override {
        Likelihood likelihood;
        Vec z;
        if (const auto* mean = std::get_if<MeanMeasurement>(&measurement)) {
            z = mean->z;
            likelihood = [this](const Vec& x, const Vec& zz) { return std::exp(log_pdf(zz, model_.H * x, model_.R)); };
        } else {
            returns_ = std::get<GridMeasurement>(measurement).returns;
            likelihood = [this](const Vec& x, const Vec&) { return grid_likelihood(x, returns_, grid_); };
        }
        auto result = k > 0 ? pf_step(set_, model_, likelihood, z, rng_, options_)
                            : pf_update(set_, likelihood, z, rng_, options_);
        set_ = std::move(result.set);
        return {{{1.0, result.estimate}}, 1.0, result.degenerate_likelihood};
    }

private:
    Rng& rng_;
    GridSensorModel grid_;
    LinearGaussianModel model_;
    PfOptions options_;
    PointParticleSet set_;
    std::vector<CellReturn> returns_;
};

class GpfTracker final : public Tracker {
public:
    GpfTracker(const ExperimentConfig& config, const std::vector<Vec>& x0) : config_(make_gpf_config(config)) {
        // The grid sensor starts from an empty belief and relies on births.
        if (config.sensor.kind == SensorKind::mean) {
            for (const auto& x : x0) set_.particles.push_back({config.init.weight, initial_belief(x, config.init)});
        }
    }

    TrackerOutput step(int k, const Measurement& measurement) override {
        auto result = k > 0 ? gpf_step(set_, measurement, config_) : gpf_update(set_, measurement, config_);
        set_ = std::move(result.set);
        return {set_.particles, estimate_cardinality(set_), result.degenerate};
    }

private:
    GpfConfig config_;
    GpfParticleSet set_;
};

}  // namespace

void ExperimentConfig::validate() const {
    scenario.validate();
    if (sensor.kind == SensorKind::grid) {
        sensor.grid.validate();
    } else if (!(sensor.r_diag[0] >= 0.0 && sensor.r_diag[1] >= 0.0)) {
        throw std::invalid_argument("sensor: r_diag entries must be non-negative");
    }
    if (pf.n_particles == 0) throw std::invalid_argument("pf: n_particles must be positive");
    if (!(init.pos_var >= 0.0 && init.vel_var >= 0.0)) throw std::invalid_argument("init: variances must be >= 0");
    if (!(init.weight > 0.0 && init.weight <= 1.0)) throw std::invalid_argument("init: weight must be in (0, 1]");
    if (!(metrics.cutoff > 0.0)) throw std::invalid_argument("metrics: cutoff must be positive");
    make_gpf_config(*this).validate();
}

GpfConfig make_gpf_config(const ExperimentConfig& config) {
    GpfConfig g;
    g.F = cv_transition(config.scenario.tau);
    g.Q = process_noise(config.scenario);
    g.position_projection = xy_projection();
    g.measurement_projection = xy_projection();
    g.R = measurement_noise(config.sensor);
    g.fov = config.gpf.fov;
    g.clutter_density =
        config.gpf.clutter_density > 0.0 ? config.gpf.clutter_density : 1.0 / config.scenario.workspace.area();
    if (config.sensor.kind == SensorKind::grid) g.grid = config.sensor.grid;
    g.epsilon = config.gpf.epsilon;
    g.s_max = config.gpf.s_max;
    g.d_thresh = config.gpf.d_thresh;
    g.merge_cov = config.gpf.merge_cov;
    g.w_prune = config.gpf.w_prune;
    g.n_max = config.gpf.n_max;
    g.w_birth = config.gpf.w_birth;
    return g;
}

Truth simulate_truth(const ScenarioConfig& scenario, Rng& rng) {
    Rng truth_rng(rng());
    return generate_truth(scenario, truth_rng);
}

TrackingLog run_experiment(const ExperimentConfig& config, FilterKind filter, SensorKind sensor, Rng& rng) {
    ExperimentConfig cfg = config;
    cfg.filter = filter;
    cfg.sensor.kind = sensor;
    cfg.validate();

    const int n = cfg.scenario.n_targets;
    if (filter == FilterKind::kalman && (sensor != SensorKind::mean || n != 1)) {
        throw UnsupportedCombinationError("the kalman filter requires the mean sensor and exactly one target");
    }
    if (filter == FilterKind::classical_pf && n != 1) {
        throw UnsupportedCombinationError("the particle filter tracks exactly one target");
    }
    if (sensor == SensorKind::mean && n < 1) {
        throw UnsupportedCombinationError("the mean sensor needs at least one target");
    }

    const Truth truth = simulate_truth(cfg.scenario, rng);
    Rng sensor_rng(rng());
    Rng filter_rng(rng());

    std::unique_ptr<Tracker> tracker;
    switch (filter) {
        case FilterKind::kalman: tracker = std::make_unique<KalmanTracker>(cfg, truth.front().front()); break;
        case FilterKind::classical_pf:
            tracker = std::make_unique<ParticleTracker>(cfg, truth.front().front(), filter_rng);
            break;
        case FilterKind::gpf: tracker = std::make_unique<GpfTracker>(cfg, truth.front()); break;
    }

    const MeanSensorModel mean_sensor{measurement_noise(cfg.sensor), xy_projection()};
    TrackingLog log;
    log.n_targets = n;
    log.steps.reserve(truth.size());
    for (int k = 0; k < static_cast<int>(truth.size()); ++k) {
        const auto& states = truth[static_cast<std::size_t>(k)];
        Measurement measurement;
        if (sensor == SensorKind::mean) {
            measurement = MeanMeasurement{mean_sensor_measure(states, mean_sensor, sensor_rng)};
        } else {
            const auto cells = select_cells(cfg.sensor.selection, cfg.sensor.grid, k, sensor_rng);
            measurement = GridMeasurement{grid_measure(states, cells, cfg.sensor.grid, sensor_rng)};
        }
        auto out = tracker->step(k, measurement);
        log.steps.push_back({k, states, std::move(measurement), std::move(out.estimate), out.cardinality, out.degenerate});
    }
    return log;
}

TrackingLog run_experiment(const ExperimentConfig& config, Rng& rng) {
    return run_experiment(config, config.filter, config.sensor.kind, rng);
}

MetricReport evaluate_metrics(const Truth& truth, const TrackingLog& log, const MetricConfig& config) {
    if (truth.size() != log.steps.size()) {
        throw std::invalid_argument("evaluate_metrics: truth has " + std::to_string(truth.size()) +
                                    " steps but the log has " + std::to_string(log.steps.size()));
    }
    MetricReport report;
    report.steps.reserve(truth.size());
    for (std::size_t k = 0; k < truth.size(); ++k) {
        report.steps.push_back(evaluate_step(truth[k], log.steps[k].estimate, config));
    }
    return report;
}

std::string_view to_string(FilterKind kind) {
    switch (kind) {
        case FilterKind::gpf: return "gpf";
        case FilterKind::classical_pf: return "pf";
        case FilterKind::kalman: return "kf";
    }
    return "?";
}

std::string_view to_string(SensorKind kind) {
    return kind == SensorKind::mean ? "mean" : "grid";
}

}  // namespace mtt
