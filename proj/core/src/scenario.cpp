#include "mtt/scenario.hpp"

#include <stdexcept>

namespace mtt {

void ScenarioConfig::validate() const {
    if (n_targets < 0) throw std::invalid_argument("scenario: n_targets must be >= 0");
    if (n_steps < 1) throw std::invalid_argument("scenario: n_steps must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("scenario: tau must be positive");
    for (double q : q_diag)
        if (!(q >= 0.0)) throw std::invalid_argument("scenario: q_diag entries must be non-negative");
    if (!(workspace.width() > 0.0 && workspace.height() > 0.0)) {
        throw std::invalid_argument("scenario: workspace must have positive area");
    }
    if (!initial_states.empty()) {
        if (static_cast<int>(initial_states.size()) != n_targets) {
            throw std::invalid_argument("scenario: initial_states must list exactly n_targets states");
        }
        for (const auto& x : initial_states)
            if (x.size() != 4) throw DimensionError("scenario: initial states must be (x, vx, y, vy)");
    }
}

Mat cv_transition(double tau) {
    Mat F = Mat::Identity(4, 4);
    F(0, 1) = tau;
    F(2, 3) = tau;
    return F;
}

Mat process_noise(const ScenarioConfig& config) {
    Mat Q = Mat::Zero(4, 4);
    for (int i = 0; i < 4; ++i) Q(i, i) = config.tau * config.q_diag[static_cast<std::size_t>(i)];
    return Q;
}

Truth generate_truth(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    const Mat F = cv_transition(config.tau);
    const GaussianSampler noise(process_noise(config));

    std::vector<Vec> current;
    if (!config.initial_states.empty()) {
        current = config.initial_states;
    } else {
        std::uniform_real_distribution<double> ux(config.workspace.x_min, config.workspace.x_max);
        std::uniform_real_distribution<double> uy(config.workspace.y_min, config.workspace.y_max);
        for (int i = 0; i < config.n_targets; ++i) {
            Vec x = Vec::Zero(4);
            x(0) = ux(rng);
            x(2) = uy(rng);
            current.push_back(std::move(x));
        }
    }

    Truth truth;
    truth.reserve(static_cast<std::size_t>(config.n_steps));
    truth.push_back(current);
    for (int k = 1; k < config.n_steps; ++k) {
        for (auto& x : current) x = noise.sample_around(F * x, rng);
        truth.push_back(current);
    }
    return truth;
}

}  // namespace mtt
