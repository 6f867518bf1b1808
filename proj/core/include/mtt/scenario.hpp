#pragma once

#include "mtt/gaussian.hpp"
#include "mtt/workspace.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace mtt {

/// Ground-truth scenario: nearly-constant-velocity targets in a 2-D
/// workspace, states laid out as (x, vx, y, vy).
struct ScenarioConfig {
    int n_targets = 3;
    int n_steps = 100;
    double tau = 1.0;
    std::array<double, 4> q_diag{20.0, 0.2, 20.0, 0.2};
    Rect workspace{0.0, 0.0, 12.0, 12.0};
    std::uint64_t seed = 1;
    /// When non-empty, must hold n_targets states; otherwise initial positions
    /// are drawn uniformly over the workspace with zero velocity.
    std::vector<Vec> initial_states;

    void validate() const;
};

/// truth[step][target]
using Truth = std::vector<std::vector<Vec>>;

/// [[1, tau, 0, 0], [0, 1, 0, 0], [0, 0, 1, tau], [0, 0, 0, 1]]
[[nodiscard]] Mat cv_transition(double tau);

/// tau * diag(q_diag): q_diag is the noise intensity per unit time.
[[nodiscard]] Mat process_noise(const ScenarioConfig& config);

/// n_steps snapshots; step 0 holds the initial states, each later step is
/// x' = F x + w with w ~ N(0, process_noise(config)). Targets may leave the workspace.
[[nodiscard]] Truth generate_truth(const ScenarioConfig& config, Rng& rng);

}  // namespace mtt
