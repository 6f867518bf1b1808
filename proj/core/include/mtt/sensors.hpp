#pragma once

#include "mtt/gaussian.hpp"
#include "mtt/workspace.hpp"

#include <span>
#include <variant>
#include <vector>

namespace mtt {

/// z = P * (1/N) sum_i x_i + w,  w ~ N(0, R)
struct MeanSensorModel {
    Mat R;
    /// r x n matrix picking the measured components out of a state.
    Mat position_projection;
};

/// Binary detector over a rows x cols grid of cells tiling the workspace.
/// Cells are indexed row-major starting at the (x_min, y_min) corner:
/// index = row * cols + col, with row along y and col along x.
struct GridSensorModel {
    Rect workspace{0.0, 0.0, 12.0, 12.0};
    int rows = 12;
    int cols = 12;
    double p_d = 0.9;
    double snr = 3.0;
    int m_cells = 12;

    [[nodiscard]] int cell_count() const { return rows * cols; }
    [[nodiscard]] double cell_width() const { return workspace.width() / cols; }
    [[nodiscard]] double cell_height() const { return workspace.height() / rows; }

    /// Bounds of cell `index` as [x_ul, y_ul, x_dr, y_dr].
    [[nodiscard]] Rect cell(int index) const;

    /// Index of the cell containing (x, y), or -1 outside the workspace.
    [[nodiscard]] int cell_of(double x, double y) const;

    void validate() const;
};

struct CellReturn {
    int cell_index = 0;
    int value = 0;  ///< 0 = no detection, 1 = detection

    friend bool operator==(const CellReturn&, const CellReturn&) = default;
};

struct MeanMeasurement {
    Vec z;
};

struct GridMeasurement {
    std::vector<CellReturn> returns;
};

using Measurement = std::variant<MeanMeasurement, GridMeasurement>;

/// Projection of the arithmetic mean of the true states plus N(0, R) noise.
/// Throws std::invalid_argument when there are no targets.
[[nodiscard]] Vec mean_sensor_measure(std::span<const Vec> true_states, const MeanSensorModel& model, Rng& rng);

/// Probability of a detection in a cell holding `targets` targets. With no
/// targets this is the false-alarm rate p_d^(1 + snr); otherwise
/// p_d^((1 + snr) / (1 + targets * snr)).
[[nodiscard]] double detection_prob(int targets, double p_d, double snr);

/// Number of states whose (x, y) position lies in the cell, using
/// x in [x_ul, x_dr), y in [y_ul, y_dr). States use the (x, vx, y, vy)
/// layout.
[[nodiscard]] int cell_occupancy(std::span<const Vec> true_states, const Rect& cell);

/// One Bernoulli return per requested cell. Throws std::out_of_range for an
/// invalid index and std::invalid_argument when more than m_cells are asked.
[[nodiscard]] std::vector<CellReturn> grid_measure(std::span<const Vec> true_states, std::span<const int> cells,
                                                   const GridSensorModel& model, Rng& rng);

enum class CellStrategy { random, round_robin, fixed_list };

struct CellSelection {
    CellStrategy strategy = CellStrategy::random;
    std::vector<int> fixed_cells;  ///< used by fixed_list
};

/// Cells to measure at time `step`: at most m_cells distinct indices.
/// random draws uniformly without replacement; round_robin returns the block
/// starting at (step * m_cells) mod cell_count; fixed_list returns the first
/// m_cells entries of the list.
[[nodiscard]] std::vector<int> select_cells(const CellSelection& selection, const GridSensorModel& model, int step,
                                            Rng& rng);

/// State layout used by the simulator and sensors: (x, vx, y, vy).
inline constexpr int kPosX = 0;
inline constexpr int kPosY = 2;

}  // namespace mtt
