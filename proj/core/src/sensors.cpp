#include "mtt/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mtt {

Rect GridSensorModel::cell(int index) const {
    if (index < 0 || index >= cell_count()) {
        throw std::out_of_range("grid: cell index " + std::to_string(index) + " outside [0, " +
                                std::to_string(cell_count()) + ")");
    }
    const int row = index / cols;
    const int col = index % cols;
    const double w = cell_width();
    const double h = cell_height();
    // The last row/column ends exactly on the workspace edge.
    return {workspace.x_min + col * w, workspace.y_min + row * h,
            col + 1 == cols ? workspace.x_max : workspace.x_min + (col + 1) * w,
            row + 1 == rows ? workspace.y_max : workspace.y_min + (row + 1) * h};
}

int GridSensorModel::cell_of(double x, double y) const {
    if (!workspace.contains_half_open(x, y)) return -1;
    int col = std::clamp(static_cast<int>(std::floor((x - workspace.x_min) / cell_width())), 0, cols - 1);
    int row = std::clamp(static_cast<int>(std::floor((y - workspace.y_min) / cell_height())), 0, rows - 1);
    // Correct floor() rounding against the exact cell bounds.
    Rect c = cell(row * cols + col);
    if (x < c.x_min && col > 0) --col;
    if (x >= c.x_max && col + 1 < cols) ++col;
    if (y < c.y_min && row > 0) --row;
    if (y >= c.y_max && row + 1 < rows) ++row;
    return row * cols + col;
}

void GridSensorModel::validate() const {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("grid: rows and cols must be positive");
    if (!(workspace.width() > 0.0 && workspace.height() > 0.0)) {
        throw std::invalid_argument("grid: workspace must have positive area");
    }
    if (!(p_d > 0.0 && p_d < 1.0)) throw std::invalid_argument("grid: p_d must be in (0, 1)");
    if (!(snr > 0.0)) throw std::invalid_argument("grid: snr must be positive");
    if (m_cells <= 0 || m_cells > cell_count()) throw std::invalid_argument("grid: m_cells must be in [1, rows*cols]");
}

Vec mean_sensor_measure(std::span<const Vec> true_states, const MeanSensorModel& model, Rng& rng) {
    if (true_states.empty()) throw std::invalid_argument("mean_sensor_measure: no targets, mean is undefined");
    Vec mean = Vec::Zero(true_states.front().size());
    for (const auto& x : true_states) {
        if (x.size() != mean.size()) throw DimensionError("mean_sensor_measure: state dimension mismatch");
        mean += x;
    }
    mean /= static_cast<double>(true_states.size());
    if (model.position_projection.cols() != mean.size()) {
        throw DimensionError("mean_sensor_measure: projection does not match state dimension");
    }
    const GaussianSampler noise(model.R);
    return model.position_projection * mean + noise(rng);
}

double detection_prob(int targets, double p_d, double snr) {
    if (targets < 0) throw std::invalid_argument("detection_prob: negative target count");
    const double exponent = (1.0 + snr) / (1.0 + targets * snr);
    return std::pow(p_d, exponent);
}

int cell_occupancy(std::span<const Vec> true_states, const Rect& cell) {
    return static_cast<int>(std::count_if(true_states.begin(), true_states.end(), [&](const Vec& x) {
        return cell.contains_half_open(x(kPosX), x(kPosY));
    }));
}

std::vector<CellReturn> grid_measure(std::span<const Vec> true_states, std::span<const int> cells,
                                     const GridSensorModel& model, Rng& rng) {
    if (static_cast<int>(cells.size()) > model.m_cells) {
        throw std::invalid_argument("grid_measure: " + std::to_string(cells.size()) + " cells requested, sensor measures at most " +
                                    std::to_string(model.m_cells));
    }
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<CellReturn> out;
    out.reserve(cells.size());
    for (int c : cells) {
        const int occupancy = cell_occupancy(true_states, model.cell(c));
        const double p = detection_prob(occupancy, model.p_d, model.snr);
        out.push_back({c, uniform(rng) < p ? 1 : 0});
    }
    return out;
}

std::vector<int> select_cells(const CellSelection& selection, const GridSensorModel& model, int step, Rng& rng) {
    const int total = model.cell_count();
    const int m = std::min(model.m_cells, total);
    std::vector<int> out;
    switch (selection.strategy) {
        case CellStrategy::random: {
            std::vector<int> all(total);
            std::iota(all.begin(), all.end(), 0);
            // Partial Fisher-Yates: the first m entries are a uniform draw without replacement.
            for (int i = 0; i < m; ++i) {
                std::uniform_int_distribution<int> pick(i, total - 1);
                std::swap(all[i], all[pick(rng)]);
            }
            out.assign(all.begin(), all.begin() + m);
            break;
        }
        case CellStrategy::round_robin: {
            const long start = (static_cast<long>(step) * m) % total;
            for (int i = 0; i < m; ++i) out.push_back(static_cast<int>((start + i) % total));
            break;
        }
        case CellStrategy::fixed_list: {
            for (int c : selection.fixed_cells) {
                if (static_cast<int>(out.size()) == m) break;
                if (c < 0 || c >= total) throw std::out_of_range("select_cells: fixed cell index out of range");
                if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
            }
            break;
        }
    }
    return out;
}

}  // namespace mtt
