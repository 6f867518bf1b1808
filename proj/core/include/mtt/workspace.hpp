#pragma once

namespace mtt {

/// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max] in workspace units.
/// Whether the upper edges are included depends on the caller: FOV tests are
/// closed, grid cells are closed-left/open-right.
struct Rect {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    [[nodiscard]] double width() const { return x_max - x_min; }
    [[nodiscard]] double height() const { return y_max - y_min; }
    [[nodiscard]] double area() const { return width() * height(); }

    [[nodiscard]] bool contains_closed(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    [[nodiscard]] bool contains_half_open(double x, double y) const {
        return x >= x_min && x < x_max && y >= y_min && y < y_max;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

}  // namespace mtt
