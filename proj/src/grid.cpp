#include <algorithm>
#include <cmath>

#include "pfdoa/baselines.hpp"

namespace pfdoa {

GridSpec::GridSpec(const Rect& bounds, double resolution) : bounds_(bounds), resolution_(resolution) {
    if (!bounds.has_area()) throw Error("grid: bounds have no area");
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw Error("grid: resolution must be > 0");
    // a side within 1e-9 of a whole number of cells does not get a sliver cell
    cols_ = static_cast<std::size_t>(std::max(1.0, std::ceil(bounds.width() / resolution - 1e-9)));
    rows_ = static_cast<std::size_t>(std::max(1.0, std::ceil(bounds.height() / resolution - 1e-9)));
}

Vec2 GridSpec::center(std::size_t index) const {
    const std::size_t row = index / cols_;
    const std::size_t col = index % cols_;
    return bounds_.clamp({bounds_.min.x + (static_cast<double>(col) + 0.5) * resolution_,
                          bounds_.min.y + (static_cast<double>(row) + 0.5) * resolution_});
}

std::size_t GridSpec::cell_of(Vec2 p) const {
    p = bounds_.clamp(p);
    auto col = static_cast<std::size_t>(std::floor((p.x - bounds_.min.x) / resolution_));
    auto row = static_cast<std::size_t>(std::floor((p.y - bounds_.min.y) / resolution_));
    col = std::min(col, cols_ - 1);
    row = std::min(row, rows_ - 1);
    return row * cols_ + col;
}

} // namespace pfdoa
