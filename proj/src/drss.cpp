#include <cmath>
#include <limits>

#include "pfdoa/baselines.hpp"

namespace pfdoa {

DrssTemplate drss_offline(const AnchorLayout& layout, const PathLossModel& model, const GridSpec& grid,
                          std::size_t reference_anchor) {
    if (reference_anchor >= layout.size()) throw Error("drss_offline: reference anchor out of range");
    DrssTemplate t{grid, reference_anchor, layout.size(), {}};
    const auto& anchors = layout.anchors();
    const std::size_t n = anchors.size();
    t.values.resize(grid.cell_count() * n);
    std::vector<double> rss(n);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const Vec2 center = grid.center(c);
        for (std::size_t j = 0; j < n; ++j) rss[j] = predict_rssi(model, distance(center, anchors[j].position));
        for (std::size_t j = 0; j < n; ++j)
            t.values[c * n + j] = j == reference_anchor ? 0.0 : rss[j] - rss[reference_anchor];
    }
    return t;
}

Vec2 drss_locate(const DrssTemplate& tmpl, std::span<const double> measured_rssi) {
    const std::size_t n = tmpl.anchor_count;
    if (n == 0 || tmpl.values.empty()) throw Error("drss_locate: empty template");
    if (measured_rssi.size() != n) throw Error("drss_locate: measurement/template anchor count mismatch");
    const double ref = measured_rssi[tmpl.reference_anchor];
    std::vector<double> measured(n);
    for (std::size_t j = 0; j < n; ++j) measured[j] = measured_rssi[j] - ref;

    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    const std::size_t cells = tmpl.values.size() / n;
    for (std::size_t c = 0; c < cells; ++c) {
        const double* row = tmpl.values.data() + c * n;
        double cost = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double e = row[j] - measured[j];
            cost += e * e;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = c;
        }
    }
    return tmpl.grid.center(best);
}

DrssLocator::DrssLocator(const AnchorLayout& layout, const PathLossModel& model, const GridSpec& grid) {
    for (std::size_t r = 0; r < layout.size(); ++r) templates_.push_back(drss_offline(layout, model, grid, r));
}

std::size_t DrssLocator::strongest(std::span<const double> rssi) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rssi.size(); ++i)
        if (rssi[i] > rssi[best]) best = i;
    return best;
}

Vec2 DrssLocator::locate(std::span<const double> measured_rssi) const {
    if (measured_rssi.size() != templates_.size()) throw Error("drss: measurement/anchor count mismatch");
    return drss_locate(templates_[strongest(measured_rssi)], measured_rssi);
}

} // namespace pfdoa
