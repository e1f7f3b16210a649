#include "pfdoa/doa.hpp"

#include <algorithm>
#include <cmath>

namespace pfdoa {

namespace {

constexpr double kCornerTolerance = 1e-6;

bool near(Vec2 a, Vec2 b, double scale) {
    return distance(a, b) <= kCornerTolerance * std::max(1.0, scale);
}

} // namespace

AnchorLayout AnchorLayout::four_corner(const Rect& rect, std::vector<std::string> ids) {
    if (!rect.has_area()) throw Error("four-corner layout: rectangle has no area");
    if (ids.size() != 4) throw Error("four-corner layout: expected 4 anchor ids");
    std::vector<Anchor> anchors{
        {ids[0], rect.min},
        {ids[1], {rect.min.x, rect.max.y}},
        {ids[2], rect.max},
        {ids[3], {rect.max.x, rect.min.y}},
    };
    return make(std::move(anchors), LayoutKind::four_corner);
}

AnchorLayout AnchorLayout::general(std::vector<Anchor> anchors) {
    return make(std::move(anchors), LayoutKind::general);
}

AnchorLayout AnchorLayout::make(std::vector<Anchor> anchors, LayoutKind kind) {
    AnchorLayout layout;
    layout.anchors_ = std::move(anchors);
    layout.kind_ = kind;
    for (const auto& a : layout.anchors_) {
        if (!std::isfinite(a.position.x) || !std::isfinite(a.position.y))
            throw Error("anchor layout: anchor '" + a.id + "' has a non-finite position");
    }
    for (std::size_t i = 0; i < layout.anchors_.size(); ++i)
        for (std::size_t j = i + 1; j < layout.anchors_.size(); ++j)
            if (layout.anchors_[i].id == layout.anchors_[j].id)
                throw Error("anchor layout: duplicate anchor id '" + layout.anchors_[i].id + "'");

    if (kind == LayoutKind::four_corner) {
        if (layout.anchors_.size() != 4) throw Error("four-corner layout requires exactly 4 anchors");
        const Vec2 n1 = layout.anchors_[0].position;
        const Vec2 n3 = layout.anchors_[2].position;
        const double dx = n3.x - n1.x;
        const double dy = n3.y - n1.y;
        const double scale = std::max(std::fabs(dx), std::fabs(dy));
        if (!(dx > 0.0 && dy > 0.0))
            throw Error("four-corner layout: N1 must be bottom-left and N3 top-right");
        if (!near(layout.anchors_[1].position, {n1.x, n3.y}, scale) ||
            !near(layout.anchors_[3].position, {n3.x, n1.y}, scale))
            throw Error("four-corner layout: anchors are not the corners of an axis-aligned rectangle in N1..N4 order");
        layout.delta_x_ = dx;
        layout.delta_y_ = dy;
        // g_x = (S3 - S2 + S4 - S1) / 2dx ; g_y = (S3 - S4 + S2 - S1) / 2dy
        layout.coef_x_ = {-1.0 / (2 * dx), -1.0 / (2 * dx), 1.0 / (2 * dx), 1.0 / (2 * dx)};
        layout.coef_y_ = {-1.0 / (2 * dy), 1.0 / (2 * dy), 1.0 / (2 * dy), -1.0 / (2 * dy)};
    } else {
        if (layout.anchors_.size() < 3) throw Error("general layout requires at least 3 anchors");
        layout.build_plane_fit();
    }
    return layout;
}

void AnchorLayout::build_plane_fit() {
    const auto n = static_cast<double>(anchors_.size());
    Vec2 mean;
    double min_x = anchors_[0].position.x, max_x = min_x, min_y = anchors_[0].position.y, max_y = min_y;
    for (const auto& a : anchors_) {
        mean += a.position;
        min_x = std::min(min_x, a.position.x);
        max_x = std::max(max_x, a.position.x);
        min_y = std::min(min_y, a.position.y);
        max_y = std::max(max_y, a.position.y);
    }
    mean = (1.0 / n) * mean;
    delta_x_ = max_x - min_x;
    delta_y_ = max_y - min_y;

    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& a : anchors_) {
        const Vec2 d = a.position - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    const double det = sxx * syy - sxy * sxy;
    const double scale = (sxx + syy) * (sxx + syy);
    if (!(scale > 0.0) || det <= 1e-12 * scale)
        throw Error("general layout: anchors are collinear");

    coef_x_.clear();
    coef_y_.clear();
    for (const auto& a : anchors_) {
        const Vec2 d = a.position - mean;
        coef_x_.push_back((syy * d.x - sxy * d.y) / det);
        coef_y_.push_back((sxx * d.y - sxy * d.x) / det);
    }
}

std::optional<std::size_t> AnchorLayout::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < anchors_.size(); ++i)
        if (anchors_[i].id == id) return i;
    return std::nullopt;
}

Vec2 AnchorLayout::gradient(std::span<const double> rssi) const {
    Vec2 g;
    for (std::size_t j = 0; j < coef_x_.size(); ++j) {
        g.x += coef_x_[j] * rssi[j];
        g.y += coef_y_[j] * rssi[j];
    }
    return g;
}

Vec2 rss_gradient(const AnchorLayout& layout, const RssiSnapshot& snapshot) {
    if (snapshot.rssi_by_anchor.size() != layout.size())
        throw Error("rss_gradient: snapshot has " + std::to_string(snapshot.rssi_by_anchor.size()) +
                    " readings for " + std::to_string(layout.size()) + " anchors");
    for (double v : snapshot.rssi_by_anchor)
        if (!std::isfinite(v)) throw Error("rss_gradient: non-finite RSSI value");
    return layout.gradient(snapshot.rssi_by_anchor);
}

RawDoa doa_from_gradient(Vec2 gradient) {
    if (!(norm(gradient) >= kGradientEpsilon)) return {0.0, false};
    return {wrap_angle(std::atan2(gradient.y, gradient.x)), true};
}

SmoothingConfig::SmoothingConfig(int window, double decay) : window_(window), decay_(decay) {
    if (window < 1) throw Error("smoothing window must be >= 1");
    if (!(decay > 0.0 && decay <= 1.0)) throw Error("smoothing decay must be in (0, 1]");
    double sum = 0.0, w = 1.0;
    for (int i = 0; i < window; ++i, w *= decay) sum += w;
    normalizer_ = 1.0 / sum;
}

std::optional<double> smooth_doa(std::span<const std::optional<double>> newest_first, const SmoothingConfig& config) {
    double c = 0.0, s = 0.0, weight = 1.0, total = 0.0;
    int used = 0;
    for (const auto& angle : newest_first) {
        if (used == config.window()) break;
        if (!angle) continue;
        c += weight * std::cos(*angle);
        s += weight * std::sin(*angle);
        total += weight;
        weight *= config.decay();
        ++used;
    }
    if (used == 0) return std::nullopt;
    // warm-up renormalizes over the available count
    const double k = used == config.window() ? config.normalizer() : 1.0 / total;
    c *= k;
    s *= k;
    if (std::hypot(c, s) < 1e-15) return std::nullopt;
    return wrap_angle(std::atan2(s, c));
}

DoaTracker::DoaTracker(const AnchorLayout& layout, SmoothingConfig config) : layout_(&layout), config_(config) {}

DoaEstimate DoaTracker::update(const RssiSnapshot& snapshot) {
    DoaEstimate out;
    out.gradient = rss_gradient(*layout_, snapshot);
    const RawDoa raw = doa_from_gradient(out.gradient);
    history_.push_front(raw.valid ? std::optional<double>(raw.angle_rad) : std::nullopt);
    // keep a bounded tail; invalid entries do not count toward the window
    const auto cap = static_cast<std::size_t>(4 * config_.window() + 16);
    while (history_.size() > cap) history_.pop_back();

    std::vector<std::optional<double>> hist(history_.begin(), history_.end());
    const auto smoothed = smooth_doa(hist, config_);
    out.raw_angle_rad = raw.angle_rad;
    out.valid = raw.valid && smoothed.has_value();
    out.smoothed_angle_rad = smoothed.value_or(0.0);
    return out;
}

} // namespace pfdoa
