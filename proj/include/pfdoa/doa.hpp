#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfdoa/geometry.hpp"

namespace pfdoa {

struct Anchor {
    std::string id;
    Vec2 position;
};

enum class LayoutKind { four_corner, general };

/// Fixed anchor placement plus the linear stencil that turns per-anchor RSSI
/// into a spatial gradient.
///
/// four_corner anchors are ordered N1 bottom-left, N2 top-left, N3 top-right,
/// N4 bottom-right and use the central-difference stencil. general layouts
/// (>= 3 non-collinear anchors) use the gradient of a least-squares plane fit,
/// which coincides with the central difference on a symmetric stencil.
class AnchorLayout {
public:
    static AnchorLayout four_corner(const Rect& rect, std::vector<std::string> ids = {"N1", "N2", "N3", "N4"});
    static AnchorLayout general(std::vector<Anchor> anchors);
    /// Validates `anchors` against `kind`; four_corner anchors must sit on rectangle corners in N1..N4 order.
    static AnchorLayout make(std::vector<Anchor> anchors, LayoutKind kind);

    const std::vector<Anchor>& anchors() const { return anchors_; }
    std::size_t size() const { return anchors_.size(); }
    LayoutKind kind() const { return kind_; }
    double delta_x() const { return delta_x_; }
    double delta_y() const { return delta_y_; }
    /// Index of the anchor with the given id, or nullopt.
    std::optional<std::size_t> index_of(const std::string& id) const;

    /// Gradient of an RSSI vector (one entry per anchor), dBm/m.
    Vec2 gradient(std::span<const double> rssi) const;

private:
    AnchorLayout() = default;
    void build_plane_fit();

    std::vector<Anchor> anchors_;
    LayoutKind kind_ = LayoutKind::general;
    double delta_x_ = 0.0;
    double delta_y_ = 0.0;
    std::vector<double> coef_x_;
    std::vector<double> coef_y_;
};

struct RssiSnapshot {
    std::int64_t timestamp_index = 0;
    std::vector<double> rssi_by_anchor;
    std::optional<Vec2> true_position;
};

struct DoaEstimate {
    double raw_angle_rad = 0.0;
    double smoothed_angle_rad = 0.0;
    Vec2 gradient;
    bool valid = false;
};

/// Exponentially weighted circular mean over the last `window` raw angles.
class SmoothingConfig {
public:
    SmoothingConfig() : SmoothingConfig(3, 0.99) {}
    SmoothingConfig(int window, double decay);

    int window() const { return window_; }
    double decay() const { return decay_; }
    /// 1 / sum_{i<window} decay^i
    double normalizer() const { return normalizer_; }

    void set_window(int window) { *this = SmoothingConfig(window, decay_); }
    void set_decay(double decay) { *this = SmoothingConfig(window_, decay); }

private:
    int window_;
    double decay_;
    double normalizer_;
};

inline constexpr double kGradientEpsilon = 1e-9;

/// Throws Error on anchor-count mismatch or non-finite values.
Vec2 rss_gradient(const AnchorLayout& layout, const RssiSnapshot& snapshot);

struct RawDoa {
    double angle_rad = 0.0;
    bool valid = false;
};

RawDoa doa_from_gradient(Vec2 gradient);

/// `newest_first` holds raw angles (nullopt = invalid sample). Returns nullopt
/// when no valid sample is within reach.
std::optional<double> smooth_doa(std::span<const std::optional<double>> newest_first, const SmoothingConfig& config);

/// Per-track raw DOA history feeding smooth_doa.
class DoaTracker {
public:
    DoaTracker(const AnchorLayout& layout, SmoothingConfig config);

    DoaEstimate update(const RssiSnapshot& snapshot);
    void reset() { history_.clear(); }

private:
    const AnchorLayout* layout_;
    SmoothingConfig config_;
    std::deque<std::optional<double>> history_;
};

} // namespace pfdoa
