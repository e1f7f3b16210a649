#include "pfdoa/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pfdoa {

Workspace Workspace::square(double side) {
    return four_corner(Rect{{0.0, 0.0}, {side, side}});
}

Workspace Workspace::four_corner(const Rect& bounds) {
    return Workspace{bounds, AnchorLayout::four_corner(bounds)};
}

std::string to_string(TrajectoryKind kind) {
    switch (kind) {
    case TrajectoryKind::boundary: return "boundary";
    case TrajectoryKind::cross_coverage: return "cross_coverage";
    case TrajectoryKind::diagonal: return "diagonal";
    case TrajectoryKind::custom: return "custom";
    }
    return "custom";
}

TrajectoryKind parse_trajectory_kind(const std::string& name) {
    if (name == "boundary") return TrajectoryKind::boundary;
    if (name == "cross_coverage" || name == "cross" || name == "inside") return TrajectoryKind::cross_coverage;
    if (name == "diagonal") return TrajectoryKind::diagonal;
    if (name == "custom") return TrajectoryKind::custom;
    throw Error("unknown trajectory kind '" + name + "'");
}

namespace {

/// Points from a towards b (a included, b excluded) at most `step` apart.
void append_segment(std::vector<Vec2>& out, Vec2 a, Vec2 b, double step) {
    const double len = distance(a, b);
    if (len <= 0.0) return;
    const auto pieces = static_cast<int>(std::ceil(len / step - 1e-9));
    for (int i = 0; i < pieces; ++i) out.push_back(a + (static_cast<double>(i) / pieces) * (b - a));
}

void append_polyline(std::vector<Vec2>& out, std::span<const Vec2> vertices, double step, bool close) {
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i) append_segment(out, vertices[i], vertices[i + 1], step);
    if (!close && !vertices.empty()) out.push_back(vertices.back());
}

} // namespace

Trajectory generate_trajectory(const Workspace& workspace, TrajectoryKind kind, double step_length,
                               const TrajectoryOptions& options) {
    const Rect& b = workspace.bounds;
    if (!(step_length > 0.0) || !std::isfinite(step_length)) throw Error("trajectory: step_length must be > 0");
    if (step_length > std::min(b.width(), b.height()))
        throw Error("trajectory: step_length exceeds the workspace side");
    const double m = options.margin;
    if (!(m >= 0.0) || 2.0 * m >= std::min(b.width(), b.height()))
        throw Error("trajectory: margin leaves no interior");
    const double x0 = b.min.x + m, x1 = b.max.x - m, y0 = b.min.y + m, y1 = b.max.y - m;

    Trajectory t;
    t.kind = kind;
    t.step_length = step_length;
    switch (kind) {
    case TrajectoryKind::boundary: {
        const std::vector<Vec2> loop{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
        append_polyline(t.waypoints, loop, step_length, true);
        break;
    }
    case TrajectoryKind::diagonal: {
        const std::vector<Vec2> path{{x0, y0}, {x1, y1}, {x0, y1}, {x1, y0}};
        append_polyline(t.waypoints, path, step_length, false);
        break;
    }
    case TrajectoryKind::cross_coverage: {
        if (!(options.lane_pitch > 0.0)) throw Error("trajectory: lane_pitch must be > 0");
        std::vector<double> lanes;
        for (double y = y0; y <= y1 + 1e-9; y += options.lane_pitch) lanes.push_back(std::min(y, y1));
        if (y1 - lanes.back() > 1e-9) lanes.push_back(y1);
        std::vector<Vec2> path;
        for (std::size_t i = 0; i < lanes.size(); ++i) {
            const bool forward = i % 2 == 0;
            path.push_back({forward ? x0 : x1, lanes[i]});
            path.push_back({forward ? x1 : x0, lanes[i]});
        }
        append_polyline(t.waypoints, path, step_length, false);
        break;
    }
    case TrajectoryKind::custom:
        throw Error("trajectory: custom trajectories are built with custom_trajectory()");
    }
    return t;
}

Trajectory custom_trajectory(const Workspace& workspace, std::span<const Vec2> vertices, double step_length) {
    if (!(step_length > 0.0)) throw Error("trajectory: step_length must be > 0");
    if (vertices.empty()) throw Error("trajectory: no vertices");
    for (auto v : vertices)
        if (!workspace.bounds.contains(v)) throw Error("trajectory: vertex outside the workspace");
    Trajectory t;
    t.step_length = step_length;
    append_polyline(t.waypoints, vertices, step_length, false);
    return t;
}

std::vector<RssiSnapshot> simulate_stream(const Workspace& workspace, const Trajectory& trajectory,
                                          const PathLossModel& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto& anchors = workspace.layout.anchors();
    std::vector<RssiSnapshot> out;
    out.reserve(trajectory.waypoints.size());
    for (std::size_t i = 0; i < trajectory.waypoints.size(); ++i) {
        const Vec2 p = trajectory.waypoints[i];
        RssiSnapshot s;
        s.timestamp_index = static_cast<std::int64_t>(i);
        s.true_position = p;
        s.rssi_by_anchor.reserve(anchors.size());
        for (const auto& a : anchors) s.rssi_by_anchor.push_back(sample_rssi(model, distance(p, a.position), rng));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::optional<Vec2>> odometry_deltas(std::span<const RssiSnapshot> snapshots, double noise_std,
                                                 std::uint64_t seed) {
    if (!(noise_std >= 0.0)) throw Error("odometry: noise std must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::optional<Vec2>> out(snapshots.size());
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        if (!snapshots[i].true_position) continue;
        if (i > 0 && !snapshots[i - 1].true_position) continue; // displacement unknown
        Vec2 d;
        if (i > 0) d = *snapshots[i].true_position - *snapshots[i - 1].true_position;
        if (noise_std > 0.0) {
            d.x += noise_std * noise(rng);
            d.y += noise_std * noise(rng);
        }
        out[i] = d;
    }
    return out;
}

} // namespace pfdoa
