#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfdoa/doa.hpp"
#include "pfdoa/radio.hpp"

namespace pfdoa {

struct Workspace {
    Rect bounds;
    AnchorLayout layout;

    /// side x side square with N1..N4 on its corners.
    static Workspace square(double side);
    static Workspace four_corner(const Rect& bounds);
};

enum class TrajectoryKind { boundary, cross_coverage, diagonal, custom };

std::string to_string(TrajectoryKind kind);
TrajectoryKind parse_trajectory_kind(const std::string& name);

struct TrajectoryOptions {
    double margin = 0.5;     ///< inset from the workspace edge, m
    double lane_pitch = 1.0; ///< serpentine lane spacing, m
};

struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::custom;
    std::vector<Vec2> waypoints;
    double step_length = 0.0;
};

inline constexpr double kDefaultStepLength = 0.1;

/// boundary: closed loop around the inset rectangle.
/// diagonal: inset corner-to-corner, along the top inset edge, then the other diagonal.
/// cross_coverage: serpentine of horizontal lanes at lane_pitch.
Trajectory generate_trajectory(const Workspace& workspace, TrajectoryKind kind, double step_length,
                               const TrajectoryOptions& options = {});

/// Polyline through `vertices` resampled so consecutive points are <= step_length apart.
Trajectory custom_trajectory(const Workspace& workspace, std::span<const Vec2> vertices, double step_length);

/// One snapshot per waypoint with noisy RSSI for every anchor; deterministic in `seed`.
std::vector<RssiSnapshot> simulate_stream(const Workspace& workspace, const Trajectory& trajectory,
                                          const PathLossModel& model, std::uint64_t seed);

/// Ground-truth displacement between consecutive snapshots plus N(0, noise_std)
/// per axis; zero for the first snapshot. nullopt where either endpoint lacks ground truth.
std::vector<std::optional<Vec2>> odometry_deltas(std::span<const RssiSnapshot> snapshots, double noise_std,
                                                 std::uint64_t seed);

} // namespace pfdoa
