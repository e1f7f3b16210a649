#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pfdoa/likelihood.hpp"

namespace pfdoa {

/// Regular grid of square cells over a rectangle. Cells are indexed row-major
/// (index = row * cols + col, rows along y), centers at (col + 1/2) * resolution
/// from the lower-left corner, clamped into the bounds.
class GridSpec {
public:
    GridSpec(const Rect& bounds, double resolution);

    const Rect& bounds() const { return bounds_; }
    double resolution() const { return resolution_; }
    std::size_t cols() const { return cols_; }
    std::size_t rows() const { return rows_; }
    std::size_t cell_count() const { return cols_ * rows_; }
    Vec2 center(std::size_t index) const;
    /// Cell containing p (p is clamped into the bounds first).
    std::size_t cell_of(Vec2 p) const;

private:
    Rect bounds_;
    double resolution_;
    std::size_t cols_;
    std::size_t rows_;
};

// ---------------------------------------------------------------- trilateration

struct TrilaterationOptions {
    int max_iterations = 100;
    double step_tolerance = 1e-8; ///< m
};

struct TrilaterationResult {
    Vec2 position;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0; ///< sum_i (|p - a_i| - d_i)^2 at `position`
};

double trilateration_objective(std::span<const Vec2> anchors, std::span<const double> distances, Vec2 p);

/// Damped Gauss-Newton on sum_i (|p - a_i| - d_i)^2 from the anchor centroid.
/// Throws on collinear anchors, fewer than 3 anchors or non-positive distances.
TrilaterationResult trilaterate(std::span<const Vec2> anchors, std::span<const double> distances,
                                const TrilaterationOptions& options = {});

// ----------------------------------------------------------- weighted centroid

/// Centroid of the anchors weighted by received power on the linear (mW) scale.
Vec2 weighted_centroid(std::span<const Vec2> anchors, std::span<const double> rssi);

// ------------------------------------------------------------- differential RSS

struct DrssTemplate {
    GridSpec grid;
    std::size_t reference_anchor = 0;
    std::size_t anchor_count = 0;
    /// values[cell * anchor_count + j] = RSS_j - RSS_ref predicted at the cell center
    std::vector<double> values;
};

DrssTemplate drss_offline(const AnchorLayout& layout, const PathLossModel& model, const GridSpec& grid,
                          std::size_t reference_anchor = 0);

/// Cell center minimizing sum_i (DRSS_T - DRSS_M)^2, using the template's
/// reference anchor for the measured differences. Ties resolve to the lowest index.
Vec2 drss_locate(const DrssTemplate& tmpl, std::span<const double> measured_rssi);

/// One template per possible reference anchor; each query references the
/// strongest measured anchor.
class DrssLocator {
public:
    DrssLocator(const AnchorLayout& layout, const PathLossModel& model, const GridSpec& grid);
    Vec2 locate(std::span<const double> measured_rssi) const;
    static std::size_t strongest(std::span<const double> rssi);

private:
    std::vector<DrssTemplate> templates_;
};

// ------------------------------------------------------------------ Markov grid

struct MarkovUpdate {
    Vec2 position;
    std::size_t cell = 0;
    bool degenerate = false;
};

/// One Bayes update of `posterior` (holds the prior on entry, must sum to 1):
/// posterior ∝ prior * exp(-q_c / 2) with q_c the squared standardized residual
/// of the cell center. Returns the max-posterior cell (lowest index on ties).
MarkovUpdate markov_grid_locate(const AnchorLayout& layout, const PathLossModel& model, const GridSpec& grid,
                                const MeasurementTuple& measurement, std::vector<double>& posterior,
                                const LikelihoodConfig& likelihood);

std::vector<double> uniform_prior(const GridSpec& grid);

/// Recursive grid filter: Gaussian diffusion of the posterior, then the
/// markov_grid_locate update with per-cell predictions cached up front.
class MarkovGridFilter {
public:
    MarkovGridFilter(const AnchorLayout& layout, const PathLossModel& model, const GridSpec& grid,
                     LikelihoodConfig likelihood, double motion_std);

    Vec2 step(const MeasurementTuple& measurement);

    const std::vector<double>& posterior() const { return posterior_; }
    const GridSpec& grid() const { return grid_; }
    std::size_t degeneracy_events() const { return degeneracy_events_; }

private:
    void diffuse();

    GridSpec grid_;
    ResidualModel residuals_;
    std::size_t anchors_;
    std::vector<double> predicted_rssi_;
    std::vector<RawDoa> predicted_doa_;
    std::vector<double> kernel_;
    std::vector<double> posterior_;
    std::vector<double> scratch_;
    std::size_t degeneracy_events_ = 0;
};

} // namespace pfdoa
