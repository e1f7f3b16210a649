#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pfdoa/doa.hpp"
#include "pfdoa/radio.hpp"

namespace pfdoa {

/// What a position hypothesis is scored against.
///   doa    - wrapped angle between the measured smoothed DOA and the DOA the
///            anchors would see from the hypothesis
///   rss    - per-anchor RSSI mismatch, aggregated per RssResidual
///   hybrid - both, with independent sigmas
enum class ResidualMode { doa, rss, hybrid };

enum class RssResidual { signed_sum, abs_sum };

struct MeasurementTuple {
    RssiSnapshot snapshot;
    DoaEstimate smoothed_doa;
    std::optional<Vec2> odometry_delta;
};

struct LikelihoodConfig {
    ResidualMode mode = ResidualMode::hybrid;
    RssResidual rss_residual = RssResidual::abs_sum;
    double sigma_doa = 0.17; ///< radians
    double sigma_rss = 4.0;  ///< dBm

    void validate() const;
};

/// Noiseless observation a device at some position would produce.
struct Prediction {
    std::vector<double> rssi;
    RawDoa doa;
};

/// Shared residual machinery for the particle filter and the Markov grid.
///
/// Not thread-safe: holds a scratch buffer. Give each filter its own instance.
class ResidualModel {
public:
    ResidualModel(const AnchorLayout& layout, const PathLossModel& model, LikelihoodConfig config);

    const LikelihoodConfig& config() const { return config_; }
    const AnchorLayout& layout() const { return *layout_; }

    Prediction predict(Vec2 position) const;

    /// Wrapped angular residual (measured - predicted) in (-pi, pi]. nullopt when
    /// the measured DOA is invalid.
    std::optional<double> doa_residual(const RawDoa& predicted, const MeasurementTuple& m) const;
    double rss_residual(std::span<const double> predicted_rssi, const MeasurementTuple& m) const;

    /// Raw residual for a single-component mode (doa or rss).
    std::optional<double> residual(Vec2 position, const MeasurementTuple& m, ResidualMode mode) const;

    /// Squared standardized residual sum_c (err_c / sigma_c)^2 for the configured
    /// mode; nullopt when no component is available this step.
    std::optional<double> squared_error(Vec2 position, const MeasurementTuple& m) const;
    std::optional<double> squared_error(const Prediction& p, const MeasurementTuple& m) const;
    std::optional<double> squared_error(std::span<const double> predicted_rssi, const RawDoa& predicted_doa,
                                        const MeasurementTuple& m) const;

    /// Whether squared_error can produce a value for this measurement.
    bool usable(const MeasurementTuple& m) const;

private:
    void predict_into(Vec2 position, std::vector<double>& out) const;

    const AnchorLayout* layout_;
    PathLossModel model_;
    LikelihoodConfig config_;
    mutable std::vector<double> scratch_;
};

/// Free-function form of ResidualModel::residual for one particle position.
std::optional<double> particle_residual(Vec2 position, const MeasurementTuple& measurement,
                                        const AnchorLayout& layout, const PathLossModel& model,
                                        ResidualMode mode, RssResidual rss_residual = RssResidual::signed_sum);

} // namespace pfdoa
