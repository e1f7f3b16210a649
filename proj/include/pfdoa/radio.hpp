#pragma once

#include <random>

#include "pfdoa/geometry.hpp"

namespace pfdoa {

/// Log-distance path-loss model: rssi(d) = A - 10 n log10(d).
class PathLossModel {
public:
    static constexpr double kDefaultReferencePowerDbm = -40.0;
    static constexpr double kMinDistance = 0.01;

    PathLossModel() : PathLossModel(kDefaultReferencePowerDbm, 2.0, 0.0) {}
    PathLossModel(double reference_power_dbm, double path_loss_exponent, double noise_std_dbm);

    double reference_power_dbm() const { return reference_power_dbm_; }
    double path_loss_exponent() const { return path_loss_exponent_; }
    double noise_std_dbm() const { return noise_std_dbm_; }

    PathLossModel with_noise(double noise_std_dbm) const {
        return {reference_power_dbm_, path_loss_exponent_, noise_std_dbm};
    }

private:
    double reference_power_dbm_;
    double path_loss_exponent_;
    double noise_std_dbm_;
};

/// Noiseless received power at `distance` meters. Distances below 1 cm are clamped.
double predict_rssi(const PathLossModel& model, double distance);

/// predict_rssi plus zero-mean Gaussian noise with the model's std.
double sample_rssi(const PathLossModel& model, double distance, std::mt19937_64& rng);

/// Algebraic inverse of predict_rssi.
double invert_rssi_to_distance(const PathLossModel& model, double rssi);

} // namespace pfdoa
