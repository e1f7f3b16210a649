#include "pfdoa/radio.hpp"

#include <cmath>
#include <string>

namespace pfdoa {

PathLossModel::PathLossModel(double reference_power_dbm, double path_loss_exponent, double noise_std_dbm)
    : reference_power_dbm_(reference_power_dbm),
      path_loss_exponent_(path_loss_exponent),
      noise_std_dbm_(noise_std_dbm) {
    if (!std::isfinite(reference_power_dbm))
        throw Error("path-loss model: reference power must be finite");
    if (!std::isfinite(path_loss_exponent) || path_loss_exponent <= 0.0)
        throw Error("path-loss model: exponent must be positive, got " + std::to_string(path_loss_exponent));
    if (!std::isfinite(noise_std_dbm) || noise_std_dbm < 0.0)
        throw Error("path-loss model: noise std must be >= 0, got " + std::to_string(noise_std_dbm));
}

double predict_rssi(const PathLossModel& model, double distance) {
    if (!std::isfinite(distance))
        throw Error("predict_rssi: distance is not finite");
    const double d = std::fmax(distance, PathLossModel::kMinDistance);
    return model.reference_power_dbm() - 10.0 * model.path_loss_exponent() * std::log10(d);
}

double sample_rssi(const PathLossModel& model, double distance, std::mt19937_64& rng) {
    const double mean = predict_rssi(model, distance);
    if (model.noise_std_dbm() == 0.0) return mean;
    std::normal_distribution<double> noise(0.0, model.noise_std_dbm());
    return mean + noise(rng);
}

double invert_rssi_to_distance(const PathLossModel& model, double rssi) {
    return std::pow(10.0, (model.reference_power_dbm() - rssi) / (10.0 * model.path_loss_exponent()));
}

} // namespace pfdoa
