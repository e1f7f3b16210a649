#include "pfdoa/likelihood.hpp"

#include <cmath>

namespace pfdoa {

namespace {
// angular residual assigned when the hypothesis sits where the predicted DOA is undefined
constexpr double kUndefinedDoaResidual = kPi / 2.0;
} // namespace

void LikelihoodConfig::validate() const {
    if (!(sigma_doa > 0.0) || !std::isfinite(sigma_doa)) throw Error("likelihood: sigma_doa must be > 0");
    if (!(sigma_rss > 0.0) || !std::isfinite(sigma_rss)) throw Error("likelihood: sigma_rss must be > 0");
}

ResidualModel::ResidualModel(const AnchorLayout& layout, const PathLossModel& model, LikelihoodConfig config)
    : layout_(&layout), model_(model), config_(config) {
    config_.validate();
    scratch_.resize(layout.size());
}

void ResidualModel::predict_into(Vec2 position, std::vector<double>& out) const {
    const auto& anchors = layout_->anchors();
    out.resize(anchors.size());
    for (std::size_t j = 0; j < anchors.size(); ++j)
        out[j] = predict_rssi(model_, distance(position, anchors[j].position));
}

Prediction ResidualModel::predict(Vec2 position) const {
    Prediction p;
    predict_into(position, p.rssi);
    p.doa = doa_from_gradient(layout_->gradient(p.rssi));
    return p;
}

std::optional<double> ResidualModel::doa_residual(const RawDoa& predicted, const MeasurementTuple& m) const {
    if (!m.smoothed_doa.valid) return std::nullopt;
    if (!predicted.valid) return kUndefinedDoaResidual;
    return wrap_angle(m.smoothed_doa.smoothed_angle_rad - predicted.angle_rad);
}

double ResidualModel::rss_residual(std::span<const double> predicted_rssi, const MeasurementTuple& m) const {
    const auto& measured = m.snapshot.rssi_by_anchor;
    if (measured.size() != predicted_rssi.size())
        throw Error("residual: snapshot has " + std::to_string(measured.size()) + " readings for " +
                    std::to_string(predicted_rssi.size()) + " anchors");
    double sum = 0.0;
    if (config_.rss_residual == RssResidual::signed_sum) {
        for (std::size_t j = 0; j < measured.size(); ++j) sum += predicted_rssi[j] - measured[j];
    } else {
        for (std::size_t j = 0; j < measured.size(); ++j) sum += std::fabs(predicted_rssi[j] - measured[j]);
    }
    return sum;
}

std::optional<double> ResidualModel::residual(Vec2 position, const MeasurementTuple& m, ResidualMode mode) const {
    predict_into(position, scratch_);
    if (mode == ResidualMode::rss) return rss_residual(scratch_, m);
    if (mode == ResidualMode::doa) return doa_residual(doa_from_gradient(layout_->gradient(scratch_)), m);
    throw Error("residual: hybrid mode has no single residual; use squared_error");
}

bool ResidualModel::usable(const MeasurementTuple& m) const {
    return config_.mode != ResidualMode::doa || m.smoothed_doa.valid;
}

std::optional<double> ResidualModel::squared_error(std::span<const double> predicted_rssi, const RawDoa& predicted_doa,
                                                   const MeasurementTuple& m) const {
    double q = 0.0;
    bool any = false;
    if (config_.mode != ResidualMode::rss) {
        if (auto e = doa_residual(predicted_doa, m)) {
            const double z = *e / config_.sigma_doa;
            q += z * z;
            any = true;
        }
    }
    if (config_.mode != ResidualMode::doa) {
        const double z = rss_residual(predicted_rssi, m) / config_.sigma_rss;
        q += z * z;
        any = true;
    }
    if (!any) return std::nullopt;
    return q;
}

std::optional<double> ResidualModel::squared_error(const Prediction& p, const MeasurementTuple& m) const {
    return squared_error(p.rssi, p.doa, m);
}

std::optional<double> ResidualModel::squared_error(Vec2 position, const MeasurementTuple& m) const {
    predict_into(position, scratch_);
    RawDoa doa;
    if (config_.mode != ResidualMode::rss) doa = doa_from_gradient(layout_->gradient(scratch_));
    return squared_error(scratch_, doa, m);
}

std::optional<double> particle_residual(Vec2 position, const MeasurementTuple& measurement,
                                        const AnchorLayout& layout, const PathLossModel& model,
                                        ResidualMode mode, RssResidual rss_residual) {
    LikelihoodConfig cfg;
    cfg.mode = mode;
    cfg.rss_residual = rss_residual;
    return ResidualModel(layout, model, cfg).residual(position, measurement, mode);
}

} // namespace pfdoa
