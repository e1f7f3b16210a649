#include <algorithm>
#include <cmath>
#include <limits>

#include "pfdoa/baselines.hpp"

namespace pfdoa {

namespace {

std::size_t argmax_first(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

/// posterior <- normalize(posterior * exp(log_post)). log_post holds the per-cell
/// log-likelihood on entry and is used as scratch.
bool bayes_update(std::vector<double>& posterior, std::vector<double>& log_post) {
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < posterior.size(); ++c) {
        const double lp = posterior[c] > 0.0 ? std::log(posterior[c]) + log_post[c]
                                              : -std::numeric_limits<double>::infinity();
        log_post[c] = lp;
        if (lp > max_log) max_log = lp;
    }
    double sum = 0.0;
    if (std::isfinite(max_log)) {
        for (std::size_t c = 0; c < posterior.size(); ++c) {
            posterior[c] = std::isnan(log_post[c]) ? 0.0 : std::exp(log_post[c] - max_log);
            sum += posterior[c];
        }
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        std::fill(posterior.begin(), posterior.end(), 1.0 / static_cast<double>(posterior.size()));
        return true;
    }
    for (double& p : posterior) p /= sum;
    return false;
}

} // namespace

std::vector<double> uniform_prior(const GridSpec& grid) {
    return std::vector<double>(grid.cell_count(), 1.0 / static_cast<double>(grid.cell_count()));
}

MarkovUpdate markov_grid_locate(const AnchorLayout& layout, const PathLossModel& model, const GridSpec& grid,
                                const MeasurementTuple& measurement, std::vector<double>& posterior,
                                const LikelihoodConfig& likelihood) {
    if (posterior.size() != grid.cell_count()) throw Error("markov: prior size does not match the grid");
    ResidualModel residuals(layout, model, likelihood);
    MarkovUpdate out;
    if (residuals.usable(measurement)) {
        std::vector<double> log_lik(grid.cell_count());
        for (std::size_t c = 0; c < grid.cell_count(); ++c)
            log_lik[c] = -0.5 * residuals.squared_error(grid.center(c), measurement).value();
        out.degenerate = bayes_update(posterior, log_lik);
    }
    out.cell = argmax_first(posterior);
    out.position = grid.center(out.cell);
    return out;
}

MarkovGridFilter::MarkovGridFilter(const AnchorLayout& layout, const PathLossModel& model, const GridSpec& grid,
                                   LikelihoodConfig likelihood, double motion_std)
    : grid_(grid), residuals_(layout, model, likelihood), anchors_(layout.size()) {
    if (!(motion_std >= 0.0) || !std::isfinite(motion_std)) throw Error("markov: motion_std must be >= 0");
    const std::size_t cells = grid_.cell_count();
    predicted_rssi_.resize(cells * anchors_);
    predicted_doa_.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        Prediction p = residuals_.predict(grid_.center(c));
        std::copy(p.rssi.begin(), p.rssi.end(), predicted_rssi_.begin() + static_cast<std::ptrdiff_t>(c * anchors_));
        predicted_doa_[c] = p.doa;
    }
    const double sigma_cells = motion_std / grid_.resolution();
    if (sigma_cells > 1e-6) {
        const int radius = static_cast<int>(std::ceil(3.0 * sigma_cells));
        double total = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            kernel_.push_back(std::exp(-0.5 * k * k / (sigma_cells * sigma_cells)));
            total += kernel_.back();
        }
        for (double& k : kernel_) k /= total;
    }
    posterior_ = uniform_prior(grid_);
    scratch_.resize(cells);
}

void MarkovGridFilter::diffuse() {
    if (kernel_.empty()) return;
    const auto cols = static_cast<std::ptrdiff_t>(grid_.cols());
    const auto rows = static_cast<std::ptrdiff_t>(grid_.rows());
    const auto radius = static_cast<std::ptrdiff_t>(kernel_.size() / 2);
    // separable blur; mass leaving the grid is dropped and restored by renormalization
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        for (std::ptrdiff_t c = 0; c < cols; ++c) {
            double acc = 0.0;
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, c - radius);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(cols - 1, c + radius);
            for (std::ptrdiff_t k = lo; k <= hi; ++k)
                acc += kernel_[static_cast<std::size_t>(k - c + radius)] * posterior_[static_cast<std::size_t>(r * cols + k)];
            scratch_[static_cast<std::size_t>(r * cols + c)] = acc;
        }
    }
    double sum = 0.0;
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, r - radius);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(rows - 1, r + radius);
        for (std::ptrdiff_t c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t k = lo; k <= hi; ++k)
                acc += kernel_[static_cast<std::size_t>(k - r + radius)] * scratch_[static_cast<std::size_t>(k * cols + c)];
            posterior_[static_cast<std::size_t>(r * cols + c)] = acc;
            sum += acc;
        }
    }
    if (sum > 0.0)
        for (double& p : posterior_) p /= sum;
}

Vec2 MarkovGridFilter::step(const MeasurementTuple& measurement) {
    diffuse();
    if (residuals_.usable(measurement)) {
        const std::size_t cells = grid_.cell_count();
        for (std::size_t c = 0; c < cells; ++c) {
            const std::span<const double> rssi(predicted_rssi_.data() + c * anchors_, anchors_);
            scratch_[c] = -0.5 * residuals_.squared_error(rssi, predicted_doa_[c], measurement).value();
        }
        if (bayes_update(posterior_, scratch_)) ++degeneracy_events_;
    }
    return grid_.center(argmax_first(posterior_));
}

} // namespace pfdoa
