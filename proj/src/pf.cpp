#include "pfdoa/pf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pfdoa {

void PfConfig::validate() const {
    if (num_particles < 2) throw Error("pf: num_particles must be >= 2");
    if (likelihood_window < 1) throw Error("pf: likelihood_window must be >= 1");
    if (!(jitter_std >= 0.0) || !std::isfinite(jitter_std)) throw Error("pf: jitter_std must be >= 0");
    if (!(ess_threshold >= 0.0 && ess_threshold <= 1.0)) throw Error("pf: ess_threshold must be in [0, 1]");
    likelihood.validate();
}

ResidualHistory::ResidualHistory(std::size_t particles, int window)
    : particles_(particles), window_(window), values_(particles * static_cast<std::size_t>(window), 0.0) {
    if (window < 1) throw Error("residual history: window must be >= 1");
}

void ResidualHistory::push(std::span<const double> squared_errors) {
    if (squared_errors.size() != particles_) throw Error("residual history: size mismatch");
    head_ = (head_ + 1) % window_;
    const auto w = static_cast<std::size_t>(window_);
    for (std::size_t i = 0; i < particles_; ++i) values_[i * w + static_cast<std::size_t>(head_)] = squared_errors[i];
    count_ = std::min(count_ + 1, window_);
}

double ResidualHistory::total(std::size_t i) const {
    const auto w = static_cast<std::size_t>(window_);
    double sum = 0.0;
    for (int k = 0; k < count_; ++k) {
        const int slot = ((head_ - k) % window_ + window_) % window_;
        sum += values_[i * w + static_cast<std::size_t>(slot)];
    }
    return sum;
}

void ResidualHistory::reorder(std::span<const std::size_t> ancestors) {
    if (ancestors.size() != particles_) throw Error("residual history: size mismatch");
    const auto w = static_cast<std::size_t>(window_);
    std::vector<double> next(values_.size());
    for (std::size_t i = 0; i < particles_; ++i)
        std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(ancestors[i] * w), w,
                    next.begin() + static_cast<std::ptrdiff_t>(i * w));
    values_.swap(next);
}

ParticleSet init_particles(const Rect& workspace, const PfConfig& config, std::mt19937_64& rng) {
    if (!workspace.has_area()) throw Error("init_particles: workspace has no area");
    config.validate();
    std::uniform_real_distribution<double> ux(workspace.min.x, workspace.max.x);
    std::uniform_real_distribution<double> uy(workspace.min.y, workspace.max.y);
    ParticleSet out(static_cast<std::size_t>(config.num_particles));
    const double w = 1.0 / config.num_particles;
    for (auto& p : out) {
        p.position.x = ux(rng);
        p.position.y = uy(rng);
        p.weight = w;
    }
    return out;
}

void propagate(ParticleSet& particles, std::optional<Vec2> odometry_delta, const PfConfig& config,
               const Rect& workspace, std::mt19937_64& rng) {
    const Vec2 shift = odometry_delta.value_or(Vec2{});
    std::normal_distribution<double> jitter(0.0, 1.0);
    for (auto& p : particles) {
        Vec2 next = p.position + shift;
        if (config.jitter_std > 0.0) {
            next.x += config.jitter_std * jitter(rng);
            next.y += config.jitter_std * jitter(rng);
        }
        p.position = workspace.clamp(next);
    }
}

bool weight_update(ParticleSet& particles, const ResidualHistory& history) {
    if (history.particles() != particles.size()) throw Error("weight_update: history/particle count mismatch");
    if (particles.empty()) return false;
    // log w_i = -1/2 sum_k z_ik^2; the 1/(sigma sqrt(2 pi)) factors are common to all particles
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < particles.size(); ++i) {
        const double lw = -0.5 * history.total(i);
        particles[i].weight = lw;
        if (lw > max_log) max_log = lw;
    }
    double sum = 0.0;
    if (std::isfinite(max_log)) {
        for (auto& p : particles) {
            p.weight = std::isnan(p.weight) ? 0.0 : std::exp(p.weight - max_log);
            sum += p.weight;
        }
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        const double u = 1.0 / static_cast<double>(particles.size());
        for (auto& p : particles) p.weight = u;
        return true;
    }
    for (auto& p : particles) p.weight /= sum;
    return false;
}

std::vector<std::size_t> resample(ParticleSet& particles, Resampling scheme, std::mt19937_64& rng) {
    const std::size_t n = particles.size();
    std::vector<std::size_t> ancestors(n);
    if (n == 0) return ancestors;
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) cdf[i] = (acc += particles[i].weight);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto pick = [&](double u) {
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * acc);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1);
    };
    if (scheme == Resampling::systematic) {
        const double start = unit(rng);
        for (std::size_t i = 0; i < n; ++i) ancestors[i] = pick((start + static_cast<double>(i)) / static_cast<double>(n));
    } else {
        for (std::size_t i = 0; i < n; ++i) ancestors[i] = pick(unit(rng));
    }

    ParticleSet next(n);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = {particles[ancestors[i]].position, w};
    particles.swap(next);
    return ancestors;
}

double effective_sample_size(const ParticleSet& particles) {
    double sq = 0.0;
    for (const auto& p : particles) sq += p.weight * p.weight;
    return sq > 0.0 ? 1.0 / sq : 0.0;
}

Vec2 estimate(const ParticleSet& particles, PointEstimate kind) {
    if (particles.empty()) throw Error("estimate: empty particle set");
    if (kind == PointEstimate::weighted_mean) {
        Vec2 mean;
        double total = 0.0;
        for (const auto& p : particles) {
            mean += p.weight * p.position;
            total += p.weight;
        }
        return (1.0 / total) * mean;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < particles.size(); ++i)
        if (particles[i].weight > particles[best].weight) best = i;
    return particles[best].position;
}

ParticleFilter::ParticleFilter(const Rect& workspace, const AnchorLayout& layout, const PathLossModel& model,
                               PfConfig config)
    : workspace_(workspace),
      config_(config),
      residuals_(layout, model, config.likelihood),
      rng_(config.seed),
      history_(static_cast<std::size_t>(config.num_particles), config.likelihood_window) {
    config_.validate();
    particles_ = init_particles(workspace_, config_, rng_);
    scratch_.resize(particles_.size());
}

Vec2 ParticleFilter::step(const MeasurementTuple& measurement) {
    propagate(particles_, measurement.odometry_delta, config_, workspace_, rng_);

    if (!residuals_.usable(measurement)) {
        ++skipped_updates_;
        return last_estimate_.value_or(workspace_.center());
    }
    for (std::size_t i = 0; i < particles_.size(); ++i)
        scratch_[i] = *residuals_.squared_error(particles_[i].position, measurement);
    history_.push(scratch_);
    if (weight_update(particles_, history_)) ++degeneracy_events_;

    const Vec2 point = estimate(particles_, config_.point_estimate);
    last_estimate_ = point;

    const bool resample_now = config_.ess_threshold <= 0.0 ||
                              effective_sample_size(particles_) < config_.ess_threshold * config_.num_particles;
    if (resample_now) {
        const auto ancestors = resample(particles_, config_.resampling, rng_);
        history_.reorder(ancestors);
    }
    return point;
}

} // namespace pfdoa
