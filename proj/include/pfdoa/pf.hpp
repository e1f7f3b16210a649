#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "pfdoa/likelihood.hpp"

namespace pfdoa {

enum class Resampling { multinomial, systematic };
enum class PointEstimate { max_weight, weighted_mean };

struct PfConfig {
    int num_particles = 200;
    LikelihoodConfig likelihood;
    int likelihood_window = 5;       ///< M: residuals multiplied into each weight
    double jitter_std = 0.1;         ///< m, per-axis random-walk std
    Resampling resampling = Resampling::systematic;
    PointEstimate point_estimate = PointEstimate::max_weight;
    /// Resample only when ESS < ess_threshold * N. 0 resamples every step.
    double ess_threshold = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Particle {
    Vec2 position;
    double weight = 0.0;
};

using ParticleSet = std::vector<Particle>;

/// Sliding window of the last M squared standardized residuals per particle.
/// All particles share the same fill level; the oldest entry is evicted first.
class ResidualHistory {
public:
    ResidualHistory(std::size_t particles, int window);

    std::size_t particles() const { return particles_; }
    int window() const { return window_; }
    int size() const { return count_; }

    /// One value per particle, in particle order.
    void push(std::span<const double> squared_errors);
    /// Sum of the stored values for particle i.
    double total(std::size_t i) const;
    /// Row i becomes the former row ancestors[i].
    void reorder(std::span<const std::size_t> ancestors);
    void clear() { count_ = 0; head_ = 0; }

private:
    std::size_t particles_;
    int window_;
    int count_ = 0;
    int head_ = 0;
    std::vector<double> values_;
};

ParticleSet init_particles(const Rect& workspace, const PfConfig& config, std::mt19937_64& rng);

/// Shifts every particle by `odometry_delta` (if any) plus per-axis Gaussian
/// jitter, then clamps into the workspace.
void propagate(ParticleSet& particles, std::optional<Vec2> odometry_delta, const PfConfig& config,
               const Rect& workspace, std::mt19937_64& rng);

/// w_i ∝ prod_k N(err_ik; 0, sigma), in log space, normalized to sum 1.
/// Returns true on a degeneracy event (weights reset to uniform).
bool weight_update(ParticleSet& particles, const ResidualHistory& history);

/// Draws a new generation proportional to weight; weights reset to 1/N.
/// Returns the ancestor index of each offspring.
std::vector<std::size_t> resample(ParticleSet& particles, Resampling scheme, std::mt19937_64& rng);

double effective_sample_size(const ParticleSet& particles);

/// max_weight: first particle with the largest weight. weighted_mean: sum w_i x_i.
Vec2 estimate(const ParticleSet& particles, PointEstimate kind = PointEstimate::max_weight);

/// Online PF over a stream of measurement tuples.
class ParticleFilter {
public:
    ParticleFilter(const Rect& workspace, const AnchorLayout& layout, const PathLossModel& model, PfConfig config);

    /// One full iteration: propagate, score, weight, estimate, resample.
    Vec2 step(const MeasurementTuple& measurement);

    const ParticleSet& particles() const { return particles_; }
    const PfConfig& config() const { return config_; }
    std::size_t degeneracy_events() const { return degeneracy_events_; }
    std::size_t skipped_updates() const { return skipped_updates_; }
    std::optional<Vec2> last_estimate() const { return last_estimate_; }

private:
    Rect workspace_;
    PfConfig config_;
    ResidualModel residuals_;
    std::mt19937_64 rng_;
    ParticleSet particles_;
    ResidualHistory history_;
    std::vector<double> scratch_;
    std::optional<Vec2> last_estimate_;
    std::size_t degeneracy_events_ = 0;
    std::size_t skipped_updates_ = 0;
};

} // namespace pfdoa
