#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfdoa/baselines.hpp"
#include "pfdoa/datasets.hpp"
#include "pfdoa/pf.hpp"

namespace pfdoa {

/// Dataset-0 generation parameters.
struct SimSettings {
    double side = 6.0;
    double reference_power_dbm = PathLossModel::kDefaultReferencePowerDbm;
    double path_loss_exponent = 3.0;
    double noise_std_dbm = 2.0;
    double step_length = kDefaultStepLength;
    TrajectoryOptions trajectory;
};

struct EstimatorSettings {
    PfConfig pf;
    SmoothingConfig smoothing;
    /// Markov and D-RSS grid; unset means 0.1 m on simulated and 1 m on real scenarios.
    std::optional<double> grid_resolution;
    double drss_resolution = 0.1;
    double markov_motion_std = 0.15;
    bool odometry = false;
    double odometry_noise_std = 0.02;
    /// On recorded (non-simulated) scenarios, replace jitter_std and
    /// markov_motion_std by the median distance between consecutive test
    /// points. Cleared when either value is set explicitly.
    bool motion_from_data = true;
};

struct Sweep {
    std::string parameter; ///< particles | path_loss_n | resolution | noise_std | sigma
    std::vector<double> values;
};

struct ExperimentPlan {
    /// "sim:boundary", "sim:cross_coverage", "sim:diagonal", or a descriptor path.
    std::vector<std::string> scenarios{"sim:boundary", "sim:cross_coverage", "sim:diagonal"};
    std::vector<std::string> estimators{"pf-doa", "trilateration", "wcl", "drss", "markov"};
    int trials = 100;
    std::uint64_t base_seed = 1;
    SimSettings sim;
    EstimatorSettings settings;
    std::optional<Sweep> sweep;
    int threads = 1;

    void validate() const;
};

/// Applies one "key = value" setting (plan files and CLI flags share these keys).
void apply_setting(ExperimentPlan& plan, const std::string& key, const std::string& value);
ExperimentPlan read_plan(const std::filesystem::path& path);
ExperimentPlan parse_plan(std::istream& in, const std::filesystem::path& base_dir = {});

struct BenchmarkRecord {
    std::string estimator;
    std::string scenario;
    double rmse_m = 0.0;
    double rmse_std_m = 0.0;
    double tpi_ms = 0.0;
    double tpi_std_ms = 0.0;
    int trial_count = 0;
    // not serialized
    int failures = 0;
    std::vector<double> trial_rmse;
    std::vector<double> trial_tpi_ms;
    std::vector<std::string> failure_messages;

    double median_rmse() const;
};

/// A fully materialized scenario: workspace, model and the measurement stream
/// for one trial.
struct ScenarioInstance {
    std::string name;
    Workspace workspace;
    PathLossModel model;
    bool simulated = false;
    std::vector<RssiSnapshot> snapshots;
};

/// Streams for trial t are drawn with seed base_seed + t, so every grid value
/// of a sweep sees the same noise realizations.
class ScenarioSource {
public:
    ScenarioSource(const std::string& ref, const SimSettings& sim);

    const std::string& name() const { return name_; }
    bool simulated() const { return simulated_; }
    ScenarioInstance instance(std::uint64_t stream_seed) const;

private:
    std::string name_;
    bool simulated_ = false;
    SimSettings sim_;
    std::optional<Workspace> workspace_;
    std::optional<Trajectory> trajectory_;
    std::optional<PathLossModel> model_;
    std::vector<RssiSnapshot> fixed_;
};

class Estimator {
public:
    virtual ~Estimator() = default;
    virtual Vec2 step(const MeasurementTuple& measurement) = 0;
};

struct EstimatorContext {
    const ScenarioInstance& scenario;
    const EstimatorSettings& settings;
    double grid_resolution;
};

using EstimatorFactory = std::function<std::unique_ptr<Estimator>(const EstimatorContext&, std::uint64_t seed)>;

/// Known names: pf-doa, trilateration, wcl, drss, markov, oracle, static-center.
std::unique_ptr<Estimator> make_estimator(const std::string& name, const EstimatorContext& ctx, std::uint64_t seed);
std::vector<std::string> estimator_names();
void register_estimator(const std::string& name, EstimatorFactory factory);

struct TrialResult {
    double rmse_m = 0.0;
    double tpi_ms = 0.0;
    std::vector<Vec2> estimates;
};

/// One full pass of a fresh estimator over a scenario instance.
TrialResult run_trial(const std::string& estimator, const ScenarioInstance& scenario,
                      const EstimatorSettings& settings, std::uint64_t trial_seed);

/// Median distance between consecutive ground-truth positions; 0 if none.
double median_step(std::span<const RssiSnapshot> snapshots);

/// sqrt(mean |estimate - truth|^2) over snapshots with ground truth.
double trajectory_rmse(std::span<const Vec2> estimates, std::span<const RssiSnapshot> snapshots);

std::vector<BenchmarkRecord> run_experiment(const ExperimentPlan& plan);

struct SweepRecord {
    std::string parameter;
    double value = 0.0;
    BenchmarkRecord record;
};

/// run_experiment per grid value with everything else fixed.
std::vector<SweepRecord> sweep(const ExperimentPlan& plan);
void apply_sweep_value(ExperimentPlan& plan, const std::string& parameter, double value);

inline constexpr const char* kResultsHeader = "estimator,scenario,rmse_m,rmse_std_m,tpi_ms,tpi_std_ms,trials";
inline constexpr const char* kSweepHeader =
    "parameter,value,estimator,scenario,rmse_m,rmse_std_m,tpi_ms,tpi_std_ms,trials";

void write_results_csv(std::ostream& out, std::span<const BenchmarkRecord> records);
std::vector<BenchmarkRecord> read_results_csv(std::istream& in);
/// Scenarios as rows, estimators as column pairs "RMSE (m) | TPI (ms)".
void write_summary_table(std::ostream& out, std::span<const BenchmarkRecord> records);
void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records);

/// Writes results.csv + summary.txt (or sweep.csv + summary.txt) into `dir`.
void emit_results(std::span<const BenchmarkRecord> records, const std::filesystem::path& dir);
void emit_sweep(std::span<const SweepRecord> records, const std::filesystem::path& dir);

} // namespace pfdoa
