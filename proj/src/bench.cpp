#include "pfdoa/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "text.hpp"

namespace pfdoa {

namespace {

constexpr std::size_t kMinTpiIterations = 10;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(fnv1a(salt)), static_cast<std::uint32_t>(fnv1a(salt) >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

bool parse_bool(const std::string& v) {
    const auto s = text::lower(v);
    if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
    if (s == "off" || s == "false" || s == "0" || s == "no") return false;
    throw Error("expected on|off, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    for (auto part : text::split(v, ',')) {
        const auto t = text::trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

int parse_positive_int(const std::string& v, const char* what) {
    const auto n = text::parse_int(v, what);
    if (n < 1 || n > 100'000'000) throw Error(std::string(what) + " must be a positive integer");
    return static_cast<int>(n);
}

// ------------------------------------------------------------------ estimators

class PfDoaEstimator final : public Estimator {
public:
    PfDoaEstimator(const EstimatorContext& ctx, std::uint64_t seed)
        : filter_(ctx.scenario.workspace.bounds, ctx.scenario.workspace.layout, ctx.scenario.model,
                  with_seed(ctx.settings.pf, seed)) {}
    Vec2 step(const MeasurementTuple& m) override { return filter_.step(m); }

private:
    static PfConfig with_seed(PfConfig cfg, std::uint64_t seed) {
        cfg.seed = seed;
        return cfg;
    }
    ParticleFilter filter_;
};

class TrilaterationEstimator final : public Estimator {
public:
    explicit TrilaterationEstimator(const EstimatorContext& ctx) : model_(ctx.scenario.model) {
        for (const auto& a : ctx.scenario.workspace.layout.anchors()) anchors_.push_back(a.position);
        distances_.resize(anchors_.size());
    }
    Vec2 step(const MeasurementTuple& m) override {
        for (std::size_t j = 0; j < anchors_.size(); ++j)
            distances_[j] = invert_rssi_to_distance(model_, m.snapshot.rssi_by_anchor.at(j));
        return trilaterate(anchors_, distances_).position;
    }

private:
    PathLossModel model_;
    std::vector<Vec2> anchors_;
    std::vector<double> distances_;
};

class WclEstimator final : public Estimator {
public:
    explicit WclEstimator(const EstimatorContext& ctx) {
        for (const auto& a : ctx.scenario.workspace.layout.anchors()) anchors_.push_back(a.position);
    }
    Vec2 step(const MeasurementTuple& m) override { return weighted_centroid(anchors_, m.snapshot.rssi_by_anchor); }

private:
    std::vector<Vec2> anchors_;
};

class DrssEstimator final : public Estimator {
public:
    explicit DrssEstimator(const EstimatorContext& ctx)
        : locator_(ctx.scenario.workspace.layout, ctx.scenario.model,
                   GridSpec(ctx.scenario.workspace.bounds, ctx.settings.drss_resolution)) {}
    Vec2 step(const MeasurementTuple& m) override { return locator_.locate(m.snapshot.rssi_by_anchor); }

private:
    DrssLocator locator_;
};

class MarkovEstimator final : public Estimator {
public:
    explicit MarkovEstimator(const EstimatorContext& ctx)
        : filter_(ctx.scenario.workspace.layout, ctx.scenario.model,
                  GridSpec(ctx.scenario.workspace.bounds, ctx.grid_resolution), ctx.settings.pf.likelihood,
                  ctx.settings.markov_motion_std) {}
    Vec2 step(const MeasurementTuple& m) override { return filter_.step(m); }

private:
    MarkovGridFilter filter_;
};

class OracleEstimator final : public Estimator {
public:
    Vec2 step(const MeasurementTuple& m) override {
        if (!m.snapshot.true_position) throw Error("oracle estimator needs ground truth");
        return *m.snapshot.true_position;
    }
};

class StaticCenterEstimator final : public Estimator {
public:
    explicit StaticCenterEstimator(const EstimatorContext& ctx) : center_(ctx.scenario.workspace.bounds.center()) {}
    Vec2 step(const MeasurementTuple&) override { return center_; }

private:
    Vec2 center_;
};

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, EstimatorFactory>& registry() {
    static std::map<std::string, EstimatorFactory> r{
        {"pf-doa", [](const EstimatorContext& c, std::uint64_t s) { return std::make_unique<PfDoaEstimator>(c, s); }},
        {"trilateration",
         [](const EstimatorContext& c, std::uint64_t) { return std::make_unique<TrilaterationEstimator>(c); }},
        {"wcl", [](const EstimatorContext& c, std::uint64_t) { return std::make_unique<WclEstimator>(c); }},
        {"drss", [](const EstimatorContext& c, std::uint64_t) { return std::make_unique<DrssEstimator>(c); }},
        {"markov", [](const EstimatorContext& c, std::uint64_t) { return std::make_unique<MarkovEstimator>(c); }},
        {"oracle", [](const EstimatorContext&, std::uint64_t) { return std::make_unique<OracleEstimator>(); }},
        {"static-center",
         [](const EstimatorContext& c, std::uint64_t) { return std::make_unique<StaticCenterEstimator>(c); }},
    };
    return r;
}

} // namespace

// ------------------------------------------------------------------------ plan

void ExperimentPlan::validate() const {
    if (trials < 1) throw Error("plan: trials must be >= 1");
    if (threads < 1) throw Error("plan: threads must be >= 1");
    if (scenarios.empty()) throw Error("plan: no scenarios");
    if (estimators.empty()) throw Error("plan: no estimators");
    const auto known = estimator_names();
    for (const auto& e : estimators)
        if (std::find(known.begin(), known.end(), e) == known.end()) throw Error("plan: unknown estimator '" + e + "'");
    if (sweep && sweep->values.empty()) throw Error("plan: sweep grid is empty");
    settings.pf.validate();
}

void apply_setting(ExperimentPlan& plan, const std::string& raw_key, const std::string& value) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    auto num = [&](const char* what) { return text::parse_double(value, what); };
    auto& pf = plan.settings.pf;
    auto& lik = pf.likelihood;

    if (key == "scenarios") plan.scenarios = split_list(value);
    else if (key == "scenario") plan.scenarios.push_back(value);
    else if (key == "estimators") plan.estimators = split_list(value);
    else if (key == "trials") plan.trials = parse_positive_int(value, "trials");
    else if (key == "seed") plan.base_seed = static_cast<std::uint64_t>(text::parse_int(value, "seed"));
    else if (key == "threads") plan.threads = parse_positive_int(value, "threads");
    else if (key == "odometry") plan.settings.odometry = parse_bool(value);
    else if (key == "odometry_noise_std") plan.settings.odometry_noise_std = num("odometry_noise_std");
    else if (key == "residual_mode") {
        if (value == "doa") lik.mode = ResidualMode::doa;
        else if (value == "rss") lik.mode = ResidualMode::rss;
        else if (value == "hybrid") lik.mode = ResidualMode::hybrid;
        else throw Error("residual_mode must be doa|rss|hybrid");
    } else if (key == "rss_residual") {
        if (value == "signed_sum") lik.rss_residual = RssResidual::signed_sum;
        else if (value == "abs_sum") lik.rss_residual = RssResidual::abs_sum;
        else throw Error("rss_residual must be signed_sum|abs_sum");
    } else if (key == "particles") pf.num_particles = parse_positive_int(value, "particles");
    else if (key == "sigma") {
        // sigma of the mode's primary residual: dBm in rss mode, radians otherwise
        if (lik.mode == ResidualMode::rss) lik.sigma_rss = num("sigma");
        else lik.sigma_doa = num("sigma");
    } else if (key == "sigma_doa") lik.sigma_doa = num("sigma_doa");
    else if (key == "sigma_rss") lik.sigma_rss = num("sigma_rss");
    else if (key == "likelihood_window") pf.likelihood_window = parse_positive_int(value, "likelihood_window");
    else if (key == "jitter_std") {
        pf.jitter_std = num("jitter_std");
        plan.settings.motion_from_data = false;
    }
    else if (key == "resampling") {
        if (value == "systematic") pf.resampling = Resampling::systematic;
        else if (value == "multinomial") pf.resampling = Resampling::multinomial;
        else throw Error("resampling must be systematic|multinomial");
    } else if (key == "point_estimate") {
        if (value == "max_weight") pf.point_estimate = PointEstimate::max_weight;
        else if (value == "weighted_mean") pf.point_estimate = PointEstimate::weighted_mean;
        else throw Error("point_estimate must be max_weight|weighted_mean");
    } else if (key == "ess_threshold") pf.ess_threshold = num("ess_threshold");
    else if (key == "smoothing_window") plan.settings.smoothing.set_window(parse_positive_int(value, "smoothing_window"));
    else if (key == "smoothing_decay") plan.settings.smoothing.set_decay(num("smoothing_decay"));
    else if (key == "noise_std") plan.sim.noise_std_dbm = num("noise_std");
    else if (key == "path_loss_n") plan.sim.path_loss_exponent = num("path_loss_n");
    else if (key == "reference_power_dbm") plan.sim.reference_power_dbm = num("reference_power_dbm");
    else if (key == "side") plan.sim.side = num("side");
    else if (key == "step_length") plan.sim.step_length = num("step_length");
    else if (key == "margin") plan.sim.trajectory.margin = num("margin");
    else if (key == "lane_pitch") plan.sim.trajectory.lane_pitch = num("lane_pitch");
    else if (key == "resolution") plan.settings.grid_resolution = num("resolution");
    else if (key == "drss_resolution") plan.settings.drss_resolution = num("drss_resolution");
    else if (key == "markov_motion_std") {
        plan.settings.markov_motion_std = num("markov_motion_std");
        plan.settings.motion_from_data = false;
    }
    else if (key == "sweep.parameter" || key == "sweep_parameter") {
        if (!plan.sweep) plan.sweep.emplace();
        plan.sweep->parameter = value;
    } else if (key == "sweep.values" || key == "sweep_values") {
        if (!plan.sweep) plan.sweep.emplace();
        plan.sweep->values.clear();
        for (const auto& v : split_list(value)) plan.sweep->values.push_back(text::parse_double(v, "sweep value"));
    } else {
        throw Error("unknown setting '" + raw_key + "'");
    }
}

ExperimentPlan parse_plan(std::istream& in, const std::filesystem::path& base_dir) {
    ExperimentPlan plan;
    for (const auto& [key, value] : parse_key_values(in)) {
        if (key == "scenarios" || key == "scenario") {
            // descriptor paths are relative to the plan file
            std::vector<std::string> refs;
            for (const auto& r : split_list(value))
                refs.push_back(r.rfind("sim:", 0) == 0 || base_dir.empty() ? r : (base_dir / r).string());
            if (key == "scenarios") plan.scenarios = refs;
            else plan.scenarios.insert(plan.scenarios.end(), refs.begin(), refs.end());
            continue;
        }
        apply_setting(plan, key, value);
    }
    return plan;
}

ExperimentPlan read_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open plan " + path.string());
    return parse_plan(in, path.parent_path());
}

// ------------------------------------------------------------------- scenarios

ScenarioSource::ScenarioSource(const std::string& ref, const SimSettings& sim) : sim_(sim) {
    if (ref.rfind("sim:", 0) == 0) {
        simulated_ = true;
        const auto kind = parse_trajectory_kind(ref.substr(4));
        name_ = "sim-" + to_string(kind);
        workspace_ = Workspace::square(sim.side);
        trajectory_ = generate_trajectory(*workspace_, kind, sim.step_length, sim.trajectory);
        model_ = PathLossModel(sim.reference_power_dbm, sim.path_loss_exponent, sim.noise_std_dbm);
        return;
    }
    const auto descriptor = read_descriptor(ref);
    name_ = descriptor.name.empty() ? std::filesystem::path(ref).stem().string() : descriptor.name;
    workspace_ = descriptor.workspace;
    fixed_ = load_scenario(descriptor).snapshots;
    model_ = descriptor.model ? *descriptor.model : calibrate_model(fixed_, workspace_->layout);
}

ScenarioInstance ScenarioSource::instance(std::uint64_t stream_seed) const {
    ScenarioInstance inst{name_, *workspace_, *model_, simulated_, {}};
    inst.snapshots = simulated_ ? simulate_stream(*workspace_, *trajectory_, *model_, stream_seed) : fixed_;
    return inst;
}

// ------------------------------------------------------------------ estimators

std::unique_ptr<Estimator> make_estimator(const std::string& name, const EstimatorContext& ctx, std::uint64_t seed) {
    EstimatorFactory factory;
    {
        std::lock_guard lock(registry_mutex());
        const auto it = registry().find(name);
        if (it == registry().end()) throw Error("unknown estimator '" + name + "'");
        factory = it->second;
    }
    return factory(ctx, seed);
}

std::vector<std::string> estimator_names() {
    std::lock_guard lock(registry_mutex());
    std::vector<std::string> out;
    for (const auto& [name, f] : registry()) out.push_back(name);
    return out;
}

void register_estimator(const std::string& name, EstimatorFactory factory) {
    std::lock_guard lock(registry_mutex());
    registry()[name] = std::move(factory);
}

double trajectory_rmse(std::span<const Vec2> estimates, std::span<const RssiSnapshot> snapshots) {
    if (estimates.size() != snapshots.size()) throw Error("rmse: estimate/snapshot count mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (!snapshots[i].true_position) continue;
        sum += squared_norm(estimates[i] - *snapshots[i].true_position);
        ++n;
    }
    if (n == 0) throw Error("rmse: no snapshot carries ground truth");
    return std::sqrt(sum / static_cast<double>(n));
}

double median_step(std::span<const RssiSnapshot> snapshots) {
    std::vector<double> steps;
    for (std::size_t i = 1; i < snapshots.size(); ++i)
        if (snapshots[i].true_position && snapshots[i - 1].true_position)
            steps.push_back(distance(*snapshots[i].true_position, *snapshots[i - 1].true_position));
    if (steps.empty()) return 0.0;
    std::sort(steps.begin(), steps.end());
    const std::size_t n = steps.size();
    return n % 2 == 1 ? steps[n / 2] : 0.5 * (steps[n / 2 - 1] + steps[n / 2]);
}

TrialResult run_trial(const std::string& estimator, const ScenarioInstance& scenario,
                      const EstimatorSettings& requested, std::uint64_t trial_seed) {
    using clock = std::chrono::steady_clock;
    if (scenario.snapshots.size() < kMinTpiIterations)
        throw Error("scenario '" + scenario.name + "' has fewer than " + std::to_string(kMinTpiIterations) +
                    " snapshots");
    EstimatorSettings settings = requested;
    if (!scenario.simulated && settings.motion_from_data) {
        if (const double step = median_step(scenario.snapshots); step > 0.0) {
            settings.pf.jitter_std = step;
            settings.markov_motion_std = step;
        }
    }
    const double resolution = settings.grid_resolution.value_or(scenario.simulated ? 0.1 : 1.0);
    const EstimatorContext ctx{scenario, settings, resolution};
    auto est = make_estimator(estimator, ctx, derive_seed(trial_seed, estimator));

    std::vector<std::optional<Vec2>> odometry;
    if (settings.odometry)
        odometry = odometry_deltas(scenario.snapshots, settings.odometry_noise_std, derive_seed(trial_seed, "odometry"));

    DoaTracker tracker(scenario.workspace.layout, settings.smoothing);
    TrialResult result;
    result.estimates.reserve(scenario.snapshots.size());
    clock::duration busy{};
    for (std::size_t i = 0; i < scenario.snapshots.size(); ++i) {
        const auto t0 = clock::now();
        MeasurementTuple m{scenario.snapshots[i], tracker.update(scenario.snapshots[i]),
                           settings.odometry ? odometry[i] : std::nullopt};
        result.estimates.push_back(est->step(m));
        busy += clock::now() - t0;
    }
    result.rmse_m = trajectory_rmse(result.estimates, scenario.snapshots);
    result.tpi_ms = std::chrono::duration<double, std::milli>(busy).count() /
                    static_cast<double>(scenario.snapshots.size());
    return result;
}

double BenchmarkRecord::median_rmse() const {
    if (trial_rmse.empty()) return std::nan("");
    std::vector<double> v = trial_rmse;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<BenchmarkRecord> run_experiment(const ExperimentPlan& plan) {
    plan.validate();
    std::vector<BenchmarkRecord> records;
    for (const auto& ref : plan.scenarios) {
        const ScenarioSource source(ref, plan.sim);
        const std::size_t n_est = plan.estimators.size();
        const auto trials = static_cast<std::size_t>(plan.trials);

        struct Cell {
            std::optional<TrialResult> result;
            std::string error;
        };
        std::vector<Cell> cells(trials * n_est);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t t = next++; t < trials; t = next++) {
                const std::uint64_t seed = plan.base_seed + t;
                std::optional<ScenarioInstance> inst;
                std::string inst_error;
                try {
                    inst = source.instance(seed);
                } catch (const std::exception& e) {
                    inst_error = e.what();
                }
                for (std::size_t e = 0; e < n_est; ++e) {
                    Cell& cell = cells[t * n_est + e];
                    if (!inst) {
                        cell.error = inst_error;
                        continue;
                    }
                    try {
                        TrialResult r = run_trial(plan.estimators[e], *inst, plan.settings, seed);
                        r.estimates.clear();
                        cell.result = std::move(r);
                    } catch (const std::exception& ex) {
                        cell.error = ex.what();
                    }
                }
            }
        };
        const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(plan.threads), trials);
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        }

        for (std::size_t e = 0; e < n_est; ++e) {
            BenchmarkRecord rec;
            rec.estimator = plan.estimators[e];
            rec.scenario = source.name();
            for (std::size_t t = 0; t < trials; ++t) {
                const Cell& cell = cells[t * n_est + e];
                if (cell.result && std::isfinite(cell.result->rmse_m)) {
                    rec.trial_rmse.push_back(cell.result->rmse_m);
                    rec.trial_tpi_ms.push_back(cell.result->tpi_ms);
                } else {
                    ++rec.failures;
                    rec.failure_messages.push_back(cell.error.empty() ? "non-finite RMSE" : cell.error);
                }
            }
            rec.trial_count = static_cast<int>(rec.trial_rmse.size());
            rec.rmse_m = mean_of(rec.trial_rmse);
            rec.rmse_std_m = sample_std(rec.trial_rmse);
            rec.tpi_ms = mean_of(rec.trial_tpi_ms);
            rec.tpi_std_ms = sample_std(rec.trial_tpi_ms);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

void apply_sweep_value(ExperimentPlan& plan, const std::string& parameter, double value) {
    if (parameter == "particles") {
        if (value < 2 || value != std::floor(value)) throw Error("sweep: particles must be an integer >= 2");
        plan.settings.pf.num_particles = static_cast<int>(value);
    } else if (parameter == "path_loss_n" || parameter == "n") {
        plan.sim.path_loss_exponent = value;
    } else if (parameter == "resolution") {
        if (!(value > 0.0)) throw Error("sweep: resolution must be > 0");
        plan.settings.grid_resolution = value;
        plan.settings.pf.jitter_std = value;
        plan.settings.motion_from_data = false;
    } else if (parameter == "noise_std") {
        if (!(value >= 0.0)) throw Error("sweep: noise_std must be >= 0");
        plan.sim.noise_std_dbm = value;
    } else if (parameter == "sigma") {
        if (!(value > 0.0)) throw Error("sweep: sigma must be > 0");
        if (plan.settings.pf.likelihood.mode == ResidualMode::rss) plan.settings.pf.likelihood.sigma_rss = value;
        else plan.settings.pf.likelihood.sigma_doa = value;
    } else {
        throw Error("sweep: unknown parameter '" + parameter + "'");
    }
}

std::vector<SweepRecord> sweep(const ExperimentPlan& plan) {
    if (!plan.sweep) throw Error("sweep: plan has no sweep grid");
    plan.validate();
    std::vector<SweepRecord> out;
    for (double value : plan.sweep->values) {
        ExperimentPlan p = plan;
        p.sweep.reset();
        apply_sweep_value(p, plan.sweep->parameter, value);
        for (auto& rec : run_experiment(p)) out.push_back({plan.sweep->parameter, value, std::move(rec)});
    }
    return out;
}

// --------------------------------------------------------------------- output

namespace {

void write_record_fields(std::ostream& out, const BenchmarkRecord& r) {
    out << r.estimator << ',' << r.scenario << ',' << text::format_double(r.rmse_m) << ','
        << text::format_double(r.rmse_std_m) << ',' << text::format_double(r.tpi_ms) << ','
        << text::format_double(r.tpi_std_ms) << ',' << r.trial_count;
}

std::string pm(double mean, double std, int precision) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << mean << " +- " << std << std::defaultfloat;
    return s.str();
}

} // namespace

void write_results_csv(std::ostream& out, std::span<const BenchmarkRecord> records) {
    out << kResultsHeader << '\n';
    for (const auto& r : records) {
        write_record_fields(out, r);
        out << '\n';
    }
}

std::vector<BenchmarkRecord> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("results csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) throw Error("results csv: unexpected header '" + line + "'");
    std::vector<BenchmarkRecord> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 7) throw Error("results csv: expected 7 fields in '" + line + "'");
        BenchmarkRecord r;
        r.estimator = std::string(f[0]);
        r.scenario = std::string(f[1]);
        r.rmse_m = text::parse_double(f[2], "rmse_m");
        r.rmse_std_m = text::parse_double(f[3], "rmse_std_m");
        r.tpi_ms = text::parse_double(f[4], "tpi_ms");
        r.tpi_std_ms = text::parse_double(f[5], "tpi_std_ms");
        r.trial_count = static_cast<int>(text::parse_int(f[6], "trials"));
        out.push_back(std::move(r));
    }
    return out;
}

void write_summary_table(std::ostream& out, std::span<const BenchmarkRecord> records) {
    std::vector<std::string> scenarios, estimators;
    auto add_unique = [](std::vector<std::string>& v, const std::string& s) {
        if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    };
    for (const auto& r : records) {
        add_unique(scenarios, r.scenario);
        add_unique(estimators, r.estimator);
    }
    constexpr int kScenarioWidth = 24;
    constexpr int kCellWidth = 18;
    out << std::left << std::setw(kScenarioWidth) << "scenario";
    for (const auto& e : estimators)
        out << " | " << std::setw(kCellWidth) << (e + " RMSE (m)") << " | " << std::setw(kCellWidth) << (e + " TPI (ms)");
    out << '\n';
    for (const auto& s : scenarios) {
        out << std::left << std::setw(kScenarioWidth) << s;
        for (const auto& e : estimators) {
            const auto it = std::find_if(records.begin(), records.end(),
                                         [&](const BenchmarkRecord& r) { return r.scenario == s && r.estimator == e; });
            if (it == records.end()) {
                out << " | " << std::setw(kCellWidth) << "-" << " | " << std::setw(kCellWidth) << "-";
                continue;
            }
            out << " | " << std::setw(kCellWidth) << pm(it->rmse_m, it->rmse_std_m, 3) << " | "
                << std::setw(kCellWidth) << pm(it->tpi_ms, it->tpi_std_ms, 4);
        }
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records) {
    out << kSweepHeader << '\n';
    for (const auto& r : records) {
        out << r.parameter << ',' << text::format_double(r.value) << ',';
        write_record_fields(out, r.record);
        out << '\n';
    }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

} // namespace

void emit_results(std::span<const BenchmarkRecord> records, const std::filesystem::path& dir) {
    if (records.empty()) throw Error("emit_results: no records");
    prepare_dir(dir);
    auto csv = open_output(dir / "results.csv");
    write_results_csv(csv, records);
    auto table = open_output(dir / "summary.txt");
    write_summary_table(table, records);
    if (!csv || !table) throw Error("emit_results: write failed in " + dir.string());
}

void emit_sweep(std::span<const SweepRecord> records, const std::filesystem::path& dir) {
    if (records.empty()) throw Error("emit_sweep: no records");
    prepare_dir(dir);
    auto csv = open_output(dir / "sweep.csv");
    write_sweep_csv(csv, records);
    auto table = open_output(dir / "summary.txt");
    std::string current;
    std::vector<BenchmarkRecord> group;
    auto flush = [&] {
        if (group.empty()) return;
        table << "# " << current << '\n';
        write_summary_table(table, group);
        table << '\n';
        group.clear();
    };
    for (const auto& r : records) {
        const std::string label = r.parameter + " = " + text::format_double(r.value);
        if (label != current) {
            flush();
            current = label;
        }
        group.push_back(r.record);
    }
    flush();
    if (!csv || !table) throw Error("emit_sweep: write failed in " + dir.string());
}

} // namespace pfdoa
