// pfdoa: simulate streams, run benchmarks and sweeps, print summaries.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfdoa/bench.hpp"

namespace {

using pfdoa::ExperimentPlan;

struct CommonFlags {
    std::string plan_path;
    std::vector<std::string> scenarios;
    std::string estimators;
    std::string out = "results";
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f, std::map<std::string, std::string>& values) {
    cmd->add_option("--plan", f.plan_path, "plan file with key = value settings");
    cmd->add_option("--scenario", f.scenarios, "sim:boundary | sim:cross_coverage | sim:diagonal | descriptor path");
    cmd->add_option("--estimators", f.estimators, "comma separated estimator names");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--set", f.sets, "extra key=value setting (repeatable)");
    // residual-mode first so that --sigma lands on the right sigma
    for (const char* key : {"residual-mode", "trials", "seed", "threads", "odometry", "particles", "sigma",
                            "sigma-rss", "noise-std", "path-loss-n", "resolution", "step-length"})
        cmd->add_option(std::string("--") + key, values[key]);
}

ExperimentPlan build_plan(const CommonFlags& f, const std::map<std::string, std::string>& values) {
    ExperimentPlan plan = f.plan_path.empty() ? ExperimentPlan{} : pfdoa::read_plan(f.plan_path);
    if (!f.scenarios.empty()) plan.scenarios = f.scenarios;
    if (!f.estimators.empty()) pfdoa::apply_setting(plan, "estimators", f.estimators);
    if (const auto it = values.find("residual-mode"); it != values.end() && !it->second.empty())
        pfdoa::apply_setting(plan, "residual_mode", it->second);
    for (const auto& [key, value] : values)
        if (key != "residual-mode" && !value.empty()) pfdoa::apply_setting(plan, key, value);
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw pfdoa::Error("--set expects key=value, got '" + s + "'");
        pfdoa::apply_setting(plan, s.substr(0, eq), s.substr(eq + 1));
    }
    plan.validate();
    return plan;
}

void report_failures(const std::vector<pfdoa::BenchmarkRecord>& records) {
    for (const auto& r : records)
        if (r.failures > 0)
            std::cerr << r.estimator << " on " << r.scenario << ": " << r.failures << " failed trial(s), first: "
                      << r.failure_messages.front() << '\n';
}

int fail(const std::string& kind, const std::string& message) {
    nlohmann::json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RSS direction-of-arrival particle filter benchmarks"};
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "write a simulated stream as canonical CSV + descriptor");
    std::string sim_traj = "boundary", sim_out = "sim";
    double sim_noise = 2.0, sim_n = 3.0, sim_side = 6.0, sim_step = pfdoa::kDefaultStepLength;
    std::uint64_t sim_seed = 1;
    sim_cmd->add_option("--trajectory", sim_traj, "boundary | cross_coverage | diagonal");
    sim_cmd->add_option("--noise-std", sim_noise);
    sim_cmd->add_option("--path-loss-n", sim_n);
    sim_cmd->add_option("--side", sim_side);
    sim_cmd->add_option("--step-length", sim_step);
    sim_cmd->add_option("--seed", sim_seed);
    sim_cmd->add_option("--out", sim_out, "output directory");

    // run / sweep
    CommonFlags run_flags, sweep_flags;
    std::map<std::string, std::string> run_values, sweep_values;
    auto* run_cmd = app.add_subcommand("run", "run estimators over scenarios");
    add_common(run_cmd, run_flags, run_values);
    auto* sweep_cmd = app.add_subcommand("sweep", "run a one-parameter sweep");
    add_common(sweep_cmd, sweep_flags, sweep_values);
    std::string sweep_param, sweep_grid;
    sweep_cmd->add_option("--parameter", sweep_param, "particles | path_loss_n | resolution | noise_std | sigma");
    sweep_cmd->add_option("--values", sweep_grid, "comma separated grid");

    // report
    auto* report_cmd = app.add_subcommand("report", "print the summary table of a results.csv");
    std::string report_in;
    report_cmd->add_option("results", report_in)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim_cmd) {
            const auto ws = pfdoa::Workspace::square(sim_side);
            const auto traj = pfdoa::generate_trajectory(ws, pfdoa::parse_trajectory_kind(sim_traj), sim_step);
            const pfdoa::PathLossModel model(pfdoa::PathLossModel::kDefaultReferencePowerDbm, sim_n, sim_noise);
            const auto stream = pfdoa::simulate_stream(ws, traj, model, sim_seed);
            std::filesystem::create_directories(sim_out);
            const auto csv_path = std::filesystem::path(sim_out) / "stream.csv";
            std::ofstream csv(csv_path);
            if (!csv) throw pfdoa::Error("cannot write " + csv_path.string());
            pfdoa::write_canonical_csv(csv, pfdoa::to_canonical(stream, ws.layout, "simulated"));
            pfdoa::ScenarioDescriptor d{"sim-" + sim_traj, ws, pfdoa::Technology::simulated, std::nullopt, false,
                                        std::nullopt, pfdoa::Ordering::point_id, "stream.csv", model};
            std::ofstream desc(std::filesystem::path(sim_out) / "scenario.txt");
            pfdoa::write_descriptor(desc, d);
            std::cout << "wrote " << stream.size() << " snapshots to " << csv_path.string() << '\n';
        } else if (*run_cmd) {
            const auto plan = build_plan(run_flags, run_values);
            const auto records = pfdoa::run_experiment(plan);
            pfdoa::emit_results(records, run_flags.out);
            pfdoa::write_summary_table(std::cout, records);
            report_failures(records);
        } else if (*sweep_cmd) {
            auto plan = build_plan(sweep_flags, sweep_values);
            if (!sweep_param.empty()) pfdoa::apply_setting(plan, "sweep.parameter", sweep_param);
            if (!sweep_grid.empty()) pfdoa::apply_setting(plan, "sweep.values", sweep_grid);
            const auto records = pfdoa::sweep(plan);
            pfdoa::emit_sweep(records, sweep_flags.out);
            pfdoa::write_sweep_csv(std::cout, records);
        } else if (*report_cmd) {
            std::ifstream in(report_in);
            if (!in) throw pfdoa::Error("cannot open " + report_in);
            pfdoa::write_summary_table(std::cout, pfdoa::read_results_csv(in));
        }
    } catch (const pfdoa::Error& e) {
        return fail("invalid_input", e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return EXIT_SUCCESS;
}
