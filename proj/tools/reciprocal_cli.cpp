// Command-line front end: run single experiments, parameter sweeps, and the
// Lipschitz / optimality diagnostics, emitting bit-stable CSV and JSON.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reciprocal/config.hpp"
#include "reciprocal/diagnostics.hpp"
#include "reciprocal/engine.hpp"
#include "reciprocal/instances.hpp"
#include "reciprocal/io.hpp"

namespace fs = std::filesystem;
using namespace reciprocal;

namespace {

struct RunResult {
    Trajectory trajectory;
    ConvergenceVerdict verdict;
    std::optional<double> l_hat;
    std::optional<double> gate_factor;
    std::optional<bool> gate_passes;
    EngineConfig engine;
    ReciprocalState initial_state;
};

ReciprocalState make_initial_state(const ExperimentConfig& config,
                                   const EngineConfig& engine) {
    ReciprocalState state;
    if (engine.step_kind == StepKind::synthetic_affine) {
        state.theta.theta = {0.0};
        state.sample = uniform_sample({LabeledPoint{{0.0}, 0.5}});
        return state;
    }
    state.sample = config.initial_sample;
    state.sample.check_normalized();
    if (engine.step_kind == StepKind::bandit) {
        const std::size_t dim = engine.bandit_env->context_pool.front().size() *
                                engine.bandit_env->true_theta_per_arm.size();
        // seed points must live in the expanded feature space already
        if (state.sample.points.front().x.size() != dim)
            throw std::runtime_error(
                "initial sample dimension must equal context_dim * n_arms");
    }
    state.theta = erm_solve(state.sample, engine.loss, engine.erm_tol);
    if (engine.greedy || engine.step_kind == StepKind::bandit)
        state.n = static_cast<long>(state.sample.size());
    return state;
}

RunResult execute(const ExperimentConfig& config) {
    RunResult result;
    result.engine = build_engine_config(config.instance);
    result.initial_state = make_initial_state(config, result.engine);

    const bool standard_nongreedy =
        result.engine.step_kind == StepKind::standard && !result.engine.greedy;
    if (standard_nongreedy) {
        const auto report = estimate_lipschitz_adaption(
            result.engine, result.initial_state.sample, 500, config.seed ^ 0x9e37ULL);
        result.l_hat = report.max_ratio;
        auto [factor, passes] = contraction_gate(report.max_ratio, result.engine.loss);
        result.gate_factor = factor;
        result.gate_passes = passes;
    }

    result.trajectory = run(result.initial_state, result.engine, config.max_iter,
                            config.seed, config.epsilon, config.window);
    std::optional<double> rate_bound;
    if (result.gate_factor && *result.gate_factor > 0.0)
        rate_bound = std::log(*result.gate_factor);
    result.verdict = detect_convergence(result.trajectory.records, config.epsilon,
                                        config.window, rate_bound);
    return result;
}

std::string opt_num(const std::optional<double>& v) {
    return v ? fmt17(*v) : "null";
}

void write_summary(const ExperimentConfig& config, const RunResult& result,
                   const std::string& path) {
    std::ofstream out(path);
    const auto& loss = result.engine.loss;
    out << "{\n";
    out << "  \"converged\": " << (result.verdict.converged ? "true" : "false") << ",\n";
    out << "  \"reason\": \""
        << (result.verdict.converged
                ? "stop-rule"
                : (result.engine.greedy || result.engine.step_kind == StepKind::bandit
                       ? "greedy-counter"
                       : "max-iter"))
        << "\",\n";
    out << "  \"stop_iteration\": "
        << (result.verdict.stop_iteration ? std::to_string(*result.verdict.stop_iteration)
                                          : "null")
        << ",\n";
    out << "  \"fitted_rate\": " << opt_num(result.verdict.fitted_rate) << ",\n";
    out << "  \"rate_bound\": " << opt_num(result.verdict.rate_bound) << ",\n";
    out << "  \"l_hat\": " << opt_num(result.l_hat) << ",\n";
    out << "  \"gate_factor\": " << opt_num(result.gate_factor) << ",\n";
    out << "  \"gate_passes\": "
        << (result.gate_passes ? (*result.gate_passes ? "true" : "false") : "null")
        << ",\n";
    out << "  \"constants\": {\n";
    out << "    \"gamma\": " << fmt17(loss.gamma) << ",\n";
    out << "    \"beta\": " << fmt17(loss.beta) << ",\n";
    out << "    \"alpha\": " << fmt17(loss.alpha) << ",\n";
    out << "    \"l_ell\": " << fmt17(loss.l_ell) << ",\n";
    out << "    \"param_bound\": " << fmt17(loss.param_bound) << ",\n";
    out << "    \"feature_bound\": " << fmt17(loss.feature_bound) << "\n";
    out << "  },\n";
    out << "  \"seed\": " << config.seed << ",\n";
    out << "  \"iterations\": " << result.trajectory.records.size() << "\n";
    out << "}\n";
}

int cmd_run(const ExperimentConfig& config) {
    const RunResult result = execute(config);
    fs::create_directories(config.output_dir);
    const std::size_t dim = result.initial_state.theta.theta.size();
    write_trajectory_csv(result.trajectory, dim, config.output_dir + "/trajectory.csv");
    write_summary(config, result, config.output_dir + "/summary.json");
    std::cout << (result.verdict.converged ? "converged" : "not converged")
              << " after " << result.trajectory.records.size() << " iterations\n";
    if (result.gate_passes && *result.gate_passes && !result.verdict.converged) {
        std::cerr << "contraction gate predicted convergence but the run did not "
                     "converge\n";
        return 2;
    }
    return 0;
}

int cmd_diagnose(const ExperimentConfig& config, const std::string& which) {
    fs::create_directories(config.output_dir);
    const EngineConfig engine = build_engine_config(config.instance);

    if (which == "selection") {
        const auto report = estimate_lipschitz_selection(
            engine.selection, engine.selector, engine.loss, 10000, config.seed);
        std::ofstream out(config.output_dir + "/selection_report.json");
        out << "{\n  \"max_ratio\": " << fmt17(report.max_ratio)
            << ",\n  \"pair_count\": " << report.pair_count
            << ",\n  \"theoretical_bound\": "
            << (report.theoretical_bound ? fmt17(*report.theoretical_bound) : "null")
            << ",\n  \"passes\": "
            << (!report.theoretical_bound ||
                        report.max_ratio <= *report.theoretical_bound * (1.0 + 1e-6)
                    ? "true"
                    : "false")
            << ",\n  \"note\": \"empirical lower estimate\"\n}\n";
        if (report.theoretical_bound &&
            report.max_ratio > *report.theoretical_bound * (1.0 + 1e-6))
            return 3;
        return 0;
    }

    if (which == "adaption") {
        const auto report = estimate_lipschitz_adaption(engine, config.initial_sample,
                                                        2000, config.seed);
        std::ofstream out(config.output_dir + "/adaption_report.json");
        out << "{\n  \"max_ratio\": " << fmt17(report.max_ratio)
            << ",\n  \"pair_count\": " << report.pair_count
            << ",\n  \"theoretical_bound\": null"
            << ",\n  \"passes\": true"
            << ",\n  \"note\": \"empirical lower estimate\"\n}\n";
        return 0;
    }

    if (which == "optimality") {
        const RunResult result = execute(config);
        if (!result.verdict.converged) {
            std::cerr << "optimality diagnostic requires a convergent run\n";
            return 1;
        }
        if (result.initial_state.theta.theta.size() != 1) {
            std::cerr << "optimality diagnostic supports d = 1 only\n";
            return 1;
        }
        std::vector<Vec> grid;
        const double bt = engine.loss.param_bound;
        for (int i = 0; i < 401; ++i)
            grid.push_back({-bt + 2.0 * bt * static_cast<double>(i) / 400.0});
        std::vector<Vec> gen_grid;
        for (int i = 0; i < 41; ++i)
            gen_grid.push_back({-bt + 2.0 * bt * static_cast<double>(i) / 40.0});
        auto family =
            reachable_samples(engine, config.initial_sample, gen_grid, 2);
        family.push_back(result.trajectory.final_state.sample);
        const auto bf = bruteforce_optimal(engine, grid, family);
        const auto report = optimality_gap(result.trajectory.final_state, result.verdict,
                                           bf, engine.loss, result.l_hat.value_or(0.0));
        std::ofstream out(config.output_dir + "/optimality_report.json");
        out << "{\n  \"gap\": " << fmt17(report.gap)
            << ",\n  \"bound\": " << fmt17(report.bound)
            << ",\n  \"theta_c\": " << fmt17(report.theta_c.theta[0])
            << ",\n  \"theta_star\": " << fmt17(report.theta_star.theta[0])
            << ",\n  \"passes\": " << (report.passes ? "true" : "false")
            << ",\n  \"note\": \"restricted sample family; necessary-condition "
               "evidence, not a proof-grade certificate\"\n}\n";
        return report.passes ? 0 : 3;
    }

    std::cerr << "unknown diagnostic '" << which << "'\n";
    return 1;
}

int cmd_sweep(const ExperimentConfig& base, const std::string& parameter,
              std::vector<double> values, const std::string& config_path) {
    if (values.empty()) {
        std::cerr << "sweep: empty value list\n";
        return 1;
    }
    std::sort(values.begin(), values.end());

    struct Row {
        double value;
        bool converged;
        std::optional<double> fitted_rate;
        std::optional<double> factor;
    };

    auto one = [&](double value) -> Row {
        ExperimentConfig config = base;
        if (parameter == "kappa")
            config.instance.selector_spec.kappa = value;
        else if (parameter == "l_s")
            config.instance.selector_spec.l_s = value;
        else if (parameter == "ridge")
            config.instance.loss =
                derive_constants(value, config.instance.loss.feature_bound);
        else
            throw std::runtime_error("sweep: unsupported parameter '" + parameter + "'");
        const RunResult result = execute(config);
        return {value, result.verdict.converged, result.verdict.fitted_rate,
                result.gate_factor};
    };

    std::vector<std::future<Row>> futures;
    futures.reserve(values.size());
    for (double v : values)
        futures.push_back(std::async(std::launch::async, one, v));

    fs::create_directories(base.output_dir);
    std::ofstream out(base.output_dir + "/sweep.csv");
    out << "value,converged,fitted_rate,factor\n";
    for (auto& f : futures) {
        const Row row = f.get();
        out << fmt17(row.value) << "," << (row.converged ? 1 : 0) << ","
            << (row.fitted_rate ? fmt17(*row.fitted_rate) : "") << ","
            << (row.factor ? fmt17(*row.factor) : "") << "\n";
    }
    (void)config_path;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reciprocal learning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file (JSON)")
            ->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_override, "override the output directory");
    };

    auto* run_cmd = app.add_subcommand("run", "run one experiment");
    add_common(run_cmd);

    std::string which = "selection";
    auto* diag_cmd = app.add_subcommand("diagnose", "run a diagnostic");
    add_common(diag_cmd);
    diag_cmd->add_option("--which", which, "selection | adaption | optimality")
        ->required();

    std::string sweep_param;
    std::vector<double> sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--param", sweep_param, "kappa | l_s | ridge")->required();
    sweep_cmd->add_option("--values", sweep_values, "values to sweep")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig config = parse_config(config_path);
        if (seed_override) config.seed = *seed_override;
        if (out_override) config.output_dir = *out_override;

        if (run_cmd->parsed()) return cmd_run(config);
        if (diag_cmd->parsed()) return cmd_diagnose(config, which);
        if (sweep_cmd->parsed())
            return cmd_sweep(config, sweep_param, sweep_values, config_path);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
