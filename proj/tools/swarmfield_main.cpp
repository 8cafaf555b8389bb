#include "swarmfield/plots.hpp"
#include "swarmfield/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>

namespace fs = std::filesystem;
using namespace swarmfield;

namespace {

struct CommonFlags {
    std::string scenario_path;
    std::string mode;
    bool no_noise{false};
    std::vector<Scalar> override_margins;  // eps_d, eps_theta
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--scenario", flags.scenario_path, "scenario file")->required();
    cmd->add_option("--mode", flags.mode, "protocol mode: robust|nominal")
        ->check(CLI::IsMember({"robust", "nominal"}));
    cmd->add_flag("--no-noise", flags.no_noise, "zero all noise covariances");
    cmd->add_option("--override-margins", flags.override_margins,
                    "explicit eps_d,eps_theta instead of the covariance bound")
        ->delimiter(',')
        ->expected(2);
}

ScenarioConfig load_scenario(const CommonFlags& flags) {
    ScenarioConfig config = parse_scenario(flags.scenario_path);
    if (flags.mode == "robust") config.mode = ProtocolMode::robust;
    if (flags.mode == "nominal") config.mode = ProtocolMode::nominal;
    if (flags.no_noise) {
        config.wind.covariance.setZero();
        config.meas_cov.setZero();
    }
    if (!flags.override_margins.empty()) {
        config.margin_override = {flags.override_margins[0], flags.override_margins[1]};
    }
    return config;
}

int run_command(const CommonFlags& flags, std::uint64_t seed, const std::string& out_dir) {
    const ScenarioConfig config = load_scenario(flags);
    const DerivedParams derived = derive_params(config);
    fs::create_directories(out_dir);

    const RunResult result = run(config, seed);
    emit_trace_csv(result.trace, fs::path(out_dir) / "trace.csv");
    emit_summary_csv(result.summary, fs::path(out_dir) / "summary.csv");
    emit_plots(result.trace, result.summary, config, out_dir);
    emit_manifest(fs::path(out_dir) / "manifest.txt", hash_file(flags.scenario_path), seed,
                  config, derived);

    std::printf("seed %llu: min_pair_dist=%.4f safe=%s converged=%s\n",
                static_cast<unsigned long long>(seed), result.summary.min_pair_dist,
                result.summary.safe ? "yes" : "no", result.summary.converged ? "yes" : "no");
    if (result.trace.aborted) {
        std::fprintf(stderr, "run aborted: %s\n", result.trace.abort_reason.c_str());
        return 2;
    }
    return 0;
}

int batch_command(const CommonFlags& flags, int n_seeds, std::uint64_t base_seed,
                  const std::string& out_dir, int parallel, std::optional<Scalar> require_safe) {
    const ScenarioConfig config = load_scenario(flags);
    fs::create_directories(out_dir);
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < n_seeds; ++k) seeds.push_back(base_seed + static_cast<std::uint64_t>(k));

    const BatchReport report = monte_carlo(config, seeds, parallel);
    emit_batch_csv(report, fs::path(out_dir) / "batch.csv");
    std::printf("batch of %d runs: safe=%.3f converged=%.3f worst_min_dist=%.4f "
                "final_goal_dist median=%.3f p95=%.3f failed=%d\n",
                n_seeds, report.safe_fraction, report.converged_fraction,
                report.worst_min_dist, report.final_goal_dist_median,
                report.final_goal_dist_p95, report.failed_runs);
    if (report.failed_runs > 0) return 2;
    if (require_safe && report.safe_fraction < *require_safe) {
        std::fprintf(stderr, "safe fraction %.3f below required %.3f\n", report.safe_fraction,
                     *require_safe);
        return 3;
    }
    return 0;
}

int validate_command(const std::string& scenario_path) {
    try {
        const ScenarioConfig config = parse_scenario(scenario_path);
        const DerivedParams derived = derive_params(config);
        std::printf("OK: %zu agents, %d steps, dt=%g\n", config.agents.size(), config.steps,
                    config.dt);
        std::printf("derived: eps_d=%.4f d_m'=%.4f eps_J=%.4f R_c=%.4f d_r=%.4f d_eps=%.4f "
                    "eps_f=%.4f\n",
                    derived.margins.eps_d, derived.margins.d_m_inflated, derived.margins.eps_J,
                    derived.safety.comm_radius, derived.safety.d_r, derived.safety.d_eps,
                    derived.eps_f);
        return 0;
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"swarmfield: decentralized multi-agent coordination simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags, batch_flags;
    std::uint64_t seed = 0, base_seed = 0;
    std::string out_dir = "out";
    std::string batch_out_dir = "out";
    int n_seeds = 100, parallel = 1;
    std::optional<Scalar> require_safe;
    std::string validate_path;

    CLI::App* run_cmd = app.add_subcommand("run", "single seeded simulation");
    add_common(run_cmd, run_flags);
    run_cmd->add_option("--seed", seed, "rng seed")->required();
    run_cmd->add_option("--out", out_dir, "output directory");

    CLI::App* batch_cmd = app.add_subcommand("batch", "Monte Carlo batch over seeds");
    add_common(batch_cmd, batch_flags);
    batch_cmd->add_option("--seeds", n_seeds, "number of seeds")->required();
    batch_cmd->add_option("--base-seed", base_seed, "first seed");
    batch_cmd->add_option("--out", batch_out_dir, "output directory");
    batch_cmd->add_option("--parallel", parallel, "worker threads");
    Scalar require_safe_value = 0.0;
    CLI::Option* rs = batch_cmd->add_option("--require-safe", require_safe_value,
                                            "exit 3 if safe fraction falls below this");

    CLI::App* validate_cmd = app.add_subcommand("validate", "check a scenario file");
    validate_cmd->add_option("--scenario", validate_path, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) return run_command(run_flags, seed, out_dir);
        if (batch_cmd->parsed()) {
            if (rs->count() > 0) require_safe = require_safe_value;
            return batch_command(batch_flags, n_seeds, base_seed, batch_out_dir, parallel,
                                 require_safe);
        }
        if (validate_cmd->parsed()) return validate_command(validate_path);
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
