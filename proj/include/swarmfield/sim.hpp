#pragma once

#include "swarmfield/estimator.hpp"
#include "swarmfield/scenario.hpp"

namespace swarmfield {

struct StepAgentRecord {
    Vec3 true_state{Vec3::Zero()};
    Vec3 est_state{Vec3::Zero()};
    ControlCommand command;
    Scalar goal_dist{0.0};
    Scalar est_err{0.0};  // ||r - r_hat||
};

struct StepRecord {
    Scalar t{0.0};
    std::vector<StepAgentRecord> agents;
    Scalar min_pair_dist{0.0};  // over true positions; +inf for a single agent
    bool margin_violation{false};
};

struct RunTrace {
    std::vector<StepRecord> steps;
    bool aborted{false};
    std::string abort_reason;
};

struct RunSummary {
    std::uint64_t seed{0};
    bool aborted{false};
    Scalar min_pair_dist{0.0};            // min over time
    std::vector<Scalar> final_goal_dist;
    std::vector<Scalar> final_heading;
    std::vector<Scalar> alignment_error;  // wrapped |heading - angle(-w_mean(t_final))|
    bool safe{false};                     // min_pair_dist >= d_m
    bool converged{false};                // all final goal distances <= eps_f
    Scalar eps_f{0.0};
    Scalar wind_opposite_heading{0.0};    // angle(-w_mean(t_final)); 0 when windless
    Scalar est_within_eps_d_fraction{1.0};
    bool cov_bound_ok{true};              // ||P(t)|| <= ||P(0)|| + 1 at every step
    bool speed_gain_ok{true};             // k_u > max_t ||K|| eps_d (perturbation bound)
    int margin_violation_steps{0};
};

struct RunResult {
    RunTrace trace;
    RunSummary summary;
};

/// Executes one seeded run. Deterministic per (scenario, seed). Set
/// `record_trace` false to keep only the summary (Monte Carlo batches).
RunResult run(const ScenarioConfig& scenario, std::uint64_t seed, bool record_trace = true);

struct BatchReport {
    std::vector<RunSummary> runs;  // in seed-list order
    Scalar safe_fraction{0.0};
    Scalar converged_fraction{0.0};
    Scalar worst_min_dist{0.0};
    Scalar final_goal_dist_median{0.0};
    Scalar final_goal_dist_p95{0.0};
    int failed_runs{0};
};

/// Independent runs per seed; `parallel` worker threads (<= 1 means serial).
BatchReport monte_carlo(const ScenarioConfig& scenario, const std::vector<std::uint64_t>& seeds,
                        int parallel = 1);

std::vector<Scalar> min_pairwise_series(const RunTrace& trace);

struct FinalReportRow {
    int agent_id{0};
    Scalar final_goal_dist{0.0};
    Scalar eps_f{0.0};
    Scalar final_heading{0.0};
    Scalar wind_opposite_heading{0.0};
    Scalar alignment_error{0.0};
};

std::vector<FinalReportRow> final_report(const RunSummary& summary);

}  // namespace swarmfield
