#include "swarmfield/sim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <limits>

namespace swarmfield {

namespace {

bool log_enabled() {
    static const bool on = std::getenv("SWARMFIELD_LOG") != nullptr;
    return on;
}

Scalar min_pairwise(const std::vector<Vec2>& positions) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            best = std::min(best, (positions[i] - positions[j]).norm());
        }
    }
    return best;
}

struct AgentRuntime {
    AgentState truth;
    Estimate estimate;
    ControlCommand command;              // previous step's command (broadcast)
    std::optional<Scalar> frozen_u_eps;  // nominal mode only
    RngStream meas_rng;
};

}  // namespace

RunResult run(const ScenarioConfig& scenario, std::uint64_t seed, bool record_trace) {
    const int n = static_cast<int>(scenario.agents.size());
    const DerivedParams derived = derive_params(scenario);
    const Scalar dt = scenario.dt;
    const bool nominal = scenario.mode == ProtocolMode::nominal;
    const Scalar cov_norm_bound =
        scenario.meas_cov.selfadjointView<Eigen::Lower>().operatorNorm() + 1.0;
    const bool meas_cov_invertible = scenario.meas_cov.determinant() > 0.0;
    const Mat3 meas_cov_inv =
        meas_cov_invertible ? Mat3(scenario.meas_cov.inverse()) : Mat3::Zero();

    RunResult result;
    RunSummary& summary = result.summary;
    summary.seed = seed;
    summary.eps_f = derived.eps_f;

    RngStream wind_rng = wind_stream(seed);
    std::vector<AgentRuntime> agents(n);
    for (int i = 0; i < n; ++i) {
        agents[i].truth = scenario.agents[i].initial;
        agents[i].meas_rng = measurement_stream(seed, i);
        // q_hat(0) = first noisy measurement, P(0) = P_v
        if (nominal) {
            agents[i].estimate = {agents[i].truth.as_vector(), Mat3::Zero()};
        } else {
            agents[i].estimate = {
                sample_measurement(agents[i].truth.as_vector(), scenario.meas_cov,
                                   agents[i].meas_rng),
                scenario.meas_cov};
        }
    }

    if (record_trace) result.trace.steps.reserve(scenario.steps);
    summary.min_pair_dist = std::numeric_limits<Scalar>::infinity();
    long within_eps_d = 0;
    long est_samples = 0;
    Scalar max_gain_delta = 0.0;

    std::vector<Vec2> est_positions(n);
    std::vector<Vec2> true_positions(n);

    for (int step = 0; step < scenario.steps; ++step) {
        const Scalar t = step * dt;
        const Vec2 wind_mean = nominal ? Vec2{Vec2::Zero()} : mean_wind(scenario.wind, t);
        const Vec2 wind =
            nominal ? Vec2{Vec2::Zero()} : sample_wind(scenario.wind, t, wind_rng, dt);

        if (!nominal) {
            for (AgentRuntime& a : agents) {
                const Vec3 y =
                    sample_measurement(a.truth.as_vector(), scenario.meas_cov, a.meas_rng);
                if (scenario.meas_cov.isZero()) {
                    // Perfect measurements (--no-noise): the filter degenerates
                    // to direct observation.
                    a.estimate = {y, Mat3::Zero()};
                    continue;
                }
                a.estimate = update(predict(a.estimate, a.command, wind_mean,
                                            scenario.wind.covariance, dt),
                                    y, scenario.meas_cov);
                if (a.estimate.covariance.selfadjointView<Eigen::Lower>().operatorNorm() >
                    cov_norm_bound + 1e-9) {
                    summary.cov_bound_ok = false;
                }
                if (meas_cov_invertible) {
                    const Scalar gain_norm = (a.estimate.covariance * meas_cov_inv).norm();
                    max_gain_delta =
                        std::max(max_gain_delta, gain_norm * derived.margins.eps_d);
                }
            }
        } else {
            for (AgentRuntime& a : agents) a.estimate.state = a.truth.as_vector();
        }

        bool states_finite = true;
        for (int i = 0; i < n; ++i) {
            est_positions[i] = agents[i].estimate.position();
            true_positions[i] = agents[i].truth.position;
            states_finite = states_finite && agents[i].truth.as_vector().allFinite() &&
                            agents[i].estimate.state.allFinite();
        }
        if (!states_finite) {
            result.trace.aborted = true;
            result.trace.abort_reason = "non-finite state at t=" + std::to_string(t);
            summary.aborted = true;
            if (log_enabled()) std::fprintf(stderr, "[swarmfield] %s\n",
                                            result.trace.abort_reason.c_str());
            break;
        }

        // Neighbor views from estimated positions, carrying last-step speeds.
        std::vector<ControlCommand> commands(n);
        bool margin_violation = false;
        for (int i = 0; i < n; ++i) {
            std::vector<NeighborView> views;
            for (int j : neighbors_of(i, est_positions, derived.safety.comm_radius)) {
                views.push_back({j, est_positions[j], agents[j].estimate.heading(),
                                 agents[j].command.linear_speed});
            }
            const Pose own{est_positions[i], agents[i].estimate.heading()};
            const AgentParams& params = scenario.agents[i].params;
            FieldContext ctx{own.position, params.goal, {}, derived.safety.d_r,
                             derived.safety.d_c};
            for (const NeighborView& v : views) ctx.neighbors.push_back(v.position);

            if (nominal) {
                Scalar d_min = std::numeric_limits<Scalar>::infinity();
                for (const NeighborView& v : views) {
                    d_min = std::min(d_min, (own.position - v.position).norm());
                }
                Scalar u_ic = nominal_speed(own.position, params.goal, params.speed_gain);
                if (!is_degenerate(ctx)) {
                    const Vec2 f = blended_field(ctx);
                    if (f.norm() >= 1e-12) u_ic = conflict_free_speed(
                        nominal_speed(own.position, params.goal, params.speed_gain), f,
                        Vec2::Zero());
                }
                if (d_min >= derived.safety.d_c) {
                    agents[i].frozen_u_eps.reset();
                } else if (!agents[i].frozen_u_eps) {
                    agents[i].frozen_u_eps = u_ic;  // latch u_ic at the d_c crossing
                }
                commands[i].linear_speed = nominal_protocol_velocity(
                    own, views, params.goal, params, derived.safety, agents[i].frozen_u_eps);
                commands[i].angular_rate = angular_velocity_command(
                    own, ctx, nominal_speed(own.position, params.goal, params.speed_gain),
                    Vec2::Zero(), params.turn_gain);
            } else {
                const LinearCommand lin = linear_velocity_command(
                    own, views, params.goal, params, derived.safety, derived.margins,
                    wind_mean);
                margin_violation = margin_violation || lin.margin_violation;
                commands[i].linear_speed = lin.speed;
                commands[i].angular_rate = angular_velocity_command(
                    own, ctx, nominal_speed(own.position, params.goal, params.speed_gain),
                    wind_mean, params.turn_gain);
            }
        }
        if (margin_violation) ++summary.margin_violation_steps;

        const Scalar min_dist =
            n > 1 ? min_pairwise(true_positions) : std::numeric_limits<Scalar>::infinity();
        summary.min_pair_dist = std::min(summary.min_pair_dist, min_dist);

        StepRecord record;
        record.t = t;
        record.min_pair_dist = min_dist;
        record.margin_violation = margin_violation;
        record.agents.resize(n);
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            StepAgentRecord& r = record.agents[i];
            r.true_state = agents[i].truth.as_vector();
            r.est_state = agents[i].estimate.state;
            r.command = commands[i];
            r.goal_dist = (agents[i].truth.position - scenario.agents[i].params.goal).norm();
            r.est_err = (agents[i].truth.position - agents[i].estimate.position()).norm();
            if (r.est_err <= derived.margins.eps_d) ++within_eps_d;
            ++est_samples;
            finite = finite && r.true_state.allFinite() && r.est_state.allFinite() &&
                     std::isfinite(r.command.linear_speed) &&
                     std::isfinite(r.command.angular_rate);
        }
        if (record_trace) result.trace.steps.push_back(std::move(record));

        if (!finite) {
            result.trace.aborted = true;
            result.trace.abort_reason = "non-finite state at t=" + std::to_string(t);
            summary.aborted = true;
            if (log_enabled()) std::fprintf(stderr, "[swarmfield] %s\n",
                                            result.trace.abort_reason.c_str());
            break;
        }

        // Integrate true dynamics with the shared wind sample.
        for (int i = 0; i < n; ++i) {
            AgentRuntime& a = agents[i];
            a.command = commands[i];
            const Scalar c = std::cos(a.truth.heading);
            const Scalar s = std::sin(a.truth.heading);
            a.truth.position.x() += dt * (commands[i].linear_speed * c + wind.x());
            a.truth.position.y() += dt * (commands[i].linear_speed * s + wind.y());
            a.truth.heading = wrap_angle(a.truth.heading + dt * commands[i].angular_rate);
        }
    }

    const Scalar t_final = (scenario.steps - 1) * dt;
    const Vec2 w_final = nominal ? Vec2{Vec2::Zero()} : mean_wind(scenario.wind, t_final);
    summary.wind_opposite_heading =
        w_final.norm() > 0.0 ? std::atan2(-w_final.y(), -w_final.x()) : 0.0;
    summary.safe = !summary.aborted && summary.min_pair_dist >= scenario.d_m;
    summary.converged = !summary.aborted;
    for (int i = 0; i < n; ++i) {
        const Scalar goal_dist =
            (agents[i].truth.position - scenario.agents[i].params.goal).norm();
        summary.final_goal_dist.push_back(goal_dist);
        summary.final_heading.push_back(agents[i].truth.heading);
        summary.alignment_error.push_back(
            std::abs(wrap_angle(agents[i].truth.heading - summary.wind_opposite_heading)));
        if (goal_dist > derived.eps_f) summary.converged = false;
    }
    summary.est_within_eps_d_fraction =
        est_samples > 0 ? static_cast<Scalar>(within_eps_d) / est_samples : 1.0;
    // Theorem 4 uses k_u > delta with delta = max_t ||K|| eps_d.
    for (const AgentSpec& spec : scenario.agents) {
        if (spec.params.speed_gain <= max_gain_delta) summary.speed_gain_ok = false;
    }
    if (log_enabled()) {
        std::fprintf(stderr,
                     "[swarmfield] seed=%llu min_dist=%.4f safe=%d converged=%d violations=%d\n",
                     static_cast<unsigned long long>(seed), summary.min_pair_dist,
                     summary.safe, summary.converged, summary.margin_violation_steps);
    }
    return result;
}

BatchReport monte_carlo(const ScenarioConfig& scenario, const std::vector<std::uint64_t>& seeds,
                        int parallel) {
    if (seeds.empty()) throw std::invalid_argument("monte_carlo: at least one seed required");
    BatchReport report;
    report.runs.resize(seeds.size());

    if (parallel <= 1) {
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            report.runs[k] = run(scenario, seeds[k], /*record_trace=*/false).summary;
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= seeds.size()) return;
                report.runs[k] = run(scenario, seeds[k], /*record_trace=*/false).summary;
            }
        };
        std::vector<std::future<void>> pool;
        for (int w = 0; w < parallel; ++w) pool.push_back(std::async(std::launch::async, worker));
        for (auto& f : pool) f.get();
    }

    int safe = 0, converged = 0;
    report.worst_min_dist = std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> finals;
    for (const RunSummary& s : report.runs) {
        if (s.aborted) ++report.failed_runs;
        if (s.safe) ++safe;
        if (s.converged) ++converged;
        report.worst_min_dist = std::min(report.worst_min_dist, s.min_pair_dist);
        for (Scalar d : s.final_goal_dist) finals.push_back(d);
    }
    report.safe_fraction = static_cast<Scalar>(safe) / seeds.size();
    report.converged_fraction = static_cast<Scalar>(converged) / seeds.size();
    if (!finals.empty()) {
        std::sort(finals.begin(), finals.end());
        report.final_goal_dist_median = finals[finals.size() / 2];
        report.final_goal_dist_p95 = finals[static_cast<std::size_t>(0.95 * (finals.size() - 1))];
    }
    return report;
}

std::vector<Scalar> min_pairwise_series(const RunTrace& trace) {
    std::vector<Scalar> out;
    if (trace.steps.empty() || trace.steps.front().agents.size() < 2) return out;
    out.reserve(trace.steps.size());
    for (const StepRecord& s : trace.steps) out.push_back(s.min_pair_dist);
    return out;
}

std::vector<FinalReportRow> final_report(const RunSummary& summary) {
    std::vector<FinalReportRow> rows;
    for (std::size_t i = 0; i < summary.final_goal_dist.size(); ++i) {
        rows.push_back({static_cast<int>(i), summary.final_goal_dist[i], summary.eps_f,
                        summary.final_heading[i], summary.wind_opposite_heading,
                        summary.alignment_error[i]});
    }
    return rows;
}

}  // namespace swarmfield
