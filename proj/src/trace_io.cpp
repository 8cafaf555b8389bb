#include "swarmfield/trace_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <memory>

namespace swarmfield {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

}  // namespace

void emit_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
    FilePtr f = open_for_write(path);
    std::fputs(
        "t,agent_id,x,y,theta,x_hat,y_hat,theta_hat,u_cmd,omega_cmd,goal_dist,min_pair_dist,est_err\n",
        f.get());
    for (const StepRecord& s : trace.steps) {
        for (std::size_t i = 0; i < s.agents.size(); ++i) {
            const StepAgentRecord& a = s.agents[i];
            std::fprintf(f.get(),
                         "%.9g,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                         s.t, i, a.true_state.x(), a.true_state.y(), a.true_state.z(),
                         a.est_state.x(), a.est_state.y(), a.est_state.z(),
                         a.command.linear_speed, a.command.angular_rate, a.goal_dist,
                         s.min_pair_dist, a.est_err);
        }
    }
    if (std::ferror(f.get())) throw std::runtime_error("write failed: " + path.string());
}

void emit_summary_csv(const RunSummary& summary, const std::filesystem::path& path) {
    FilePtr f = open_for_write(path);
    std::fputs(
        "agent_id,final_goal_dist,eps_f,final_heading,wind_opposite_heading,alignment_error\n",
        f.get());
    for (const FinalReportRow& row : final_report(summary)) {
        std::fprintf(f.get(), "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", row.agent_id,
                     row.final_goal_dist, row.eps_f, row.final_heading,
                     row.wind_opposite_heading, row.alignment_error);
    }
    if (std::ferror(f.get())) throw std::runtime_error("write failed: " + path.string());
}

void emit_batch_csv(const BatchReport& report, const std::filesystem::path& path) {
    FilePtr f = open_for_write(path);
    std::fputs("seed,min_dist,safe,max_final_goal_dist,converged\n", f.get());
    for (const RunSummary& s : report.runs) {
        Scalar max_final = 0.0;
        for (Scalar d : s.final_goal_dist) max_final = std::max(max_final, d);
        std::fprintf(f.get(), "%" PRIu64 ",%.9g,%d,%.9g,%d\n", s.seed, s.min_pair_dist,
                     s.safe ? 1 : 0, max_final, s.converged ? 1 : 0);
    }
    if (std::ferror(f.get())) throw std::runtime_error("write failed: " + path.string());
}

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for hashing: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void emit_manifest(const std::filesystem::path& path, std::uint64_t scenario_hash,
                   std::uint64_t seed, const ScenarioConfig& config,
                   const DerivedParams& derived) {
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(), "tool_version = %s\n", kToolVersion);
    std::fprintf(f.get(), "scenario_hash = %016" PRIx64 "\n", scenario_hash);
    std::fprintf(f.get(), "seed = %" PRIu64 "\n", seed);
    std::fprintf(f.get(), "mode = %s\n",
                 config.mode == ProtocolMode::robust ? "robust" : "nominal");
    std::fprintf(f.get(), "agents = %zu\n", config.agents.size());
    std::fprintf(f.get(), "dt = %.9g\nsteps = %d\n", config.dt, config.steps);
    std::fprintf(f.get(), "eps_d = %.9g\neps_theta = %.9g\nd_m_prime = %.9g\neps_J = %.9g\n",
                 derived.margins.eps_d, derived.margins.eps_theta,
                 derived.margins.d_m_inflated, derived.margins.eps_J);
    std::fprintf(f.get(), "R_c = %.9g\nd_c = %.9g\nd_r = %.9g\nd_eps = %.9g\neps_f = %.9g\n",
                 derived.safety.comm_radius, derived.safety.d_c, derived.safety.d_r,
                 derived.safety.d_eps, derived.eps_f);
    if (std::ferror(f.get())) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace swarmfield
