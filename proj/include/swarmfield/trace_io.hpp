#pragma once

#include "swarmfield/sim.hpp"

#include <filesystem>
#include <string>

namespace swarmfield {

/// Trace CSV, one row per (step, agent). Header:
/// t,agent_id,x,y,theta,x_hat,y_hat,theta_hat,u_cmd,omega_cmd,goal_dist,min_pair_dist,est_err
/// Values carry 9 significant digits, LF line endings.
void emit_trace_csv(const RunTrace& trace, const std::filesystem::path& path);

/// Per-agent summary table (agent_id, final_goal_dist, eps_f, final_heading,
/// wind_opposite_heading, alignment_error).
void emit_summary_csv(const RunSummary& summary, const std::filesystem::path& path);

/// Batch table: seed,min_dist,safe,max_final_goal_dist,converged.
void emit_batch_csv(const BatchReport& report, const std::filesystem::path& path);

/// FNV-1a 64 of the scenario file bytes, used in the manifest.
std::uint64_t hash_file(const std::filesystem::path& path);

void emit_manifest(const std::filesystem::path& path, std::uint64_t scenario_hash,
                   std::uint64_t seed, const ScenarioConfig& config,
                   const DerivedParams& derived);

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace swarmfield
