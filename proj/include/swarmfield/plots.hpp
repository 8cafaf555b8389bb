#pragma once

#include "swarmfield/sim.hpp"

#include <filesystem>

namespace swarmfield {

/// Self-contained SVG plots of one run: smallest pairwise distance vs time
/// (d_m reference), final goal distance per agent (eps_f reference), final
/// heading per agent (anti-wind reference), and a trajectory overview.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const RunTrace& trace, const RunSummary& summary,
                                              const ScenarioConfig& config,
                                              const std::filesystem::path& out_dir);

}  // namespace swarmfield
