#pragma once

#include "swarmfield/disturbance.hpp"
#include "swarmfield/protocol.hpp"
#include "swarmfield/types.hpp"

#include <optional>
#include <string>

namespace swarmfield {

struct AgentSpec {
    AgentState initial;
    AgentParams params;
};

struct ScenarioConfig {
    ProtocolMode mode{ProtocolMode::robust};
    Scalar dt{0.01};
    int steps{15000};
    std::uint64_t seed{0};
    Scalar d_m{0.8};
    Scalar sharpness{50.0};   // mu
    Scalar goal_tol{0.1};     // eps
    WindModel wind;
    Mat3 meas_cov{Mat3::Zero()};
    std::vector<AgentSpec> agents;
    // --override-margins: explicit (eps_d, eps_theta) instead of the covariance bound
    std::optional<std::pair<Scalar, Scalar>> margin_override;
};

/// Quantities computed from the scenario: margins, threshold ladder, eps_f.
struct DerivedParams {
    MarginSet margins;
    SafetyParams safety;
    Scalar eps_f{0.0};
};

DerivedParams derive_params(const ScenarioConfig& config);

/// Every invariant violation found, not just the first. Empty means valid.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

/// Parses the flat key/value scenario format. Throws ScenarioError carrying
/// all violations when the file is malformed or invalid.
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(std::vector<std::string> issues);
    std::vector<std::string> issues;
};

ScenarioConfig parse_scenario(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text);

}  // namespace swarmfield
