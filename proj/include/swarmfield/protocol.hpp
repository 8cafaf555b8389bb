#pragma once

#include "swarmfield/types.hpp"
#include "swarmfield/vector_field.hpp"

#include <optional>
#include <span>

namespace swarmfield {

/// What agent i knows about a neighbor: its estimated pose and the linear
/// speed the neighbor broadcast on the previous step.
struct NeighborView {
    int id{-1};
    Vec2 position{Vec2::Zero()};
    Scalar heading{0.0};
    Scalar speed{0.0};  // u_k >= 0
};

/// Estimation-error bounds and the margins derived from them.
struct MarginSet {
    Scalar eps_x{0.0}, eps_y{0.0}, eps_theta{0.0}, eps_d{0.0};
    Scalar d_m_inflated{0.0};  // d_m' = d_m + 2 eps_d
    Scalar eps_J{0.0};
};

struct Pose {
    Vec2 position{Vec2::Zero()};
    Scalar heading{0.0};
};

/// Margins from explicit error bounds (also the zero-override path).
MarginSet margins_from_bounds(Scalar eps_d, Scalar eps_theta, Scalar d_m);

/// Margins from the measurement covariances via the covariance bound
/// eps_x = eps_y = eps_theta = sqrt(max_i ||P_vi|| + 1), eps_d = sqrt(2) eps_x.
MarginSet compute_margins(std::span<const Mat3> meas_cov_all, Scalar d_m);

/// Shift-stabilized log-sum-exp under-approximation of min(values).
Scalar smooth_min(std::span<const Scalar> values, Scalar mu);

/// u_i = k_u tanh(||r - r_g||), strictly in [0, k_u).
Scalar nominal_speed(const Vec2& position, const Vec2& goal, Scalar speed_gain);

/// Conflict-free speed u_ic = ||u_i F/||F|| - w_mean||.
Scalar conflict_free_speed(Scalar nominal, const Vec2& field, const Vec2& wind_mean);

/// Indices into `views` of neighbors j with (r_i - r_j)^T eta_i <= -eps_J.
std::vector<int> critical_neighbors(const Pose& own, std::span<const NeighborView> views,
                                    Scalar eps_J);

/// Safe speed w.r.t. one critical neighbor, Eq-form interpolation between the
/// conflict-free speed at d_eps and the scaled matching speed at d_m'.
Scalar safe_speed_wrt(Scalar conflict_free, const NeighborView& neighbor, const Pose& own,
                      Scalar dist, const MarginSet& margins, Scalar d_eps, Scalar cooperation);

struct LinearCommand {
    Scalar speed{0.0};
    bool margin_violation{false};  // some neighbor closer than d_m' (estimated)
};

/// Robust linear velocity: smooth-min over safe speeds of critical neighbors
/// inside d_eps, clamped at zero; conflict-free speed otherwise.
LinearCommand linear_velocity_command(const Pose& own, std::span<const NeighborView> views,
                                      const Vec2& goal, const AgentParams& params,
                                      const SafetyParams& safety, const MarginSet& margins,
                                      const Vec2& wind_mean);

/// Robust angular velocity omega = -k_omega wrap(theta - phi_p) + phi_dot_p.
/// Degenerate field: track field_heading(-w_mean) with zero feed-forward.
Scalar angular_velocity_command(const Pose& own, const FieldContext& ctx, Scalar linear_speed,
                                const Vec2& wind_mean, Scalar turn_gain);

/// Baseline three-branch protocol with hard min, raw d_m and J < 0 guard.
/// `frozen_u_eps` is the conflict-free speed latched when the closest neighbor
/// first crossed d_c; absent (no crossing yet) it defaults to the current u_ic.
Scalar nominal_protocol_velocity(const Pose& own, std::span<const NeighborView> views,
                                 const Vec2& goal, const AgentParams& params,
                                 const SafetyParams& safety,
                                 std::optional<Scalar> frozen_u_eps = std::nullopt);

}  // namespace swarmfield
