#pragma once

#include "swarmfield/types.hpp"

namespace swarmfield {

/// Within this radius of the goal the attractive field is declared degenerate
/// and the hover rule of the protocol takes over.
inline constexpr Scalar kSingularityRadius = 1e-6;

/// Finite-difference step for spatial partials of the normalized field.
inline constexpr Scalar kFieldPartialStep = 1e-4;

/// Inputs of one field evaluation: own estimated position, goal, neighbor
/// estimated positions and the blend radii.
struct FieldContext {
    Vec2 position{Vec2::Zero()};
    Vec2 goal{Vec2::Zero()};
    std::vector<Vec2> neighbors;
    Scalar d_r{0.0};
    Scalar d_c{0.0};
};

/// Radially attractive field F = -(r - r_g)/||r - r_g||^2.
Vec2 attractive_field(const Vec2& r, const Vec2& r_g);

/// Repulsive field F = (r_i - r_j)/||r_i - r_j||^2, pointing away from the neighbor.
Vec2 repulsive_field(const Vec2& r_i, const Vec2& r_j);

/// Cubic smoothstep blend weight: 1 for d <= d_r, 0 for d >= d_c, C^1 at both junctions.
Scalar bump(Scalar d, Scalar d_r, Scalar d_c);

/// True when the attractive field is undefined (own position inside the
/// singularity radius of the goal).
bool is_degenerate(const FieldContext& ctx);

/// Blended reference field: prod_j (1 - sigma_ij) F_att + sum_j sigma_ij F_rep_j.
Vec2 blended_field(const FieldContext& ctx);

/// Wind-compensated command direction u * F/||F|| - w_mean.
Vec2 perturbed_field(const Vec2& field, Scalar linear_speed, const Vec2& wind_mean);

/// Four-quadrant angle of a nonzero vector, wrapped to (-pi, pi].
Scalar field_heading(const Vec2& field);

struct HeadingRateResult {
    Scalar value{0.0};
    bool degenerate{false};
};

/// Time derivative of the perturbed-field heading along the flow, with the
/// spatial partials of the normalized perturbed field taken by central
/// differences of step h.
HeadingRateResult heading_rate(const FieldContext& ctx, Scalar theta, Scalar linear_speed,
                               const Vec2& wind_mean, Scalar h = kFieldPartialStep);

}  // namespace swarmfield
