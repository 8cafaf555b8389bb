#include "swarmfield/protocol.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace swarmfield {

MarginSet margins_from_bounds(Scalar eps_d, Scalar eps_theta, Scalar d_m) {
    if (eps_theta >= kPi / 2.0) {
        throw std::invalid_argument("margins: eps_theta >= pi/2 breaks the guard inflation");
    }
    MarginSet m;
    m.eps_d = eps_d;
    m.eps_x = m.eps_y = eps_d / std::sqrt(2.0);
    m.eps_theta = eps_theta;
    m.d_m_inflated = d_m + 2.0 * eps_d;
    m.eps_J = (2.0 * eps_d + std::sin(eps_theta) * (d_m + 2.0 * eps_d)) / std::cos(eps_theta);
    return m;
}

MarginSet compute_margins(std::span<const Mat3> meas_cov_all, Scalar d_m) {
    Scalar max_norm = 0.0;
    for (const Mat3& pv : meas_cov_all) {
        max_norm = std::max(max_norm, pv.selfadjointView<Eigen::Lower>().operatorNorm());
    }
    const Scalar eps = std::sqrt(max_norm + 1.0);
    MarginSet m = margins_from_bounds(std::sqrt(2.0) * eps, eps, d_m);
    m.eps_x = m.eps_y = m.eps_theta = eps;
    return m;
}

Scalar smooth_min(std::span<const Scalar> values, Scalar mu) {
    if (values.empty()) throw std::invalid_argument("smooth_min: empty list");
    const Scalar m = *std::min_element(values.begin(), values.end());
    Scalar sum = 0.0;
    for (Scalar v : values) sum += std::exp(-mu * (v - m));
    return m - std::log(sum) / mu;
}

Scalar nominal_speed(const Vec2& position, const Vec2& goal, Scalar speed_gain) {
    return speed_gain * std::tanh((position - goal).norm());
}

Scalar conflict_free_speed(Scalar nominal, const Vec2& field, const Vec2& wind_mean) {
    return perturbed_field(field, nominal, wind_mean).norm();
}

std::vector<int> critical_neighbors(const Pose& own, std::span<const NeighborView> views,
                                    Scalar eps_J) {
    const Vec2 eta = heading_vector(own.heading);
    std::vector<int> out;
    for (int k = 0; k < static_cast<int>(views.size()); ++k) {
        if ((own.position - views[k].position).dot(eta) <= -eps_J) out.push_back(k);
    }
    return out;
}

Scalar safe_speed_wrt(Scalar conflict_free, const NeighborView& neighbor, const Pose& own,
                      Scalar dist, const MarginSet& margins, Scalar d_eps, Scalar cooperation) {
    const Vec2 r_ki = own.position - neighbor.position;
    const Scalar denom = r_ki.dot(heading_vector(own.heading));
    const Scalar matching = neighbor.speed * r_ki.dot(heading_vector(neighbor.heading)) / denom;
    const Scalar span = d_eps - margins.d_m_inflated;
    return conflict_free * (dist - margins.d_m_inflated) / span +
           cooperation * matching * (d_eps - dist) / span;
}

LinearCommand linear_velocity_command(const Pose& own, std::span<const NeighborView> views,
                                      const Vec2& goal, const AgentParams& params,
                                      const SafetyParams& safety, const MarginSet& margins,
                                      const Vec2& wind_mean) {
    FieldContext ctx{own.position, goal, {}, safety.d_r, safety.d_c};
    ctx.neighbors.reserve(views.size());
    for (const NeighborView& v : views) ctx.neighbors.push_back(v.position);

    LinearCommand cmd;
    for (const NeighborView& v : views) {
        if ((own.position - v.position).norm() < margins.d_m_inflated) {
            cmd.margin_violation = true;
            break;
        }
    }

    if (is_degenerate(ctx)) {
        cmd.speed = wind_mean.norm();  // hover against the wind at the goal
        return cmd;
    }
    const Vec2 field = blended_field(ctx);
    if (field.norm() < 1e-12) {
        cmd.speed = wind_mean.norm();
        return cmd;
    }
    const Scalar u_i = nominal_speed(own.position, goal, params.speed_gain);
    const Scalar u_ic = conflict_free_speed(u_i, field, wind_mean);

    std::vector<Scalar> safe_speeds;
    for (int k : critical_neighbors(own, views, margins.eps_J)) {
        const Scalar dist = (own.position - views[k].position).norm();
        if (dist > safety.d_eps) continue;
        safe_speeds.push_back(
            safe_speed_wrt(u_ic, views[k], own, dist, margins, safety.d_eps, params.cooperation));
    }
    if (safe_speeds.empty()) {
        cmd.speed = u_ic;
    } else {
        cmd.speed = std::max(0.0, smooth_min(safe_speeds, safety.sharpness));
    }
    return cmd;
}

Scalar angular_velocity_command(const Pose& own, const FieldContext& ctx, Scalar linear_speed,
                                const Vec2& wind_mean, Scalar turn_gain) {
    const auto hover = [&]() -> Scalar {
        if (wind_mean.norm() < 1e-12) return 0.0;
        return -turn_gain * wrap_angle(own.heading - field_heading(-wind_mean));
    };
    if (is_degenerate(ctx)) return hover();
    const Vec2 field = blended_field(ctx);
    if (field.norm() < 1e-12) return hover();
    const Vec2 fp = perturbed_field(field, linear_speed, wind_mean);
    if (fp.norm() < 1e-12) return hover();
    const Scalar phi = field_heading(fp);
    const HeadingRateResult hr = heading_rate(ctx, own.heading, linear_speed, wind_mean);
    return -turn_gain * wrap_angle(own.heading - phi) + (hr.degenerate ? 0.0 : hr.value);
}

Scalar nominal_protocol_velocity(const Pose& own, std::span<const NeighborView> views,
                                 const Vec2& goal, const AgentParams& params,
                                 const SafetyParams& safety,
                                 std::optional<Scalar> frozen_u_eps) {
    FieldContext ctx{own.position, goal, {}, safety.d_r, safety.d_c};
    ctx.neighbors.reserve(views.size());
    for (const NeighborView& v : views) ctx.neighbors.push_back(v.position);

    const Scalar u_i = nominal_speed(own.position, goal, params.speed_gain);
    Scalar u_ic = u_i;
    if (!is_degenerate(ctx)) {
        const Vec2 field = blended_field(ctx);
        if (field.norm() >= 1e-12) u_ic = conflict_free_speed(u_i, field, Vec2::Zero());
    }

    Scalar d_min = std::numeric_limits<Scalar>::infinity();
    for (const NeighborView& v : views) {
        d_min = std::min(d_min, (own.position - v.position).norm());
    }
    if (d_min >= safety.d_c) return u_ic;

    const Scalar u_eps = frozen_u_eps.value_or(u_ic);
    if (d_min > safety.d_eps) return u_eps;

    // Conflict branch: hard min over safe speeds of neighbors with J_k < 0,
    // interpolating from u_eps at d_eps down to the matching speed at d_m.
    MarginSet raw;
    raw.d_m_inflated = safety.d_m;
    raw.eps_J = 0.0;
    const Vec2 eta = heading_vector(own.heading);
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (const NeighborView& v : views) {
        if ((own.position - v.position).dot(eta) >= 0.0) continue;
        const Scalar dist = (own.position - v.position).norm();
        if (dist > safety.d_eps) continue;
        best = std::min(best, safe_speed_wrt(u_eps, v, own, dist, raw, safety.d_eps,
                                             params.cooperation));
    }
    if (!std::isfinite(best)) return u_eps;  // no critical neighbor in the band
    return std::max(0.0, best);
}

}  // namespace swarmfield
