#include "swarmfield/vector_field.hpp"

namespace swarmfield {

Vec2 attractive_field(const Vec2& r, const Vec2& r_g) {
    const Vec2 d = r - r_g;
    const Scalar n2 = d.squaredNorm();
    if (n2 <= kSingularityRadius * kSingularityRadius) {
        throw std::domain_error("attractive_field: position inside the goal singularity radius");
    }
    return -d / n2;
}

Vec2 repulsive_field(const Vec2& r_i, const Vec2& r_j) {
    const Vec2 d = r_i - r_j;
    const Scalar n2 = d.squaredNorm();
    if (n2 == 0.0) {
        throw std::domain_error("repulsive_field: coincident positions");
    }
    return d / n2;
}

Scalar bump(Scalar d, Scalar d_r, Scalar d_c) {
    if (d <= d_r) return 1.0;
    if (d >= d_c) return 0.0;
    const Scalar s = (d_c - d) / (d_c - d_r);
    return s * s * (3.0 - 2.0 * s);
}

bool is_degenerate(const FieldContext& ctx) {
    return (ctx.position - ctx.goal).norm() <= kSingularityRadius;
}

Vec2 blended_field(const FieldContext& ctx) {
    const Vec2 f_att = attractive_field(ctx.position, ctx.goal);
    Scalar att_weight = 1.0;
    Vec2 repulsion = Vec2::Zero();
    for (const Vec2& r_j : ctx.neighbors) {
        const Scalar sigma = bump((ctx.position - r_j).norm(), ctx.d_r, ctx.d_c);
        att_weight *= 1.0 - sigma;
        if (sigma > 0.0) repulsion += sigma * repulsive_field(ctx.position, r_j);
    }
    return att_weight * f_att + repulsion;
}

Vec2 perturbed_field(const Vec2& field, Scalar linear_speed, const Vec2& wind_mean) {
    const Scalar n = field.norm();
    if (n == 0.0) {
        throw std::domain_error("perturbed_field: zero nominal field");
    }
    return linear_speed * (field / n) - wind_mean;
}

Scalar field_heading(const Vec2& field) {
    if (field.x() == 0.0 && field.y() == 0.0) {
        throw std::domain_error("field_heading: zero vector");
    }
    return wrap_angle(std::atan2(field.y(), field.x()));
}

namespace {

// Normalized perturbed field as a function of own position, with the commanded
// speed held fixed. Returns false when the nominal or perturbed field vanishes.
bool normalized_perturbed_at(const FieldContext& ctx, const Vec2& at, Scalar linear_speed,
                             const Vec2& wind_mean, Vec2& out) {
    FieldContext shifted = ctx;
    shifted.position = at;
    if (is_degenerate(shifted)) return false;
    const Vec2 f = blended_field(shifted);
    const Scalar fn = f.norm();
    if (fn < 1e-12) return false;
    const Vec2 fp = linear_speed * (f / fn) - wind_mean;
    const Scalar fpn = fp.norm();
    if (fpn < 1e-12) return false;
    out = fp / fpn;
    return true;
}

}  // namespace

HeadingRateResult heading_rate(const FieldContext& ctx, Scalar theta, Scalar linear_speed,
                               const Vec2& wind_mean, Scalar h) {
    Vec2 center, xp, xm, yp, ym;
    const bool ok = normalized_perturbed_at(ctx, ctx.position, linear_speed, wind_mean, center) &&
                    normalized_perturbed_at(ctx, ctx.position + Vec2{h, 0.0}, linear_speed, wind_mean, xp) &&
                    normalized_perturbed_at(ctx, ctx.position - Vec2{h, 0.0}, linear_speed, wind_mean, xm) &&
                    normalized_perturbed_at(ctx, ctx.position + Vec2{0.0, h}, linear_speed, wind_mean, yp) &&
                    normalized_perturbed_at(ctx, ctx.position - Vec2{0.0, h}, linear_speed, wind_mean, ym);
    if (!ok) return {0.0, true};

    const Scalar dnx_dx = (xp.x() - xm.x()) / (2.0 * h);
    const Scalar dnx_dy = (yp.x() - ym.x()) / (2.0 * h);
    const Scalar dny_dx = (xp.y() - xm.y()) / (2.0 * h);
    const Scalar dny_dy = (yp.y() - ym.y()) / (2.0 * h);

    const Scalar c = std::cos(theta);
    const Scalar s = std::sin(theta);
    const Scalar value =
        ((dny_dx * c + dny_dy * s) * center.x() - (dnx_dx * c + dnx_dy * s) * center.y()) *
        linear_speed;
    return {value, false};
}

}  // namespace swarmfield
