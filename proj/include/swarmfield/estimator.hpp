#pragma once

#include "swarmfield/types.hpp"

#include <span>

namespace swarmfield {

/// Jacobian of the unicycle dynamics at the estimated state. The wind mean is
/// state-independent and drops out.
Mat3 linearize(const Vec3& q_hat, const ControlCommand& u);

/// Euler prediction of state and covariance over one step. The measurement
/// correction is applied separately in update().
Estimate predict(const Estimate& est, const ControlCommand& u, const Vec2& wind_mean,
                 const Mat2& wind_cov, Scalar dt);

/// Discrete-equivalent measurement correction with gain K = P (P + P_v)^-1.
/// The heading innovation is wrapped before use.
Estimate update(const Estimate& est, const Vec3& measurement, const Mat3& meas_cov);

struct ErrorBounds {
    Scalar eps_x{0.0}, eps_y{0.0}, eps_theta{0.0}, eps_d{0.0};
};

/// Closed-form 3-sigma error bounds from the covariance bound
/// max ||P(t)|| = max_i ||P_vi|| + 1 with P(0) = P_v.
ErrorBounds error_bounds(std::span<const Mat3> meas_cov_all);

}  // namespace swarmfield
