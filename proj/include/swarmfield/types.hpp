#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace swarmfield {

using Scalar = double;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

/// Wraps an angle to (-pi, pi]. The boundary maps to +pi.
inline Scalar wrap_angle(Scalar a) {
    if (!std::isfinite(a)) {
        throw std::domain_error("wrap_angle: non-finite angle");
    }
    Scalar r = std::fmod(a + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

inline Scalar pairwise_distance(const Vec2& a, const Vec2& b) {
    return (a - b).norm();
}

/// Heading unit vector eta = [cos theta, sin theta]^T.
inline Vec2 heading_vector(Scalar theta) {
    return {std::cos(theta), std::sin(theta)};
}

struct AgentState {
    Vec2 position{Vec2::Zero()};
    Scalar heading{0.0};  // wrapped to (-pi, pi]

    Vec3 as_vector() const { return {position.x(), position.y(), heading}; }
    static AgentState from_vector(const Vec3& q) {
        return {{q.x(), q.y()}, wrap_angle(q.z())};
    }
};

struct ControlCommand {
    Scalar linear_speed{0.0};   // m/s, >= 0
    Scalar angular_rate{0.0};   // rad/s
};

struct AgentParams {
    Scalar body_radius{0.4};       // m
    Vec2 goal{Vec2::Zero()};
    Scalar speed_gain{1.0};        // k_u
    Scalar turn_gain{2.0};         // k_omega
    Scalar cooperation{0.5};       // eps_i in (0,1)

    void validate() const {
        if (body_radius <= 0.0) throw std::invalid_argument("AgentParams: body_radius must be > 0");
        if (speed_gain <= 0.0) throw std::invalid_argument("AgentParams: speed_gain must be > 0");
        if (turn_gain <= 0.0) throw std::invalid_argument("AgentParams: turn_gain must be > 0");
        if (!(cooperation > 0.0 && cooperation < 1.0)) {
            throw std::invalid_argument("AgentParams: cooperation factor must lie in (0,1)");
        }
    }
};

/// Protocol distance thresholds. Ordering d_m' < d_eps < d_r < d_c <= R_c is
/// enforced at construction.
struct SafetyParams {
    Scalar d_m{0.8};             // minimum allowable true pairwise distance
    Scalar d_m_inflated{0.8};    // d_m' = d_m + 2*eps_d
    Scalar eps_J{0.0};           // critical-neighbor guard inflation
    Scalar d_eps{0.0};
    Scalar d_r{0.0};
    Scalar d_c{0.0};
    Scalar comm_radius{0.0};     // R_c
    Scalar sharpness{50.0};      // mu of the smooth minimum

    void validate() const {
        if (d_m <= 0.0) throw std::invalid_argument("SafetyParams: d_m must be > 0");
        if (sharpness <= 0.0) throw std::invalid_argument("SafetyParams: mu must be > 0");
        if (eps_J < 0.0) throw std::invalid_argument("SafetyParams: eps_J must be >= 0");
        if (!(d_m_inflated < d_eps && d_eps < d_r && d_r < d_c && d_c <= comm_radius)) {
            throw std::invalid_argument(
                "SafetyParams: ordering d_m' < d_eps < d_r < d_c <= R_c violated");
        }
    }
};

struct NoiseParams {
    Mat2 wind_cov{Mat2::Zero()};
    Mat3 meas_cov{Mat3::Zero()};   // diagonal
    Scalar eps_x{0.0}, eps_y{0.0}, eps_theta{0.0}, eps_d{0.0};
    Scalar goal_tol{0.1};          // eps
    Scalar final_tol{0.0};         // eps_f = eps_d + eps
};

/// Estimated pose with its error covariance; the only state controllers see.
struct Estimate {
    Vec3 state{Vec3::Zero()};      // (x_hat, y_hat, theta_hat)
    Mat3 covariance{Mat3::Zero()};

    Vec2 position() const { return state.head<2>(); }
    Scalar heading() const { return state.z(); }
};

/// Neighbor ids within the closed communication disk of agent i.
inline std::vector<int> neighbors_of(int i, const std::vector<Vec2>& positions, Scalar comm_radius) {
    std::vector<int> out;
    for (int j = 0; j < static_cast<int>(positions.size()); ++j) {
        if (j == i) continue;
        if (pairwise_distance(positions[i], positions[j]) <= comm_radius) out.push_back(j);
    }
    return out;
}

enum class ProtocolMode { robust, nominal };

}  // namespace swarmfield
