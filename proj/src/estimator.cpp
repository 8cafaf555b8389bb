#include "swarmfield/estimator.hpp"

#include <Eigen/Dense>

namespace swarmfield {

namespace {

Mat3 symmetrize(const Mat3& p) { return 0.5 * (p + p.transpose()); }

Vec3 unicycle_rate(const Vec3& q, const ControlCommand& u, const Vec2& wind_mean) {
    return {u.linear_speed * std::cos(q.z()) + wind_mean.x(),
            u.linear_speed * std::sin(q.z()) + wind_mean.y(), u.angular_rate};
}

}  // namespace

Mat3 linearize(const Vec3& q_hat, const ControlCommand& u) {
    Mat3 a = Mat3::Zero();
    a(0, 2) = -u.linear_speed * std::sin(q_hat.z());
    a(1, 2) = u.linear_speed * std::cos(q_hat.z());
    return a;
}

Estimate predict(const Estimate& est, const ControlCommand& u, const Vec2& wind_mean,
                 const Mat2& wind_cov, Scalar dt) {
    if (dt <= 0.0) throw std::invalid_argument("predict: dt must be > 0");
    Estimate out;
    out.state = est.state + dt * unicycle_rate(est.state, u, wind_mean);
    out.state.z() = wrap_angle(out.state.z());

    const Mat3 a = linearize(est.state, u);
    Mat3 process = Mat3::Zero();
    process.topLeftCorner<2, 2>() = wind_cov;
    out.covariance = symmetrize(est.covariance +
                                dt * (a * est.covariance + est.covariance * a.transpose() + process));
    return out;
}

Estimate update(const Estimate& est, const Vec3& measurement, const Mat3& meas_cov) {
    const Mat3 s = est.covariance + meas_cov;
    Eigen::FullPivLU<Mat3> lu(s);
    if (!lu.isInvertible()) {
        throw std::runtime_error("update: singular innovation covariance");
    }
    const Mat3 gain = est.covariance * lu.inverse();

    Vec3 innovation = measurement - est.state;
    innovation.z() = wrap_angle(innovation.z());

    Estimate out;
    out.state = est.state + gain * innovation;
    out.state.z() = wrap_angle(out.state.z());
    out.covariance = symmetrize((Mat3::Identity() - gain) * est.covariance);
    return out;
}

ErrorBounds error_bounds(std::span<const Mat3> meas_cov_all) {
    Scalar max_norm = 0.0;
    for (const Mat3& pv : meas_cov_all) {
        max_norm = std::max(max_norm, pv.selfadjointView<Eigen::Lower>().operatorNorm());
    }
    const Scalar eps = std::sqrt(max_norm + 1.0);
    return {eps, eps, eps, std::sqrt(2.0) * eps};
}

}  // namespace swarmfield
