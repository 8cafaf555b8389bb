#include "swarmfield/disturbance.hpp"

#include <Eigen/Cholesky>

namespace swarmfield {

namespace {

// splitmix64, used only to spread (seed, purpose, index) into engine seeds.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t purpose, std::uint64_t index)
    : engine_(mix(mix(master_seed ^ mix(purpose)) ^ mix(index))) {}

Scalar RngStream::normal() { return dist_(engine_); }

RngStream wind_stream(std::uint64_t master_seed) { return {master_seed, 0x57494e44ULL}; }

RngStream measurement_stream(std::uint64_t master_seed, int agent_id) {
    return {master_seed, 0x4d454153ULL, static_cast<std::uint64_t>(agent_id)};
}

Vec2 mean_wind(const WindModel& model, Scalar t) {
    if (model.profile == WindProfile::constant) return model.mean;
    return {model.amplitude.x() * std::sin(2.0 * kPi * t / model.period.x() + model.phase.x()),
            model.amplitude.y() * std::cos(2.0 * kPi * t / model.period.y() + model.phase.y())};
}

Vec2 sample_wind(const WindModel& model, Scalar t, RngStream& rng, Scalar dt) {
    Vec2 w = mean_wind(model, t);
    if (!model.covariance.isZero()) {
        const Mat2 l = model.covariance.llt().matrixL();
        Vec2 z{rng.normal(), rng.normal()};
        if (model.scaling == NoiseScaling::sqrt_dt) z /= std::sqrt(dt);
        w += l * z;
    }
    return w;
}

Vec3 sample_measurement(const Vec3& true_state, const Mat3& meas_cov, RngStream& rng) {
    Vec3 y = true_state;
    // P_v is diagonal; per-component draws keep the stream layout simple.
    for (int k = 0; k < 3; ++k) y[k] += std::sqrt(meas_cov(k, k)) * rng.normal();
    y.z() = wrap_angle(y.z());
    return y;
}

}  // namespace swarmfield
