#pragma once

#include "swarmfield/types.hpp"

#include <random>

namespace swarmfield {

enum class WindProfile { constant, sinusoidal };

/// How the per-step wind draw relates to P_w. `per_step` holds one draw of
/// covariance P_w constant over dt; `sqrt_dt` is the Euler-Maruyama reading
/// (draw scaled by 1/sqrt(dt)).
enum class NoiseScaling { per_step, sqrt_dt };

struct WindModel {
    WindProfile profile{WindProfile::constant};
    Vec2 mean{Vec2::Zero()};                    // constant profile
    Vec2 amplitude{Vec2::Ones()};               // sinusoidal profile, |A| <= 1
    Vec2 period{40.0, 60.0};                    // seconds
    Vec2 phase{Vec2::Zero()};
    Mat2 covariance{Mat2::Zero()};
    NoiseScaling scaling{NoiseScaling::per_step};
};

/// Deterministic RNG stream; streams for different purposes are decorrelated
/// by mixing a purpose tag into the master seed, so adding agents never
/// perturbs the wind sequence.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t master_seed, std::uint64_t purpose, std::uint64_t index = 0);

    Scalar normal();  // standard normal draw

private:
    std::mt19937_64 engine_;
    std::normal_distribution<Scalar> dist_{0.0, 1.0};
};

RngStream wind_stream(std::uint64_t master_seed);
RngStream measurement_stream(std::uint64_t master_seed, int agent_id);

/// Mean wind at time t: the constant value, or per-axis sinusoids
/// (A_x sin(2 pi t / T_x + phase_x), A_y cos(2 pi t / T_y + phase_y)).
Vec2 mean_wind(const WindModel& model, Scalar t);

/// One shared wind sample for the step: mean_wind(t) + N(0, P_w) (scaled per
/// the model's NoiseScaling).
Vec2 sample_wind(const WindModel& model, Scalar t, RngStream& rng, Scalar dt);

/// Noisy pose measurement y = q + v, v ~ N(0, P_v); heading wrapped.
Vec3 sample_measurement(const Vec3& true_state, const Mat3& meas_cov, RngStream& rng);

}  // namespace swarmfield
