#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swarmfield/protocol.hpp"

#include <random>

using namespace swarmfield;

namespace {

MarginSet paper_margins() {
    const Mat3 pv[] = {Mat3(Vec3{0.01, 0.01, 0.01}.asDiagonal())};
    return compute_margins(pv, 0.8);
}

SafetyParams paper_safety() {
    const MarginSet m = paper_margins();
    SafetyParams s;
    s.d_m = 0.8;
    s.d_m_inflated = m.d_m_inflated;
    s.eps_J = m.eps_J;
    s.comm_radius = 2.0 * m.d_m_inflated;
    s.d_c = s.comm_radius;
    s.d_r = 0.75 * s.d_c;
    s.d_eps = s.d_r - 0.1;
    s.sharpness = 50.0;
    return s;
}

}  // namespace

TEST_CASE("margins reproduce the published numbers") {
    const MarginSet m = paper_margins();
    CHECK(m.eps_x == doctest::Approx(std::sqrt(1.01)));
    CHECK(m.eps_d == doctest::Approx(1.4213).epsilon(5e-4));
    CHECK(m.d_m_inflated == doctest::Approx(3.6426).epsilon(1e-4));
    CHECK(2.0 * m.d_m_inflated == doctest::Approx(7.28).epsilon(1e-3));
    const Scalar eps_theta = std::sqrt(1.01);
    const Scalar expected_eps_J =
        (2.0 * m.eps_d + std::sin(eps_theta) * (0.8 + 2.0 * m.eps_d)) / std::cos(eps_theta);
    CHECK(m.eps_J == doctest::Approx(expected_eps_J));
    CHECK(m.eps_J == doctest::Approx(11.05).epsilon(1e-2));
}

TEST_CASE("margins reject eps_theta >= pi/2") {
    CHECK_THROWS_AS(margins_from_bounds(1.0, kPi / 2, 0.8), std::invalid_argument);
    // a covariance large enough to push sqrt(||P_v|| + 1) past pi/2
    const Mat3 pv[] = {Mat3(Vec3{2.0, 2.0, 2.0}.asDiagonal())};
    CHECK_THROWS_AS(compute_margins(pv, 0.8), std::invalid_argument);
}

TEST_CASE("smooth_min examples") {
    const Scalar single[] = {5.0};
    CHECK(smooth_min(single, 50.0) == 5.0);

    const Scalar pair[] = {1.0, 1.0};
    CHECK(smooth_min(pair, 1.0) == doctest::Approx(1.0 - std::log(2.0)));

    const Scalar spread[] = {0.2, 7.0};
    CHECK(smooth_min(spread, 50.0) == doctest::Approx(0.2).epsilon(1e-3));

    CHECK_THROWS_AS(smooth_min({}, 50.0), std::invalid_argument);
}

TEST_CASE("smooth_min sandwich bound") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<Scalar> value(-5.0, 5.0);
    std::uniform_int_distribution<int> size(1, 20);
    const Scalar mu = 50.0;
    for (int k = 0; k < 2000; ++k) {
        std::vector<Scalar> a(size(rng));
        for (Scalar& v : a) v = value(rng);
        const Scalar g = smooth_min(a, mu);
        const Scalar m = *std::min_element(a.begin(), a.end());
        CHECK(g <= m);
        CHECK(g >= m - std::log(static_cast<Scalar>(a.size())) / mu);
    }
}

TEST_CASE("nominal speed") {
    CHECK(nominal_speed({2, 3}, {2, 3}, 1.0) == 0.0);
    CHECK(nominal_speed({1, 0}, {0, 0}, 1.0) == doctest::Approx(std::tanh(1.0)));
    Scalar prev = -1.0;
    for (Scalar d = 0.0; d < 10.0; d += 0.1) {
        const Scalar u = nominal_speed({d, 0}, {0, 0}, 1.0);
        CHECK(u >= prev);
        CHECK(u < 1.0);
        prev = u;
    }
}

TEST_CASE("conflict-free speed") {
    CHECK(conflict_free_speed(0.6, {2, 1}, Vec2::Zero()) == doctest::Approx(0.6));
    CHECK(conflict_free_speed(0.0, {1, 0}, {-0.2, 0.7}) ==
          doctest::Approx(Vec2{-0.2, 0.7}.norm()));
    CHECK(conflict_free_speed(1.0, {1, 0}, {-0.2, 0.7}) ==
          doctest::Approx(Vec2{1.2, -0.7}.norm()));
}

TEST_CASE("critical neighbors by projection sign") {
    const Scalar eps_J = 0.5;
    const Pose own{{0, 0}, 0.0};  // heading +x
    SUBCASE("ahead, behind, abeam") {
        std::vector<NeighborView> views = {
            {0, {3.0, 0.0}, 0.0, 0.0},   // ahead at distance 3 > eps_J
            {1, {-3.0, 0.0}, 0.0, 0.0},  // behind
            {2, {0.0, 3.0}, 0.0, 0.0},   // abeam
        };
        CHECK(critical_neighbors(own, views, eps_J) == std::vector<int>{0});
    }
    SUBCASE("ahead but inside the guard") {
        std::vector<NeighborView> views = {{0, {0.4, 0.0}, 0.0, 0.0}};
        CHECK(critical_neighbors(own, views, eps_J).empty());
    }
}

TEST_CASE("safe speed interpolation endpoints") {
    MarginSet m;
    m.d_m_inflated = 1.0;
    const Scalar d_eps = 3.0, u_ic = 0.9, eps_i = 0.5;
    const Pose own{{0, 0}, 0.0};
    // neighbor dead ahead, facing the agent (closing)
    NeighborView closing{0, {2.0, 0.0}, kPi, 0.7};

    SUBCASE("at d_eps the safe speed equals u_ic") {
        closing.position = {3.0, 0.0};
        CHECK(safe_speed_wrt(u_ic, closing, own, 3.0, m, d_eps, eps_i) == doctest::Approx(u_ic));
    }
    SUBCASE("at d_m' it is eps_i * matching speed") {
        closing.position = {1.0, 0.0};
        // r_ki = -1 x_hat; eta_k = -x_hat -> r_ki.eta_k = 1; eta_i = +x -> r_ki.eta_i = -1
        const Scalar u_is = closing.speed * 1.0 / -1.0;
        CHECK(safe_speed_wrt(u_ic, closing, own, 1.0, m, d_eps, eps_i) ==
              doctest::Approx(eps_i * u_is));
    }
    SUBCASE("receding neighbor allows a positive matching speed at d_m'") {
        NeighborView receding{0, {1.0, 0.0}, 0.0, 0.7};  // moving away along +x
        // r_ki = -x_hat; eta_k = +x -> numerator -0.7; eta_i = +x -> denom -1
        const Scalar v = safe_speed_wrt(u_ic, receding, own, 1.0, m, d_eps, eps_i);
        CHECK(v == doctest::Approx(eps_i * receding.speed));
    }
}

TEST_CASE("linear command branches") {
    const SafetyParams safety = paper_safety();
    const MarginSet margins = paper_margins();
    AgentParams params;
    const Vec2 goal{40.0, 0.0};
    const Vec2 wind{-0.2, 0.7};
    const Pose own{{0, 0}, 0.0};

    SUBCASE("no neighbors gives the conflict-free speed") {
        const LinearCommand cmd =
            linear_velocity_command(own, {}, goal, params, safety, margins, wind);
        const Scalar u_i = nominal_speed(own.position, goal, params.speed_gain);
        CHECK(cmd.speed == doctest::Approx(conflict_free_speed(
                               u_i, attractive_field(own.position, goal), wind)));
        CHECK(!cmd.margin_violation);
    }
    SUBCASE("neighbor below d_m' flags a margin violation but still computes") {
        std::vector<NeighborView> views = {{1, {margins.d_m_inflated - 0.2, 0.0}, kPi, 0.3}};
        const LinearCommand cmd =
            linear_velocity_command(own, views, goal, params, safety, margins, wind);
        CHECK(cmd.margin_violation);
        CHECK(std::isfinite(cmd.speed));
        CHECK(cmd.speed >= 0.0);
    }
    SUBCASE("smooth-min of two critical neighbors tracks the lower safe speed") {
        // zero margins make criticals reachable at moderate distances
        const MarginSet zero = margins_from_bounds(0.0, 0.0, 0.8);
        SafetyParams s = safety;
        s.d_m_inflated = zero.d_m_inflated;
        s.eps_J = zero.eps_J;
        s.comm_radius = 10.0;
        s.d_c = 10.0;
        s.d_r = 7.5;
        s.d_eps = 7.4;
        // two closing neighbors ahead at different distances
        std::vector<NeighborView> views = {{1, {2.0, 0.0}, kPi, 0.5}, {2, {4.0, 0.5}, kPi, 0.9}};
        const LinearCommand cmd =
            linear_velocity_command(own, views, goal, params, s, zero, Vec2::Zero());
        const Scalar u_i = nominal_speed(own.position, goal, params.speed_gain);
        FieldContext ctx{own.position, goal, {views[0].position, views[1].position}, s.d_r, s.d_c};
        const Scalar u_ic = conflict_free_speed(u_i, blended_field(ctx), Vec2::Zero());
        std::vector<Scalar> speeds;
        for (int k : critical_neighbors(own, views, 0.0)) {
            speeds.push_back(safe_speed_wrt(u_ic, views[k], own,
                                            (own.position - views[k].position).norm(), zero,
                                            s.d_eps, params.cooperation));
        }
        REQUIRE(speeds.size() == 2);
        CHECK(cmd.speed ==
              doctest::Approx(std::max(0.0, smooth_min(speeds, s.sharpness))));
    }
}

TEST_CASE("linear command is continuous across d_eps") {
    // One closing neighbor swept through the d_eps boundary; with zero margins
    // the critical guard is active at these ranges.
    const MarginSet zero = margins_from_bounds(0.0, 0.0, 0.8);
    SafetyParams s;
    s.d_m = 0.8;
    s.d_m_inflated = zero.d_m_inflated;
    s.eps_J = zero.eps_J;
    s.comm_radius = 10.0;
    s.d_c = 10.0;
    s.d_r = 7.5;
    s.d_eps = 5.0;
    s.sharpness = 50.0;
    AgentParams params;
    const Vec2 goal{40.0, 0.0};
    const Pose own{{0, 0}, 0.0};

    const Scalar step = 1e-4;
    Scalar prev = 0.0;
    bool have_prev = false;
    Scalar max_jump = 0.0;
    for (Scalar d = 4.5; d <= 5.5; d += step) {
        std::vector<NeighborView> views = {{1, {d, 0.0}, kPi, 0.4}};
        const LinearCommand cmd =
            linear_velocity_command(own, views, goal, params, s, zero, Vec2::Zero());
        if (have_prev) max_jump = std::max(max_jump, std::abs(cmd.speed - prev));
        prev = cmd.speed;
        have_prev = true;
    }
    CHECK(max_jump < 50.0 * step);
}

TEST_CASE("angular command") {
    const Vec2 wind{-0.2, 0.7};
    FieldContext ctx{{10, 0}, {0, 0}, {}, 5.46, 7.28};
    const Scalar u = 0.9;
    const Vec2 fp = perturbed_field(blended_field(ctx), u, wind);
    const Scalar phi = field_heading(fp);

    SUBCASE("equilibrium") {
        // uniform-enough field: feed-forward is tiny, feedback is zero
        const Scalar w = angular_velocity_command({ctx.position, phi}, ctx, u, wind, 2.0);
        const Scalar ff = heading_rate(ctx, phi, u, wind).value;
        CHECK(w == doctest::Approx(ff));
    }
    SUBCASE("pure feedback arithmetic") {
        const Scalar w =
            angular_velocity_command({ctx.position, wrap_angle(phi + kPi / 2)}, ctx, u, wind, 2.0);
        const Scalar ff = heading_rate(ctx, wrap_angle(phi + kPi / 2), u, wind).value;
        CHECK(w == doctest::Approx(-kPi + ff));
    }
    SUBCASE("offset of 2 pi wraps to zero error") {
        const Scalar w =
            angular_velocity_command({ctx.position, wrap_angle(phi + 2 * kPi)}, ctx, u, wind, 2.0);
        const Scalar ff = heading_rate(ctx, wrap_angle(phi), u, wind).value;
        CHECK(w == doctest::Approx(ff));
    }
    SUBCASE("degenerate field tracks the anti-wind heading") {
        FieldContext at_goal{{0, 0}, {0, 0}, {}, 5.46, 7.28};
        const Scalar target = field_heading(-wind);
        const Scalar w = angular_velocity_command({{0, 0}, target}, at_goal, 0.0, wind, 2.0);
        CHECK(w == doctest::Approx(0.0));
        const Scalar w2 =
            angular_velocity_command({{0, 0}, wrap_angle(target + 0.5)}, at_goal, 0.0, wind, 2.0);
        CHECK(w2 == doctest::Approx(-2.0 * 0.5));
    }
}

TEST_CASE("nominal protocol branches") {
    const MarginSet zero = margins_from_bounds(0.0, 0.0, 0.8);
    SafetyParams s;
    s.d_m = 0.8;
    s.d_m_inflated = 0.8;
    s.eps_J = 0.0;
    s.comm_radius = 10.0;
    s.d_c = 8.0;
    s.d_r = 6.0;
    s.d_eps = 5.9;
    s.sharpness = 50.0;
    AgentParams params;
    const Vec2 goal{40.0, 0.0};
    const Pose own{{0, 0}, 0.0};

    SUBCASE("free branch") {
        std::vector<NeighborView> views = {{1, {9.0, 0.0}, kPi, 0.4}};
        const Scalar u = nominal_protocol_velocity(own, views, goal, params, s);
        FieldContext ctx{own.position, goal, {views[0].position}, s.d_r, s.d_c};
        CHECK(u == doctest::Approx(conflict_free_speed(
                       nominal_speed(own.position, goal, params.speed_gain),
                       blended_field(ctx), Vec2::Zero())));
    }
    SUBCASE("middle region holds the frozen hand-off value") {
        std::vector<NeighborView> views = {{1, {7.0, 0.0}, kPi, 0.4}};
        CHECK(nominal_protocol_velocity(own, views, goal, params, s, 0.33) ==
              doctest::Approx(0.33));
    }
    SUBCASE("empty critical set in the conflict band falls back to u_eps") {
        // neighbor close but behind the agent
        std::vector<NeighborView> views = {{1, {-2.0, 0.0}, kPi, 0.4}};
        CHECK(nominal_protocol_velocity(own, views, goal, params, s, 0.33) ==
              doctest::Approx(0.33));
    }
    SUBCASE("symmetric head-on pair at d_m keeps d_ij non-decreasing") {
        // agents facing each other at exactly d_m
        const Pose a{{0, 0}, 0.0};
        const Pose b{{0.8, 0.0}, kPi};
        std::vector<NeighborView> views_a = {{1, b.position, b.heading, 0.5}};
        std::vector<NeighborView> views_b = {{0, a.position, a.heading, 0.5}};
        const Scalar u_a =
            nominal_protocol_velocity(a, views_a, {40.0, 0.0}, params, s, 0.5);
        const Scalar u_b =
            nominal_protocol_velocity(b, views_b, {-40.0, 0.0}, params, s, 0.5);
        CHECK(u_a >= 0.0);
        CHECK(u_b >= 0.0);
        // d_dot per the relative-motion expression
        const Vec2 r_ji = a.position - b.position;
        const Scalar d_dot =
            (u_a * r_ji.dot(heading_vector(a.heading)) - u_b * r_ji.dot(heading_vector(b.heading))) /
            r_ji.norm();
        CHECK(d_dot >= -1e-9);
    }
}

TEST_CASE("Lemma 1: estimated guard implies true-frame condition") {
    // Box-sampled estimation errors at true distance d_m; whenever the
    // estimated guard fires, the true projection must be non-positive.
    const auto run = [](const MarginSet& m, int samples) {
        const Scalar d_m = 0.8;
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<Scalar> unit(-1.0, 1.0);
        int fired = 0;
        int counterexamples = 0;
        for (int k = 0; k < samples; ++k) {
            const Scalar bearing = unit(rng) * kPi;
            const Vec2 r_i{unit(rng) * 5.0, unit(rng) * 5.0};
            const Vec2 r_j = r_i - d_m * Vec2{std::cos(bearing), std::sin(bearing)};
            const Scalar theta_i = unit(rng) * kPi;
            const Vec2 r_i_hat = r_i + Vec2{unit(rng) * m.eps_x, unit(rng) * m.eps_y};
            const Vec2 r_j_hat = r_j + Vec2{unit(rng) * m.eps_x, unit(rng) * m.eps_y};
            const Scalar theta_i_hat = theta_i + unit(rng) * m.eps_theta;
            if ((r_i_hat - r_j_hat).dot(heading_vector(theta_i_hat)) <= -m.eps_J) {
                ++fired;
                if ((r_i - r_j).dot(heading_vector(theta_i)) > 0.0) ++counterexamples;
            }
        }
        CHECK(counterexamples == 0);
        return fired;
    };

    SUBCASE("production margins: zero counterexamples over 1e5 samples") {
        // eps_J exceeds any reachable projection at d_m, so the guard is
        // conservatively silent here; the oracle demands zero counterexamples.
        run(paper_margins(), 100000);
    }
    SUBCASE("tight margins actually exercise the guard") {
        const MarginSet tight = margins_from_bounds(0.3, 0.2, 0.8);
        CHECK(run(tight, 100000) > 0);
    }
}

TEST_CASE("wind cancels exactly in the relative-distance derivative") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<Scalar> unit(-1.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const Vec2 r_i{unit(rng) * 10, unit(rng) * 10};
        const Vec2 r_j{unit(rng) * 10, unit(rng) * 10};
        if ((r_i - r_j).norm() < 0.1) continue;
        const Scalar th_i = unit(rng) * kPi, th_j = unit(rng) * kPi;
        const Scalar u_i = std::abs(unit(rng)), u_j = std::abs(unit(rng));
        const Vec2 w{unit(rng) * 3, unit(rng) * 3};  // arbitrary shared wind

        const Vec2 v_i = u_i * heading_vector(th_i) + w;
        const Vec2 v_j = u_j * heading_vector(th_j) + w;
        const Scalar d = (r_i - r_j).norm();
        const Scalar full = (r_i - r_j).dot(v_i - v_j) / d;
        const Scalar wind_free =
            (u_i * (r_i - r_j).dot(heading_vector(th_i)) -
             u_j * (r_i - r_j).dot(heading_vector(th_j))) / d;
        CHECK(full == doctest::Approx(wind_free).epsilon(1e-12));
    }
}

TEST_CASE("d_dot non-negative at the inflated margin for receding criticals") {
    const MarginSet zero = margins_from_bounds(0.0, 0.0, 0.8);
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<Scalar> unit(-1.0, 1.0);
    MarginSet m;
    m.d_m_inflated = 2.0;
    const Scalar d_eps = 5.0;
    int tested = 0;
    while (tested < 2000) {
        const Pose own{{unit(rng) * 5, unit(rng) * 5}, unit(rng) * kPi};
        const Scalar bearing = unit(rng) * kPi;
        NeighborView nb;
        nb.position = own.position - m.d_m_inflated * Vec2{std::cos(bearing), std::sin(bearing)};
        nb.heading = unit(rng) * kPi;
        nb.speed = std::abs(unit(rng));
        const Vec2 r_ji = own.position - nb.position;
        // neighbor must be critical for i and itself moving away or field-following away
        if (r_ji.dot(heading_vector(own.heading)) >= -1e-6) continue;
        if (r_ji.dot(heading_vector(nb.heading)) > 0.0) continue;
        const Scalar u_i = std::max(
            0.0, safe_speed_wrt(0.7, nb, own, m.d_m_inflated, m, d_eps, 0.5));
        const Scalar d_dot = (u_i * r_ji.dot(heading_vector(own.heading)) -
                              nb.speed * r_ji.dot(heading_vector(nb.heading))) /
                             m.d_m_inflated;
        CHECK(d_dot >= -1e-9);
        ++tested;
    }
}

TEST_CASE("zero-noise reduction: robust command matches the nominal protocol") {
    const MarginSet zero = margins_from_bounds(0.0, 0.0, 0.8);
    SafetyParams s;
    s.d_m = 0.8;
    s.d_m_inflated = zero.d_m_inflated;
    s.eps_J = zero.eps_J;
    s.comm_radius = 10.0;
    s.d_c = 8.0;
    s.d_r = 6.0;
    s.d_eps = 5.9;
    s.sharpness = 50.0;
    AgentParams params;

    std::mt19937_64 rng(53);
    std::uniform_real_distribution<Scalar> unit(-1.0, 1.0);
    const Scalar bound = std::log(20.0) / 50.0;
    for (int k = 0; k < 1000; ++k) {
        const Pose own{{unit(rng) * 3, unit(rng) * 3}, unit(rng) * kPi};
        const Vec2 goal = own.position + Vec2{20.0 + unit(rng) * 5, unit(rng) * 10};
        std::vector<NeighborView> views;
        const int n = 1 + (k % 4);
        for (int j = 0; j < n; ++j) {
            const Scalar bearing = unit(rng) * kPi;
            const Scalar dist = 1.0 + 8.5 * std::abs(unit(rng));
            views.push_back({j, own.position + dist * Vec2{std::cos(bearing), std::sin(bearing)},
                             unit(rng) * kPi, std::abs(unit(rng))});
        }
        const LinearCommand robust =
            linear_velocity_command(own, views, goal, params, s, zero, Vec2::Zero());
        const Scalar nominal = nominal_protocol_velocity(own, views, goal, params, s);
        CHECK(std::abs(robust.speed - nominal) <= bound + 1e-12);
    }
}
