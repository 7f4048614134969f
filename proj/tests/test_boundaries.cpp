#include <doctest.h>

#include <cmath>
#include <random>

#include "dolb/boundaries.hpp"
#include "dolb/descriptor.hpp"

using namespace dolb;

namespace {

Populations<double> random_populations(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Populations<double> f;
    for (auto& v : f) v = dist(rng);
    return f;
}

std::array<double, 3> momentum(const Populations<double>& f) {
    std::array<double, 3> j = {0, 0, 0};
    for (int i = 0; i < 19; ++i) {
        for (int a = 0; a < 3; ++a) j[a] += D3Q19::c[i][a] * f[i];
    }
    return j;
}

}  // namespace

TEST_CASE("bounce back: symmetric input unchanged, involution, momentum reversal") {
    auto fe = equilibrium2<double>(1.0, {0.0, 0.0, 0.0});
    auto fe2 = fe;
    boundary::bounce_back(fe2);
    for (int i = 0; i < 19; ++i) CHECK(fe2[i] == fe[i]);

    std::mt19937 rng(41);
    const auto f0 = random_populations(rng, 0.05);
    auto f = f0;
    boundary::bounce_back(f);
    const auto j0 = momentum(f0);
    const auto j1 = momentum(f);
    for (int a = 0; a < 3; ++a) CHECK(j1[a] == doctest::Approx(-j0[a]).epsilon(1e-14));
    // Pure permutation: each value is preserved exactly.
    for (int i = 0; i < 19; ++i) CHECK(f[i] == f0[D3Q19::opposite[i]]);

    boundary::bounce_back(f);
    for (int i = 0; i < 19; ++i) CHECK(f[i] == f0[i]);
}

TEST_CASE("moving bounce back: zero wall velocity equals bounce back") {
    std::mt19937 rng(43);
    const auto f0 = random_populations(rng, 0.05);
    auto f_plain = f0, f_moving = f0;
    boundary::bounce_back(f_plain);
    boundary::moving_bounce_back(f_moving, {0.0, 0.0, 0.0});
    for (int i = 0; i < 19; ++i) CHECK(f_moving[i] == f_plain[i]);
}

TEST_CASE("moving bounce back: Ladd correction per direction") {
    std::mt19937 rng(47);
    const double u_wall = 0.1 / std::sqrt(3.0);  // lid speed at Ma = 0.1
    const auto f0 = random_populations(rng, 0.05);
    auto f = f0;
    boundary::moving_bounce_back(f, {u_wall, 0.0, 0.0});
    for (int i = 0; i < 19; ++i) {
        const double correction = 2.0 * D3Q19::w[i] * 3.0 * D3Q19::c[i][0] * u_wall;
        const double expect = f0[D3Q19::opposite[i]] + correction;
        CHECK(f[i] == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("moving bounce back is linear in the wall velocity") {
    std::mt19937 rng(53);
    const auto f0 = random_populations(rng, 0.05);
    const std::array<double, 3> ua = {0.01, -0.02, 0.005};
    const std::array<double, 3> ub = {-0.004, 0.006, 0.012};
    auto f_sum = f0;
    boundary::moving_bounce_back(f_sum, {ua[0] + ub[0], ua[1] + ub[1], ua[2] + ub[2]});
    auto f_a = f0, f_b = f0;
    boundary::moving_bounce_back(f_a, ua);
    boundary::moving_bounce_back(f_b, ub);
    for (int i = 0; i < 19; ++i) {
        // f(ua + ub) - f(ua) equals the pure correction of ub.
        const double lhs = f_sum[i] - f_a[i];
        const double rhs = f_b[i] - f0[D3Q19::opposite[i]];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }
}

TEST_CASE("regularized velocity: equilibrium inflow passes through") {
    const std::array<double, 3> u_in = {0.02, 0.0, 0.0};
    auto f = equilibrium2<double>(1.0, u_in);
    const auto expect = f;
    boundary::regularized_velocity(f, {0, 1}, u_in);
    for (int i = 0; i < 19; ++i) {
        CHECK(f[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("regularized velocity: closed-form density recovery") {
    // Uniform 1-D state: rho recovery must equal (S0 + 2 S_out) / (1 - ux).
    const double rho_true = 1.004;
    const std::array<double, 3> u_true = {0.03, 0.0, 0.0};
    auto f = equilibrium2<double>(rho_true, u_true);
    double s0 = 0.0, s_out = 0.0;
    for (int i = 0; i < 19; ++i) {
        const double raw = f[i] + D3Q19::w[i];
        if (D3Q19::c[i][0] == 0) s0 += raw;
        if (D3Q19::c[i][0] < 0) s_out += raw;
    }
    const double rho_recovered = (s0 + 2.0 * s_out) / (1.0 - u_true[0]);
    CHECK(rho_recovered == doctest::Approx(rho_true).epsilon(1e-13));

    boundary::regularized_velocity(f, {0, 1}, u_true);
    const auto m = moments(f);
    CHECK(m.rho == doctest::Approx(rho_true).epsilon(1e-12));
    CHECK(m.u[0] == doctest::Approx(u_true[0]).epsilon(1e-12));
}

TEST_CASE("regularized pressure: prescribed density, recovered normal velocity") {
    const double rho_target = 1.002;
    const std::array<double, 3> u_true = {0.015, 0.0, 0.0};
    auto f = equilibrium2<double>(rho_target, u_true);
    boundary::regularized_pressure(f, {0, 1}, rho_target);
    const auto m = moments(f);
    CHECK(m.rho == doctest::Approx(rho_target).epsilon(1e-12));
    CHECK(m.u[0] == doctest::Approx(u_true[0]).epsilon(5e-3));
}

TEST_CASE("regularized output depends only on rho, u and Pi") {
    // Two inputs share (rho, u, Pi): the second adds a symmetric perturbation
    // with vanishing mass, momentum and second moment.
    const std::array<double, 3> u_in = {0.025, 0.01, 0.0};
    auto base = equilibrium2<double>(1.0, u_in);
    for (int i = 0; i < 19; ++i) {
        const double cx = D3Q19::c[i][0], cy = D3Q19::c[i][1];
        base[i] += D3Q19::w[i] * 4.5 * (2.0 * cx * cy * 2e-4);
    }
    auto perturbed = base;
    const double a = 3e-4;
    auto add = [&perturbed](int cx, int cy, int cz, double v) {
        for (int i = 0; i < 19; ++i) {
            if (D3Q19::c[i][0] == cx && D3Q19::c[i][1] == cy && D3Q19::c[i][2] == cz) {
                perturbed[i] += v;
            }
        }
    };
    // +a on the four xy diagonals, -2a on the x and y axis pairs, +4a at rest:
    // zero mass, momentum and Pi, nonzero fourth moments.
    add(1, 1, 0, a);
    add(-1, -1, 0, a);
    add(1, -1, 0, a);
    add(-1, 1, 0, a);
    add(1, 0, 0, -2.0 * a);
    add(-1, 0, 0, -2.0 * a);
    add(0, 1, 0, -2.0 * a);
    add(0, -1, 0, -2.0 * a);
    add(0, 0, 0, 4.0 * a);

    const auto mb = moments(base);
    const auto mp = moments(perturbed);
    CHECK(mp.rho == doctest::Approx(mb.rho).epsilon(1e-14));
    for (int k = 0; k < 6; ++k) {
        CHECK(mp.pi_neq[std::size_t(k)] ==
              doctest::Approx(mb.pi_neq[std::size_t(k)]).epsilon(1e-12));
    }

    boundary::regularized_velocity(base, {0, 1}, u_in);
    boundary::regularized_velocity(perturbed, {0, 1}, u_in);
    for (int i = 0; i < 19; ++i) {
        CHECK(perturbed[i] == doctest::Approx(base[i]).epsilon(1e-11));
    }
}
