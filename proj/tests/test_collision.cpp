#include <doctest.h>

#include <cmath>
#include <random>

#include "dolb/chain.hpp"
#include "dolb/collision.hpp"
#include "dolb/reference_lattice.hpp"

using namespace dolb;

namespace {

Populations<double> random_near_equilibrium(std::mt19937& rng, double rho,
                                            std::array<double, 3> u, double noise) {
    std::uniform_real_distribution<double> dist(-noise, noise);
    auto f = equilibrium2(rho, u);
    for (auto& v : f) v += dist(rng);
    return f;
}

void check_conserved(const Populations<double>& before, const Populations<double>& after,
                     double tol = 1e-13) {
    double m0 = 0, m1 = 0;
    std::array<double, 3> j0 = {0, 0, 0}, j1 = {0, 0, 0};
    for (int i = 0; i < 19; ++i) {
        m0 += before[i];
        m1 += after[i];
        for (int a = 0; a < 3; ++a) {
            j0[a] += D3Q19::c[i][a] * before[i];
            j1[a] += D3Q19::c[i][a] * after[i];
        }
    }
    CHECK(std::abs(m1 - m0) <= tol * std::max(1.0, std::abs(m0)));
    for (int a = 0; a < 3; ++a) {
        CHECK(std::abs(j1[a] - j0[a]) <= tol);
    }
}

}  // namespace

TEST_CASE("bgk: equilibrium is a fixed point") {
    for (double omega : {0.6, 1.0, 1.7}) {
        auto f = equilibrium2<double>(1.01, {0.03, -0.02, 0.01});
        const auto before = f;
        collision::bgk(f, omega);
        for (int i = 0; i < 19; ++i) {
            CHECK(f[i] == doctest::Approx(before[i]).epsilon(1e-13));
        }
    }
}

TEST_CASE("bgk: omega = 1 lands on the equilibrium of the moments") {
    std::mt19937 rng(3);
    auto f = random_near_equilibrium(rng, 1.0, {0.02, 0.01, -0.03}, 5e-3);
    double rho;
    std::array<double, 3> u;
    compute_rho_u(f, rho, u);
    const auto feq = equilibrium2(rho, u);
    collision::bgk(f, 1.0);
    for (int i = 0; i < 19; ++i) {
        CHECK(f[i] == doctest::Approx(feq[i]).epsilon(1e-13));
    }
}

TEST_CASE("bgk: per-direction oracle at omega 1.7") {
    std::mt19937 rng(5);
    const auto f0 = random_near_equilibrium(rng, 1.0, {0.05, 0.0, -0.01}, 1e-2);
    double rho;
    std::array<double, 3> u;
    compute_rho_u(f0, rho, u);
    const auto feq = equilibrium2(rho, u);
    auto f = f0;
    collision::bgk(f, 1.7);
    for (int i = 0; i < 19; ++i) {
        const double expect = f0[i] - 1.7 * (f0[i] - feq[i]);
        CHECK(f[i] == doctest::Approx(expect).epsilon(1e-13));
    }
    check_conserved(f0, f);
}

TEST_CASE("trt: equilibrium fixed point and degeneration to bgk") {
    std::mt19937 rng(9);
    auto fe = equilibrium2<double>(1.0, {0.02, 0.02, 0.0});
    auto fe2 = fe;
    collision::trt(fe2, 1.3, CollisionParams::derive_omega_minus(1.3, 3.0 / 16.0));
    for (int i = 0; i < 19; ++i) CHECK(fe2[i] == doctest::Approx(fe[i]).epsilon(1e-13));

    // omega_minus == omega collapses to single-rate relaxation.
    const auto f0 = random_near_equilibrium(rng, 1.0, {0.01, -0.02, 0.04}, 1e-2);
    auto f_trt = f0;
    auto f_bgk = f0;
    collision::trt(f_trt, 1.4, 1.4);
    collision::bgk(f_bgk, 1.4);
    for (int i = 0; i < 19; ++i) {
        CHECK(f_trt[i] == doctest::Approx(f_bgk[i]).epsilon(1e-12));
    }
}

TEST_CASE("trt: brute-force parity split oracle") {
    std::mt19937 rng(13);
    const double omega = 1.2;
    const double lambda = 3.0 / 16.0;
    const double omega_minus = CollisionParams::derive_omega_minus(omega, lambda);
    CHECK((1.0 / omega - 0.5) * (1.0 / omega_minus - 0.5) ==
          doctest::Approx(lambda).epsilon(1e-14));

    const auto f0 = random_near_equilibrium(rng, 1.02, {0.03, 0.01, -0.02}, 2e-2);
    double rho;
    std::array<double, 3> u;
    compute_rho_u(f0, rho, u);
    const auto feq = equilibrium2(rho, u);
    auto f = f0;
    collision::trt(f, omega, omega_minus);
    for (int i = 0; i < 19; ++i) {
        const int j = D3Q19::opposite[i];
        const double fp = 0.5 * (f0[i] + f0[j]);
        const double fm = 0.5 * (f0[i] - f0[j]);
        const double ep = 0.5 * (feq[i] + feq[j]);
        const double em = 0.5 * (feq[i] - feq[j]);
        const double expect = f0[i] - omega * (fp - ep) - omega_minus * (fm - em);
        CHECK(f[i] == doctest::Approx(expect).epsilon(1e-12));
    }
    check_conserved(f0, f);
}

TEST_CASE("rr: fourth-order equilibrium is a fixed point") {
    auto f = equilibrium4<double>(1.01, {0.04, -0.03, 0.02});
    const auto before = f;
    collision::rr(f, 1.6, 1.0);
    for (int i = 0; i < 19; ++i) {
        CHECK(f[i] == doctest::Approx(before[i]).epsilon(5e-13));
    }
}

TEST_CASE("rr: regularization is idempotent") {
    std::mt19937 rng(17);
    // omega = omega_bulk_ho = 0 keeps the full reconstructed off-equilibrium,
    // isolating the projection.
    auto f = random_near_equilibrium(rng, 1.0, {0.05, 0.02, -0.01}, 2e-2);
    auto once = f;
    collision::rr(once, 0.0, 0.0);
    auto twice = once;
    collision::rr(twice, 0.0, 0.0);
    for (int i = 0; i < 19; ++i) {
        CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-11));
    }
}

TEST_CASE("rr: regularized off-equilibrium reproduces the input Pi") {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f0 = random_near_equilibrium(rng, 1.0, {0.02, 0.03, -0.01}, 1e-2);
        const auto pi_in = moments(f0).pi_neq;
        auto f = f0;
        collision::rr(f, 0.0, 0.0);  // pure reconstruction, no relaxation
        const auto pi_out = moments(f).pi_neq;
        for (int k = 0; k < 6; ++k) {
            CHECK(pi_out[std::size_t(k)] ==
                  doctest::Approx(pi_in[std::size_t(k)]).epsilon(1e-10));
        }
        check_conserved(f0, f, 1e-12);
    }
}

TEST_CASE("rr and bgk agree near equilibrium at small velocity") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-1e-8, 1e-8);
    const std::array<double, 3> u = {1e-3, 5e-4, 0.0};
    auto f = equilibrium2<double>(1.0, u);
    for (auto& v : f) v += dist(rng);
    auto f_rr = f;
    auto f_bgk = f;
    collision::rr(f_rr, 1.5, 1.0);
    collision::bgk(f_bgk, 1.5);
    for (int i = 0; i < 19; ++i) {
        const double scale = std::abs(f_bgk[i]) + D3Q19::w[i];
        CHECK(std::abs(f_rr[i] - f_bgk[i]) / scale <= 1e-6);
    }
}

TEST_CASE("smagorinsky: laminar limit and zero constant") {
    auto feq = equilibrium2<double>(1.0, {0.02, 0.0, 0.01});
    CHECK(collision::smagorinsky_omega(feq, 1.6, 0.16) == doctest::Approx(1.6).epsilon(1e-12));

    std::mt19937 rng(29);
    const auto f = random_near_equilibrium(rng, 1.0, {0.03, 0.01, 0.0}, 1e-2);
    CHECK(collision::smagorinsky_omega(f, 1.6, 0.0) == doctest::Approx(1.6).epsilon(1e-14));
}

TEST_CASE("smagorinsky: closed-form effective rate for a synthetic stress") {
    // Build populations whose off-equilibrium is exactly w_i H_xy Pi / cs4.
    const double pi_xy = 3e-4;
    auto f = equilibrium2<double>(1.0, {0.0, 0.0, 0.0});
    for (int i = 0; i < 19; ++i) {
        const double cx = D3Q19::c[i][0], cy = D3Q19::c[i][1];
        f[i] += D3Q19::w[i] * 4.5 * 2.0 * cx * cy * pi_xy;
    }
    const auto m = moments(f);
    CHECK(m.pi_neq[1] == doctest::Approx(pi_xy).epsilon(1e-12));

    const double omega0 = 1.7;
    const double c_smago = 0.16;
    const double q_norm = std::sqrt(2.0 * (2.0 * pi_xy * pi_xy));
    const double tau0 = 1.0 / omega0;
    const double cs4 = 1.0 / 9.0;
    const double tau_expected =
        0.5 * (tau0 + std::sqrt(tau0 * tau0 + 2.0 * c_smago * c_smago * q_norm / (1.0 * cs4)));
    const double omega_eff = collision::smagorinsky_omega(f, omega0, c_smago);
    CHECK(omega_eff == doctest::Approx(1.0 / tau_expected).epsilon(1e-12));
    CHECK(omega_eff <= omega0);
}

TEST_CASE("all collision kernels conserve mass and momentum on random input") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(-0.02, 0.02);
    for (int trial = 0; trial < 25; ++trial) {
        Populations<double> f0;
        for (auto& v : f0) v = dist(rng);
        auto f_bgk = f0, f_trt = f0, f_rr = f0;
        collision::bgk(f_bgk, 1.7);
        collision::trt(f_trt, 1.2, CollisionParams::derive_omega_minus(1.2, 3.0 / 16.0));
        collision::rr(f_rr, 1.9, 1.0);
        check_conserved(f0, f_bgk);
        check_conserved(f0, f_trt);
        check_conserved(f0, f_rr, 1e-12);
    }
}

TEST_CASE("shear wave decays with the BGK viscosity") {
    // u_y(x) = A sin(2 pi x / 64) on a 64 x 4 x 4 periodic box.
    const std::int64_t n = 64;
    const double omega = 1.3;
    const double nu = viscosity_from_omega(omega);
    const double kx = 2.0 * std::acos(-1.0) / double(n);
    const double amplitude = 1e-4;

    ReferenceLattice lattice({n, 4, 4}, {true, true, true});
    CollisionParams params;
    params.omega = omega;
    lattice.set_chain({{0, 0, 0}, {n, 4, 4}}, make_collision_chain(LinkType::BGK, params));
    for (std::int64_t z = 0; z < 4; ++z) {
        for (std::int64_t y = 0; y < 4; ++y) {
            for (std::int64_t x = 0; x < n; ++x) {
                const double uy = amplitude * std::sin(kx * (double(x) + 0.5));
                lattice.cell(x, y, z).f = equilibrium2<double>(1.0, {0.0, uy, 0.0});
            }
        }
    }

    auto fourier_amplitude = [&]() {
        double s = 0.0;
        for (std::int64_t x = 0; x < n; ++x) {
            double rho;
            std::array<double, 3> u;
            compute_rho_u(lattice.cell(x, 0, 0).f, rho, u);
            s += u[1] * std::sin(kx * (double(x) + 0.5));
        }
        return 2.0 * s / double(n);
    };

    const double a0 = fourier_amplitude();
    const int steps = 1000;
    for (int t = 0; t < steps; ++t) lattice.collide_and_stream();
    const double a1 = fourier_amplitude();
    const double nu_measured = std::log(a0 / a1) / (kx * kx * double(steps));
    CHECK(nu_measured == doctest::Approx(nu).epsilon(0.01));
}
