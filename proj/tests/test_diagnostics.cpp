#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dolb/diagnostics.hpp"

using namespace dolb;

namespace {

diag::VectorField make_field(std::array<std::int64_t, 3> dims) {
    diag::VectorField u;
    u.dims = dims;
    const std::size_t n = std::size_t(dims[0] * dims[1] * dims[2]);
    u.x.assign(n, 0.0);
    u.y.assign(n, 0.0);
    u.z.assign(n, 0.0);
    return u;
}

// Gauss-eliminated solution of the 4x4 Taylor moment system for the
// antisymmetric 8th-order first-derivative stencil.
std::array<double, 4> taylor_system_coefficients() {
    long double m[4][5] = {};
    for (int row = 0; row < 4; ++row) {
        const int order = 2 * row + 1;
        for (int k = 1; k <= 4; ++k) {
            long double p = 1.0L;
            for (int e = 0; e < order; ++e) p *= k;
            m[row][k - 1] = 2.0L * p / std::tgammal((long double)order + 1.0L);
        }
        m[row][4] = row == 0 ? 1.0L : 0.0L;
    }
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 4; ++row) {
            if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
        }
        for (int c = 0; c < 5; ++c) std::swap(m[col][c], m[pivot][c]);
        for (int row = 0; row < 4; ++row) {
            if (row == col) continue;
            const long double factor = m[row][col] / m[col][col];
            for (int c = 0; c < 5; ++c) m[row][c] -= factor * m[col][c];
        }
    }
    return {double(m[0][4] / m[0][0]), double(m[1][4] / m[1][1]), double(m[2][4] / m[2][2]),
            double(m[3][4] / m[3][3])};
}

}  // namespace

TEST_CASE("tree sum is deterministic and matches the serial sum closely") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> values(10001);
    for (auto& v : values) v = dist(rng);
    const double a = diag::tree_sum(values);
    const double b = diag::tree_sum(values);
    CHECK(a == b);
    long double serial = 0.0L;
    for (const double v : values) serial += v;
    CHECK(a == doctest::Approx(double(serial)).epsilon(1e-12));
}

TEST_CASE("kinetic energy: zero, uniform, TGV initial value") {
    auto u = make_field({8, 8, 8});
    CHECK(diag::kinetic_energy(u) == 0.0);

    for (auto& v : u.x) v = 0.3;
    CHECK(diag::kinetic_energy(u) == doctest::Approx(0.045).epsilon(1e-14));

    // TGV velocity field: k = u_inf^2 / 8 exactly at cell centers.
    const std::int64_t L = 64;
    auto tgv = make_field({L, L, L});
    const double u_inf = 0.11547;
    const double scale = 2.0 * std::numbers::pi / double(L);
    for (std::int64_t k = 0; k < L; ++k) {
        for (std::int64_t j = 0; j < L; ++j) {
            for (std::int64_t i = 0; i < L; ++i) {
                const double x = scale * (double(i) + 0.5);
                const double y = scale * (double(j) + 0.5);
                const double z = scale * (double(k) + 0.5);
                const std::size_t at = std::size_t(tgv.index(i, j, k));
                tgv.x[at] = u_inf * std::sin(x) * std::cos(y) * std::cos(z);
                tgv.y[at] = -u_inf * std::cos(x) * std::sin(y) * std::cos(z);
            }
        }
    }
    CHECK(diag::kinetic_energy(tgv) ==
          doctest::Approx(u_inf * u_inf / 8.0).epsilon(1e-10));
}

TEST_CASE("fd8 coefficients solve the Taylor moment system") {
    const auto expect = taylor_system_coefficients();
    const auto got = diag::fd8_coefficients();
    for (int k = 0; k < 4; ++k) {
        CHECK(got[std::size_t(k)] == doctest::Approx(expect[std::size_t(k)]).epsilon(1e-14));
    }
    // First moment sums to 1/2 per side; higher odd moments vanish.
    double m1 = 0, m3 = 0, m5 = 0, m7 = 0;
    for (int k = 1; k <= 4; ++k) {
        const double c = got[std::size_t(k - 1)];
        m1 += c * k;
        m3 += c * k * k * k;
        m5 += c * std::pow(k, 5);
        m7 += c * std::pow(k, 7);
    }
    CHECK(m1 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(m3) <= 1e-13);
    CHECK(std::abs(m5) <= 1e-12);
    CHECK(std::abs(m7) <= 1e-11);
}

TEST_CASE("vorticity: linear shear gives a unit curl") {
    auto u = make_field({16, 16, 16});
    // u_y = x on a non-periodic axis cannot wrap; use the interior instead.
    for (std::int64_t k = 0; k < 16; ++k) {
        for (std::int64_t j = 0; j < 16; ++j) {
            for (std::int64_t i = 0; i < 16; ++i) {
                u.y[std::size_t(u.index(i, j, k))] = double(i);
            }
        }
    }
    const auto w = diag::vorticity_fd8(u, {false, false, false});
    for (std::int64_t k = 0; k < 16; ++k) {
        for (std::int64_t j = 0; j < 16; ++j) {
            for (std::int64_t i = 0; i < 16; ++i) {
                const std::size_t at = std::size_t(u.index(i, j, k));
                if (!w.valid[at]) continue;
                CHECK(w.omega.z[at] == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(std::abs(w.omega.x[at]) <= 1e-12);
                CHECK(std::abs(w.omega.y[at]) <= 1e-12);
            }
        }
    }
    // Cells within four of a wall are excluded.
    CHECK(w.valid[std::size_t(u.index(3, 8, 8))] == 0);
    CHECK(w.valid[std::size_t(u.index(4, 8, 8))] == 1);
    CHECK(w.valid[std::size_t(u.index(12, 8, 8))] == 0);
}

TEST_CASE("vorticity: sine wave derivative to 1e-9 at 64 points") {
    const std::int64_t L = 64;
    auto u = make_field({L, 4, 4});
    const double kx = 2.0 * std::numbers::pi / double(L);
    for (std::int64_t k = 0; k < 4; ++k) {
        for (std::int64_t j = 0; j < 4; ++j) {
            for (std::int64_t i = 0; i < L; ++i) {
                u.y[std::size_t(u.index(i, j, k))] = std::sin(kx * double(i));
            }
        }
    }
    const auto w = diag::vorticity_fd8(u, {true, true, true});
    for (std::int64_t i = 0; i < L; ++i) {
        const double expect = kx * std::cos(kx * double(i));
        const double got = w.omega.z[std::size_t(u.index(i, 2, 2))];
        CHECK(std::abs(got - expect) / kx <= 1e-9);
    }
}

TEST_CASE("vorticity of a polynomial gradient field vanishes") {
    // phi = x^2 y + y^3 z - 2 x z^2; u = grad(phi) has zero curl, and the
    // stencil is exact for polynomials of degree <= 8.
    const std::int64_t n = 14;
    auto u = make_field({n, n, n});
    for (std::int64_t k = 0; k < n; ++k) {
        for (std::int64_t j = 0; j < n; ++j) {
            for (std::int64_t i = 0; i < n; ++i) {
                const double x = double(i), y = double(j), z = double(k);
                const std::size_t at = std::size_t(u.index(i, j, k));
                u.x[at] = 2.0 * x * y - 2.0 * z * z;
                u.y[at] = x * x + 3.0 * y * y * z;
                u.z[at] = y * y * y - 4.0 * x * z;
            }
        }
    }
    const auto w = diag::vorticity_fd8(u, {false, false, false});
    for (std::size_t at = 0; at < w.valid.size(); ++at) {
        if (!w.valid[at]) continue;
        CHECK(std::abs(w.omega.x[at]) <= 1e-9);
        CHECK(std::abs(w.omega.y[at]) <= 1e-9);
        CHECK(std::abs(w.omega.z[at]) <= 1e-9);
    }

    CHECK_THROWS_AS((void)diag::vorticity_fd8(make_field({8, 9, 9}), {false, true, true}),
                    std::invalid_argument);
}

TEST_CASE("enstrophy: zero, uniform, TGV analytic value") {
    diag::VorticityField w;
    w.omega = make_field({6, 6, 6});
    w.valid.assign(w.omega.x.size(), 1);
    CHECK(diag::enstrophy(w) == 0.0);

    for (auto& v : w.omega.z) v = 0.4;
    CHECK(diag::enstrophy(w) == doctest::Approx(0.08).epsilon(1e-14));

    // TGV t = 0: the analytic curl gives epsilon = 3 u^2 / 8 in box units,
    // scaled by (2 pi / L)^2 on the lattice. The quadrature oracle sums the
    // symbolic curl at cell centers; fd8 on the velocity field must match.
    const std::int64_t L = 64;
    auto u = make_field({L, L, L});
    auto curl = make_field({L, L, L});
    const double u_inf = 0.11547;
    const double scale = 2.0 * std::numbers::pi / double(L);
    for (std::int64_t k = 0; k < L; ++k) {
        for (std::int64_t j = 0; j < L; ++j) {
            for (std::int64_t i = 0; i < L; ++i) {
                const double x = scale * (double(i) + 0.5);
                const double y = scale * (double(j) + 0.5);
                const double z = scale * (double(k) + 0.5);
                const std::size_t at = std::size_t(u.index(i, j, k));
                u.x[at] = u_inf * std::sin(x) * std::cos(y) * std::cos(z);
                u.y[at] = -u_inf * std::cos(x) * std::sin(y) * std::cos(z);
                curl.x[at] = scale * u_inf * std::cos(x) * std::sin(y) * std::sin(z);
                curl.y[at] = scale * u_inf * std::sin(x) * std::cos(y) * std::sin(z);
                curl.z[at] = -2.0 * scale * u_inf * std::cos(x) * std::cos(y) * std::cos(z);
            }
        }
    }
    std::vector<double> payload(u.x.size());
    for (std::size_t at = 0; at < payload.size(); ++at) {
        payload[at] = 0.5 * (curl.x[at] * curl.x[at] + curl.y[at] * curl.y[at] +
                             curl.z[at] * curl.z[at]);
    }
    const double eps_quadrature = diag::tree_mean(payload);
    const double eps_analytic = 3.0 * u_inf * u_inf / 8.0 * scale * scale;
    CHECK(eps_quadrature == doctest::Approx(eps_analytic).epsilon(1e-10));

    const double eps_fd8 = diag::enstrophy(diag::vorticity_fd8(u, {true, true, true}));
    CHECK(eps_fd8 == doctest::Approx(eps_quadrature).epsilon(1e-8));
}

TEST_CASE("reductions are invariant under axis permutations") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    const std::int64_t n = 12;
    auto u = make_field({n, n, n});
    for (std::size_t at = 0; at < u.x.size(); ++at) {
        u.x[at] = dist(rng);
        u.y[at] = dist(rng);
        u.z[at] = dist(rng);
    }
    // Permute axes (x,y,z) -> (y,z,x) including the vector components.
    auto v = make_field({n, n, n});
    for (std::int64_t k = 0; k < n; ++k) {
        for (std::int64_t j = 0; j < n; ++j) {
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t from = std::size_t(u.index(i, j, k));
                const std::size_t to = std::size_t(v.index(j, k, i));
                v.x[to] = u.y[from];
                v.y[to] = u.z[from];
                v.z[to] = u.x[from];
            }
        }
    }
    CHECK(diag::kinetic_energy(u) == doctest::Approx(diag::kinetic_energy(v)).epsilon(1e-13));
    const double ea = diag::enstrophy(diag::vorticity_fd8(u, {true, true, true}));
    const double eb = diag::enstrophy(diag::vorticity_fd8(v, {true, true, true}));
    CHECK(ea == doctest::Approx(eb).epsilon(1e-12));
}

TEST_CASE("permeability formula and millidarcy conversion") {
    CHECK(diag::permeability(0.0, 0.1, 20.0, 1e-3) == 0.0);
    CHECK(diag::permeability(2e-4, 1.0 / 6.0, 19.0, 1e-4) ==
          doctest::Approx(2e-4 / 6.0 * 19.0 / 1e-4).epsilon(1e-14));
    CHECK_THROWS_AS((void)diag::permeability(1e-3, 0.1, 10.0, 0.0), std::domain_error);

    // 1 mD in lattice units at dx = 1 m is 1 / 9.869233e-16.
    CHECK(diag::to_millidarcy(9.869233e-16, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    // Berea-style conversion: k in mD scales with dx^2.
    const double dx = 5.345e-6;
    CHECK(diag::to_millidarcy(0.0617, dx) ==
          doctest::Approx(0.0617 * dx * dx / 9.869233e-16).epsilon(1e-14));
}

TEST_CASE("averaged profiles") {
    CHECK(diag::averaged_profile({{1.0, 2.0, 3.0}}) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(diag::averaged_profile({{0.5, -1.0}, {-0.5, 1.0}}) == std::vector<double>{0.0, 0.0});

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::vector<double>> snaps(9, std::vector<double>(17));
    for (auto& snap : snaps) {
        for (auto& v : snap) v = dist(rng);
    }
    const auto mean = diag::averaged_profile(snaps);
    for (std::size_t p = 0; p < 17; ++p) {
        long double s = 0.0L;
        for (const auto& snap : snaps) s += snap[p];
        CHECK(mean[p] == doctest::Approx(double(s / 9.0L)).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)diag::averaged_profile({}), std::invalid_argument);

    CHECK(diag::normalized_coordinate(0.0, 64.0) == -1.0);
    CHECK(diag::normalized_coordinate(32.0, 64.0) == 0.0);
    CHECK(diag::normalized_coordinate(64.0, 64.0) == 1.0);
}

TEST_CASE("diagnostics series CSV round trip") {
    diag::DiagnosticsSeries series;
    series.extra_names = {"k_over_k0", "eps_over_eps0"};
    series.append({0, 0.0, 1.5e-3, 2.5e-5, {1.0, 1.0}});
    series.append({11, 0.125, 1.4e-3, 2.6e-5, {0.933333, 1.04}});
    const std::string csv = series.to_csv();
    const auto parsed = diag::DiagnosticsSeries::from_csv(csv);
    CHECK(parsed.extra_names == series.extra_names);
    REQUIRE(parsed.rows.size() == 2);
    CHECK(parsed.rows[1].step == 11);
    CHECK(parsed.rows[1].kinetic == series.rows[1].kinetic);
    CHECK(parsed.rows[1].extras == series.rows[1].extras);
    CHECK(parsed.to_csv() == csv);

    CHECK_THROWS_AS(series.append({11, 0.125, 1.0, 1.0, {1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(series.append({12, 0.3, std::nan(""), 1.0, {1.0, 1.0}}),
                    std::invalid_argument);
}
