#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace dolb {

// D3Q19 lattice constants. Populations are stored in offset form throughout
// the code base: fbar_i = f_i - w_i, so that a resting fluid at density 1 is
// represented by all zeros. All moment formulas below account for the offset.
struct D3Q19 {
    static constexpr int q = 19;
    static constexpr double cs2 = 1.0 / 3.0;

    // Velocity ordering: rest, the 6 axis directions, then the 12 face
    // diagonals. Opposite directions are adjacent pairs so that
    // opposite(i) = i +/- 1 for i >= 1. This table is frozen: file dumps and
    // golden data depend on it.
    static constexpr std::array<std::array<int, 3>, 19> c = {{
        {0, 0, 0},
        {-1, 0, 0}, {1, 0, 0},
        {0, -1, 0}, {0, 1, 0},
        {0, 0, -1}, {0, 0, 1},
        {-1, -1, 0}, {1, 1, 0},
        {-1, 1, 0}, {1, -1, 0},
        {-1, 0, -1}, {1, 0, 1},
        {-1, 0, 1}, {1, 0, -1},
        {0, -1, -1}, {0, 1, 1},
        {0, -1, 1}, {0, 1, -1},
    }};

    static constexpr std::array<double, 19> w = {
        1.0 / 3.0,
        1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0,
        1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
        1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
    };

    static constexpr std::array<int, 19> opposite = {
        0,
        2, 1, 4, 3, 6, 5,
        8, 7, 10, 9, 12, 11, 14, 13, 16, 15, 18, 17,
    };
};

template <typename T>
using Populations = std::array<T, 19>;

// Symmetric 3x3 tensor, components ordered xx, xy, xz, yy, yz, zz.
template <typename T>
using SymTensor = std::array<T, 6>;

template <typename T>
struct Moments {
    T rho;
    std::array<T, 3> u;
    SymTensor<T> pi_neq;
};

// Density and velocity from offset populations. Sum over w_i cancels to 1 for
// the density and to 0 for the momentum, so only fbar enters the sums.
template <typename T>
inline void compute_rho_u(const Populations<T>& f, T& rho, std::array<T, 3>& u) {
    T drho = 0;
    T jx = 0, jy = 0, jz = 0;
    for (int i = 0; i < D3Q19::q; ++i) {
        drho += f[i];
        jx += T(D3Q19::c[i][0]) * f[i];
        jy += T(D3Q19::c[i][1]) * f[i];
        jz += T(D3Q19::c[i][2]) * f[i];
    }
    rho = T(1) + drho;
    u = {jx / rho, jy / rho, jz / rho};
}

// Second-order weighted equilibrium, returned in offset form.
template <typename T>
inline Populations<T> equilibrium2(T rho, const std::array<T, 3>& u) {
    const T inv_cs2 = T(3);
    const T usqr = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    Populations<T> feq;
    for (int i = 0; i < D3Q19::q; ++i) {
        const T wi = T(D3Q19::w[i]);
        const T cu = T(D3Q19::c[i][0]) * u[0] + T(D3Q19::c[i][1]) * u[1] +
                     T(D3Q19::c[i][2]) * u[2];
        const T series = inv_cs2 * cu + T(4.5) * cu * cu - T(1.5) * usqr;
        feq[i] = wi * (rho - T(1)) + wi * rho * series;
    }
    return feq;
}

// Hermite equilibrium truncated at order three, returned in offset form. The
// third-order contribution uses the six polynomials c_b (c_a^2 - cs2), a != b,
// which are the only degree-3 Hermite polynomials that do not vanish on the
// D3Q19 velocity set.
template <typename T>
inline Populations<T> equilibrium4(T rho, const std::array<T, 3>& u) {
    const T inv_cs2 = T(3);
    const T cs2 = T(1) / T(3);
    const T inv_2cs6 = T(13.5);  // 1 / (2 cs2^3)
    const T usqr = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    Populations<T> feq;
    for (int i = 0; i < D3Q19::q; ++i) {
        const T wi = T(D3Q19::w[i]);
        const T cx = T(D3Q19::c[i][0]);
        const T cy = T(D3Q19::c[i][1]);
        const T cz = T(D3Q19::c[i][2]);
        const T cu = cx * u[0] + cy * u[1] + cz * u[2];
        const T hxx = cx * cx - cs2;
        const T hyy = cy * cy - cs2;
        const T hzz = cz * cz - cs2;
        const T third = cy * hxx * u[0] * u[0] * u[1] + cz * hxx * u[0] * u[0] * u[2] +
                        cx * hyy * u[1] * u[1] * u[0] + cz * hyy * u[1] * u[1] * u[2] +
                        cx * hzz * u[2] * u[2] * u[0] + cy * hzz * u[2] * u[2] * u[1];
        const T series = inv_cs2 * cu + T(4.5) * cu * cu - T(1.5) * usqr + inv_2cs6 * third;
        feq[i] = wi * (rho - T(1)) + wi * rho * series;
    }
    return feq;
}

// Off-equilibrium second-order tensor Pi = sum_i c_i c_i (f_i - f_i^eq).
// The equilibrium reference is equilibrium2; the order-3 correction of
// equilibrium4 carries no second moment, so both references agree.
template <typename T>
inline SymTensor<T> pi_neq(const Populations<T>& f, T rho, const std::array<T, 3>& u) {
    const Populations<T> feq = equilibrium2(rho, u);
    SymTensor<T> pi = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < D3Q19::q; ++i) {
        const T fn = f[i] - feq[i];
        const T cx = T(D3Q19::c[i][0]);
        const T cy = T(D3Q19::c[i][1]);
        const T cz = T(D3Q19::c[i][2]);
        pi[0] += cx * cx * fn;
        pi[1] += cx * cy * fn;
        pi[2] += cx * cz * fn;
        pi[3] += cy * cy * fn;
        pi[4] += cy * cz * fn;
        pi[5] += cz * cz * fn;
    }
    return pi;
}

// Full moment extraction. Throws on a nonpositive density, which signals a
// degenerate cell; the hot kernels use compute_rho_u directly instead.
template <typename T>
inline Moments<T> moments(const Populations<T>& f) {
    Moments<T> m;
    compute_rho_u(f, m.rho, m.u);
    if (!(m.rho > T(0))) {
        throw std::domain_error("moments: degenerate cell with rho <= 0");
    }
    m.pi_neq = pi_neq(f, m.rho, m.u);
    return m;
}

}  // namespace dolb
