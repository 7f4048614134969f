#pragma once

#include <cmath>

#include "dolb/descriptor.hpp"

namespace dolb {

// Relaxation parameters shared by the collision kernels. omega_minus is the
// odd-moment rate of TRT, derived from the magic parameter via
// Lambda = (1/omega - 1/2)(1/omega_minus - 1/2).
struct CollisionParams {
    double omega = 1.0;
    double omega_minus = 1.0;
    double lambda = 3.0 / 16.0;
    double smagorinsky_c = 0.0;
    double omega_bulk_ho = 1.0;

    static double derive_omega_minus(double omega, double lambda) {
        const double half_minus = lambda / (1.0 / omega - 0.5);
        return 1.0 / (half_minus + 0.5);
    }

    void set_trt(double omega_, double lambda_) {
        omega = omega_;
        lambda = lambda_;
        omega_minus = derive_omega_minus(omega_, lambda_);
    }

    friend bool operator==(const CollisionParams&, const CollisionParams&) = default;
};

inline double viscosity_from_omega(double omega) {
    return D3Q19::cs2 * (1.0 / omega - 0.5);
}

inline double omega_from_viscosity(double nu) {
    return 1.0 / (3.0 * nu + 0.5);
}

namespace collision {

// BGK: relax every population toward the second-order equilibrium. Unrolled
// over the frozen direction table; opposite pairs share the symmetric part of
// the equilibrium. Agrees with the generic formula to rounding.
template <typename T>
inline void bgk(Populations<T>& f, T omega) {
    const T drho = f[0] + f[1] + f[2] + f[3] + f[4] + f[5] + f[6] + f[7] + f[8] + f[9] +
                   f[10] + f[11] + f[12] + f[13] + f[14] + f[15] + f[16] + f[17] + f[18];
    const T rho = T(1) + drho;
    const T inv_rho = T(1) / rho;
    const T jx = -f[1] + f[2] - f[7] + f[8] - f[9] + f[10] - f[11] + f[12] - f[13] + f[14];
    const T jy = -f[3] + f[4] - f[7] + f[8] + f[9] - f[10] - f[15] + f[16] - f[17] + f[18];
    const T jz = -f[5] + f[6] - f[11] + f[12] + f[13] - f[14] - f[15] + f[16] + f[17] - f[18];
    const T ux = jx * inv_rho;
    const T uy = jy * inv_rho;
    const T uz = jz * inv_rho;
    const T usqr = T(1.5) * (ux * ux + uy * uy + uz * uz);
    const T w1 = T(1.0 / 18.0);
    const T w2 = T(1.0 / 36.0);
    const T w1r = rho * w1;
    const T w2r = rho * w2;
    const T om1 = T(1) - omega;
    // j is the direction aligned with cu, i its opposite.
    auto pair = [&](int i, int j, T wr, T w, T cu) {
        const T sym = wr * (T(4.5) * cu * cu - usqr);
        const T asym = wr * T(3) * cu;
        f[i] = om1 * f[i] + omega * (w * (rho - T(1)) + sym - asym);
        f[j] = om1 * f[j] + omega * (w * (rho - T(1)) + sym + asym);
    };
    f[0] = om1 * f[0] + omega * (T(1.0 / 3.0) * (rho - T(1)) - T(1.0 / 3.0) * rho * usqr);
    pair(1, 2, w1r, w1, ux);
    pair(3, 4, w1r, w1, uy);
    pair(5, 6, w1r, w1, uz);
    pair(7, 8, w2r, w2, ux + uy);
    pair(9, 10, w2r, w2, ux - uy);
    pair(11, 12, w2r, w2, ux + uz);
    pair(13, 14, w2r, w2, ux - uz);
    pair(15, 16, w2r, w2, uy + uz);
    pair(17, 18, w2r, w2, uy - uz);
}

// TRT: even population parts relaxed with omega (carries the shear
// viscosity), odd parts with omega_minus.
template <typename T>
inline void trt(Populations<T>& f, T omega, T omega_minus) {
    T rho;
    std::array<T, 3> u;
    compute_rho_u(f, rho, u);
    const Populations<T> feq = equilibrium2(rho, u);
    Populations<T> out;
    for (int i = 0; i < D3Q19::q; ++i) {
        const int j = D3Q19::opposite[i];
        const T fp = (f[i] + f[j]) * T(0.5);
        const T fm = (f[i] - f[j]) * T(0.5);
        const T ep = (feq[i] + feq[j]) * T(0.5);
        const T em = (feq[i] - feq[j]) * T(0.5);
        out[i] = f[i] - omega * (fp - ep) - omega_minus * (fm - em);
    }
    f = out;
}

// Recursive regularized collision. The off-equilibrium part is replaced by
// its Hermite reconstruction: the measured second-order tensor plus the
// recursively extended third-order coefficients a3_aab = 2 u_a a2_ab +
// u_b a2_aa. The deviatoric second-order modes relax with omega; the trace
// (bulk) and third-order modes relax with omega_bulk_ho.
template <typename T>
inline void rr(Populations<T>& f, T omega, T omega_bulk_ho) {
    const T cs2 = T(1) / T(3);
    T rho;
    std::array<T, 3> u;
    compute_rho_u(f, rho, u);
    const Populations<T> feq = equilibrium4(rho, u);

    SymTensor<T> a2 = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < D3Q19::q; ++i) {
        const T fn = f[i] - feq[i];
        const T cx = T(D3Q19::c[i][0]);
        const T cy = T(D3Q19::c[i][1]);
        const T cz = T(D3Q19::c[i][2]);
        a2[0] += cx * cx * fn;
        a2[1] += cx * cy * fn;
        a2[2] += cx * cz * fn;
        a2[3] += cy * cy * fn;
        a2[4] += cy * cz * fn;
        a2[5] += cz * cz * fn;
    }

    const T trace3 = (a2[0] + a2[3] + a2[5]) / T(3);
    const T gdev = T(1) - omega;
    const T ghob = T(1) - omega_bulk_ho;
    SymTensor<T> a2r;
    a2r[0] = gdev * (a2[0] - trace3) + ghob * trace3;
    a2r[1] = gdev * a2[1];
    a2r[2] = gdev * a2[2];
    a2r[3] = gdev * (a2[3] - trace3) + ghob * trace3;
    a2r[4] = gdev * a2[4];
    a2r[5] = gdev * (a2[5] - trace3) + ghob * trace3;

    // a3_aab built from the unrelaxed a2, then relaxed at omega_bulk_ho.
    const T a3_xxy = ghob * (T(2) * u[0] * a2[1] + u[1] * a2[0]);
    const T a3_xxz = ghob * (T(2) * u[0] * a2[2] + u[2] * a2[0]);
    const T a3_yyx = ghob * (T(2) * u[1] * a2[1] + u[0] * a2[3]);
    const T a3_yyz = ghob * (T(2) * u[1] * a2[4] + u[2] * a2[3]);
    const T a3_zzx = ghob * (T(2) * u[2] * a2[2] + u[0] * a2[5]);
    const T a3_zzy = ghob * (T(2) * u[2] * a2[4] + u[1] * a2[5]);

    for (int i = 0; i < D3Q19::q; ++i) {
        const T wi = T(D3Q19::w[i]);
        const T cx = T(D3Q19::c[i][0]);
        const T cy = T(D3Q19::c[i][1]);
        const T cz = T(D3Q19::c[i][2]);
        const T hxx = cx * cx - cs2;
        const T hyy = cy * cy - cs2;
        const T hzz = cz * cz - cs2;
        const T second = hxx * a2r[0] + hyy * a2r[3] + hzz * a2r[5] +
                         T(2) * (cx * cy * a2r[1] + cx * cz * a2r[2] + cy * cz * a2r[4]);
        const T third = cy * hxx * a3_xxy + cz * hxx * a3_xxz +
                        cx * hyy * a3_yyx + cz * hyy * a3_yyz +
                        cx * hzz * a3_zzx + cy * hzz * a3_zzy;
        f[i] = feq[i] + wi * (T(4.5) * second + T(13.5) * third);
    }
}

// Effective relaxation rate with the Smagorinsky subgrid closure. Closed
// form: tau_eff = (tau0 + sqrt(tau0^2 + 2 C^2 Q / (rho cs2^2))) / 2 with
// Q = sqrt(2 Pi:Pi), so that tau_eff >= tau0 always.
template <typename T>
inline T smagorinsky_omega(const Populations<T>& f, T omega, T smago_c) {
    const T cs4 = T(1) / T(9);
    T rho;
    std::array<T, 3> u;
    compute_rho_u(f, rho, u);
    const SymTensor<T> pi = pi_neq(f, rho, u);
    const T pi_sq = pi[0] * pi[0] + pi[3] * pi[3] + pi[5] * pi[5] +
                    T(2) * (pi[1] * pi[1] + pi[2] * pi[2] + pi[4] * pi[4]);
    const T q_norm = std::sqrt(T(2) * pi_sq);
    const T tau0 = T(1) / omega;
    const T tau_eff =
        T(0.5) * (tau0 + std::sqrt(tau0 * tau0 + T(2) * smago_c * smago_c * q_norm / (rho * cs4)));
    return T(1) / tau_eff;
}

}  // namespace collision
}  // namespace dolb
