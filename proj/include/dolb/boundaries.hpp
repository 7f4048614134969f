#pragma once

#include "dolb/descriptor.hpp"

namespace dolb::boundary {

// Full-way bounce-back: pairwise swap by the opposite table. Pure
// permutation, conserves mass exactly and reverses momentum.
template <typename T>
inline void bounce_back(Populations<T>& f) {
    for (int i = 1; i < D3Q19::q; i += 2) {
        const int j = D3Q19::opposite[i];
        const T tmp = f[i];
        f[i] = f[j];
        f[j] = tmp;
    }
}

// Moving-wall bounce-back (Ladd): the reflected population leaving the wall
// along c_i picks up 2 w_i rho0 (c_i . u_w) / cs2 with rho0 = 1. Offsets
// cancel in the swap, so the rule is identical in offset form.
template <typename T>
inline void moving_bounce_back(Populations<T>& f, const std::array<T, 3>& u_wall) {
    bounce_back(f);
    const T inv_cs2 = T(3);
    for (int i = 1; i < D3Q19::q; ++i) {
        const T cu = T(D3Q19::c[i][0]) * u_wall[0] + T(D3Q19::c[i][1]) * u_wall[1] +
                     T(D3Q19::c[i][2]) * u_wall[2];
        f[i] += T(2) * T(D3Q19::w[i]) * inv_cs2 * cu;
    }
}

// Dirichlet condition on a flat boundary. axis in {0,1,2}; orient is +1 when
// the fluid lies on the positive side of the boundary (low face) and -1 on a
// high face. Populations with c_axis * orient > 0 stream in from outside the
// domain and are treated as unknown.
struct RegularizedSpec {
    int axis = 0;
    int orient = 1;
};

namespace detail {

template <typename T>
inline void partial_sums(const Populations<T>& f, int axis, int orient, T& s_zero, T& s_out) {
    // Sums of raw populations f_i = fbar_i + w_i over c_axis == 0 and over
    // populations leaving through the boundary (c_axis * orient < 0).
    s_zero = 0;
    s_out = 0;
    for (int i = 0; i < D3Q19::q; ++i) {
        const int ca = D3Q19::c[i][axis] * orient;
        const T raw = f[i] + T(D3Q19::w[i]);
        if (ca == 0) {
            s_zero += raw;
        } else if (ca < 0) {
            s_out += raw;
        }
    }
}

}  // namespace detail

template <typename T>
void regularize_from(Populations<T>& f, T rho, const std::array<T, 3>& u,
                     const RegularizedSpec& spec);

// Replace all 19 populations by equilibrium plus the regularized
// off-equilibrium reconstructed from the bounce-back estimate of Pi.
// Velocity kind: u prescribed, rho recovered from the known populations.
template <typename T>
inline void regularized_velocity(Populations<T>& f, const RegularizedSpec& spec,
                                 const std::array<T, 3>& u_wall) {
    T s_zero, s_out;
    detail::partial_sums(f, spec.axis, spec.orient, s_zero, s_out);
    const T un = T(spec.orient) * u_wall[spec.axis];
    const T rho = (s_zero + T(2) * s_out) / (T(1) - un);
    regularize_from(f, rho, u_wall, spec);
}

// Pressure kind: rho prescribed, the wall-normal velocity recovered, zero
// tangential velocity.
template <typename T>
inline void regularized_pressure(Populations<T>& f, const RegularizedSpec& spec, T rho) {
    T s_zero, s_out;
    detail::partial_sums(f, spec.axis, spec.orient, s_zero, s_out);
    const T un = T(1) - (s_zero + T(2) * s_out) / rho;
    std::array<T, 3> u = {0, 0, 0};
    u[spec.axis] = T(spec.orient) * un;
    regularize_from(f, rho, u, spec);
}

// Shared tail of both regularized kinds: bounce-back closure for the unknown
// off-equilibrium parts, then Hermite reconstruction of all populations.
template <typename T>
inline void regularize_from(Populations<T>& f, T rho, const std::array<T, 3>& u,
                            const RegularizedSpec& spec) {
    const T cs2 = T(1) / T(3);
    const Populations<T> feq = equilibrium2(rho, u);

    Populations<T> fneq;
    for (int i = 0; i < D3Q19::q; ++i) {
        if (D3Q19::c[i][spec.axis] * spec.orient > 0) {
            const int j = D3Q19::opposite[i];
            fneq[i] = f[j] - feq[j];
        } else {
            fneq[i] = f[i] - feq[i];
        }
    }

    SymTensor<T> pi = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < D3Q19::q; ++i) {
        const T cx = T(D3Q19::c[i][0]);
        const T cy = T(D3Q19::c[i][1]);
        const T cz = T(D3Q19::c[i][2]);
        pi[0] += cx * cx * fneq[i];
        pi[1] += cx * cy * fneq[i];
        pi[2] += cx * cz * fneq[i];
        pi[3] += cy * cy * fneq[i];
        pi[4] += cy * cz * fneq[i];
        pi[5] += cz * cz * fneq[i];
    }

    for (int i = 0; i < D3Q19::q; ++i) {
        const T wi = T(D3Q19::w[i]);
        const T cx = T(D3Q19::c[i][0]);
        const T cy = T(D3Q19::c[i][1]);
        const T cz = T(D3Q19::c[i][2]);
        const T second = (cx * cx - cs2) * pi[0] + (cy * cy - cs2) * pi[3] +
                         (cz * cz - cs2) * pi[5] +
                         T(2) * (cx * cy * pi[1] + cx * cz * pi[2] + cy * cz * pi[4]);
        f[i] = feq[i] + wi * T(4.5) * second;
    }
}

}  // namespace dolb::boundary
