#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dolb::diag {

// Deterministic pairwise-tree sum: repeated runs agree bit-exactly and the
// association does not depend on any thread count.
double tree_sum(std::span<const double> values);

double tree_mean(std::span<const double> values);

// Scalar velocity field on a structured grid, x fastest.
struct VectorField {
    std::array<std::int64_t, 3> dims;
    std::vector<double> x, y, z;

    std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return (k * dims[1] + j) * dims[0] + i;
    }
    std::int64_t size() const { return dims[0] * dims[1] * dims[2]; }
};

// Mean kinetic energy: cell average of |u|^2 / 2.
double kinetic_energy(const VectorField& u);

// Curl with the eighth-order centered stencil (coefficients 4/5, -1/5,
// 4/105, -1/280 at offsets 1..4). Along non-periodic axes cells within four
// of the border carry no stencil; `valid` marks the cells with a full curl.
struct VorticityField {
    VectorField omega;
    std::vector<std::uint8_t> valid;
};

VorticityField vorticity_fd8(const VectorField& u, std::array<bool, 3> periodic);

// Mean enstrophy |omega|^2 / 2 over the valid cells.
double enstrophy(const VorticityField& w);

// First-derivative stencil coefficients for offsets 1..4.
std::array<double, 4> fd8_coefficients();

// Darcy permeability in lattice units and the millidarcy conversion
// (1 mD = 9.869233e-16 m^2).
double permeability(double mean_velocity, double nu, double lx, double dP);
double to_millidarcy(double k_lattice, double dx_meters);

// Arithmetic mean over equally spaced snapshots of a sampled profile.
std::vector<double> averaged_profile(const std::vector<std::vector<double>>& snapshots);

// Normalized profile coordinate alpha_c / L = 2 alpha / L - 1.
double normalized_coordinate(double alpha, double extent);

// Emitted time series: one row per sample with named extra scalars.
struct DiagnosticsSeries {
    std::vector<std::string> extra_names;
    struct Row {
        std::int64_t step;
        double time_tc;
        double kinetic;
        double enstrophy;
        std::vector<double> extras;
    };
    std::vector<Row> rows;

    void append(Row row);
    // Header row then one row per sample, "%.17g" formatting.
    std::string to_csv() const;
    static DiagnosticsSeries from_csv(const std::string& text);
};

}  // namespace dolb::diag
