#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "dolb/chain.hpp"
#include "dolb/multiblock.hpp"
#include "dolb/reference_lattice.hpp"

namespace dolb {

enum class CaseKind { Tgv, Cavity, Porous };
enum class DriveKind { Velocity, Pressure };
enum class Precision { F32, F64 };

// Resolved benchmark configuration. The relaxation rate and the convective
// time are derived from (L, Re, Ma) under convective scaling; tau overrides
// Re for the porous case, matching its fixed-relaxation protocol.
struct CaseConfig {
    CaseKind kind = CaseKind::Tgv;
    std::int64_t L = 64;
    double Re = 1600.0;
    double Ma = 0.2;
    LinkType collision = LinkType::BGK;
    std::optional<double> smagorinsky_c;
    double lambda = 3.0 / 16.0;
    double omega_bulk_ho = 1.0;
    Precision precision = Precision::F64;
    std::array<int, 3> block_grid = {1, 1, 1};
    int workers = 1;

    // Porous-only knobs.
    DriveKind drive = DriveKind::Velocity;
    std::string geometry;         // "plates" or a voxel file path
    std::int64_t plate_layers = 11;  // H for the plates geometry
    double tau = 1.0;
    double delta_rho = 2e-3;      // pressure drive: rho_in/out = 1 +/- delta
    std::int64_t upstream = 40;
    std::int64_t downstream = 40;
    std::array<std::int64_t, 3> voxel_dims = {0, 0, 0};
    double voxel_dx = 0.0;        // meters per voxel
    double voxel_threshold = 0.5;

    double lattice_velocity() const;       // u = cs * Ma
    double char_length() const;            // L_char under convective scaling
    double viscosity() const;
    double omega() const;
    double t_c() const;                    // steps per convective time unit

    void validate() const;
};

// Re and Ma preserved; nu, omega and t_c follow from the new resolution.
CaseConfig convective_rescale(const CaseConfig& config, std::int64_t L_new);

// Occupancy mask of a porous medium; 1 = solid.
struct VoxelGeometry {
    std::array<std::int64_t, 3> dims{};
    std::vector<std::uint8_t> solid;
    double dx_meters = 0.0;

    bool is_solid(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return solid[std::size_t((z * dims[1] + y) * dims[0] + x)] != 0;
    }
    double porosity() const;
};

// Raw 8-bit occupancy file, row-major x fastest; values above the threshold
// are solid. The file length must equal the product of dims.
VoxelGeometry load_voxels(const std::string& path, std::array<std::int64_t, 3> dims,
                          double threshold, double dx_meters);

// Parallel-plate channel mask: solid rows at z = 0 and z = H + 1.
VoxelGeometry make_plate_geometry(std::int64_t length, std::int64_t width, std::int64_t layers);

// Container-independent description of an initialized lattice, realized
// either as the reference container or as a partitioned accelerated run.
struct CaseSetup {
    std::array<std::int64_t, 3> dims{};
    std::array<bool, 3> periodic{};
    std::function<const DynamicsChain*(std::int64_t, std::int64_t, std::int64_t)> chain_of;
    std::function<void(std::int64_t, std::int64_t, std::int64_t, double&, std::array<double, 3>&)>
        state_of;
    std::vector<std::shared_ptr<const DynamicsChain>> chains;  // everything chain_of can return
    double t_c = 1.0;

    // Porous bookkeeping for the permeability measurement.
    std::int64_t sample_begin = 0;   // x range [sample_begin, sample_end)
    std::int64_t sample_end = 0;
    std::shared_ptr<const VoxelGeometry> geometry;
};

CaseSetup init_tgv(const CaseConfig& config);
CaseSetup init_cavity(const CaseConfig& config);
CaseSetup init_porous(const CaseConfig& config, std::shared_ptr<const VoxelGeometry> geometry);

// Builds the AoS oracle container from a setup (desk-scale grids).
ReferenceLattice build_reference(const CaseSetup& setup);

// Registers the setup's chains and builds the partitioned accelerated run.
template <typename T>
MultiBlockRun<T> build_run(const CaseSetup& setup, std::array<int, 3> block_grid, int workers,
                           std::shared_ptr<DynamicsRegistry> registry,
                           std::optional<DispatchSet> dispatch = std::nullopt,
                           std::shared_ptr<Transport> transport = nullptr);

// Distinct chain strings the setup assigns, sorted.
std::vector<std::string> setup_models(const CaseSetup& setup);

}  // namespace dolb
