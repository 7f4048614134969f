#include "dolb/cases.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace dolb {

namespace {

constexpr double kCs = 0.57735026918962576451;  // 1/sqrt(3)

}  // namespace

double CaseConfig::lattice_velocity() const {
    return kCs * Ma;
}

double CaseConfig::char_length() const {
    switch (kind) {
        case CaseKind::Tgv:
            // Cell centers map to [0, 2pi); the characteristic length is the
            // inverse wavenumber L / (2 pi).
            return double(L) / (2.0 * std::numbers::pi);
        case CaseKind::Cavity:
            return double(L);
        case CaseKind::Porous:
            return double(L);
    }
    return double(L);
}

double CaseConfig::viscosity() const {
    if (kind == CaseKind::Porous) {
        return (tau - 0.5) / 3.0;
    }
    return lattice_velocity() * char_length() / Re;
}

double CaseConfig::omega() const {
    if (kind == CaseKind::Porous) {
        return 1.0 / tau;
    }
    return omega_from_viscosity(viscosity());
}

double CaseConfig::t_c() const {
    return char_length() / lattice_velocity();
}

void CaseConfig::validate() const {
    if (kind == CaseKind::Tgv && L < 8) {
        throw std::invalid_argument("tgv requires L >= 8");
    }
    if (kind == CaseKind::Cavity && L < 16) {
        throw std::invalid_argument("cavity requires L >= 16");
    }
    if (Ma <= 0.0 || Ma >= 0.5) {
        throw std::invalid_argument("Mach number must lie in (0, 0.5)");
    }
    const double om = omega();
    if (!(om > 0.0 && om < 2.0)) {
        throw std::invalid_argument("relaxation rate " + std::to_string(om) +
                                    " outside the stable range (0, 2)");
    }
    if (kind == CaseKind::Porous && geometry.empty()) {
        throw std::invalid_argument("porous case requires a geometry");
    }
}

CaseConfig convective_rescale(const CaseConfig& config, std::int64_t L_new) {
    if (L_new < 8) throw std::invalid_argument("rescale target resolution too small");
    CaseConfig out = config;
    out.L = L_new;
    out.validate();
    return out;
}

double VoxelGeometry::porosity() const {
    std::int64_t fluid = 0;
    for (const std::uint8_t s : solid) fluid += s == 0 ? 1 : 0;
    return double(fluid) / double(solid.size());
}

VoxelGeometry load_voxels(const std::string& path, std::array<std::int64_t, 3> dims,
                          double threshold, double dx_meters) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open voxel file \"" + path + "\"");
    const std::int64_t expected = dims[0] * dims[1] * dims[2];
    if (std::int64_t(in.tellg()) != expected) {
        throw std::runtime_error("voxel file \"" + path + "\" has " +
                                 std::to_string(std::int64_t(in.tellg())) + " bytes, expected " +
                                 std::to_string(expected));
    }
    in.seekg(0);
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(expected), 0);
    in.read(reinterpret_cast<char*>(raw.data()), expected);
    VoxelGeometry geom;
    geom.dims = dims;
    geom.dx_meters = dx_meters;
    geom.solid.resize(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        geom.solid[k] = double(raw[k]) > threshold * 255.0 ? 1 : 0;
    }
    const double phi = geom.porosity();
    if (phi <= 0.0 || phi >= 1.0) {
        throw std::runtime_error("degenerate medium: porosity " + std::to_string(phi));
    }
    return geom;
}

VoxelGeometry make_plate_geometry(std::int64_t length, std::int64_t width,
                                  std::int64_t layers) {
    VoxelGeometry geom;
    geom.dims = {length, width, layers + 2};
    geom.solid.assign(std::size_t(length * width * (layers + 2)), 0);
    for (std::int64_t y = 0; y < width; ++y) {
        for (std::int64_t x = 0; x < length; ++x) {
            geom.solid[std::size_t((0 * width + y) * length + x)] = 1;
            geom.solid[std::size_t(((layers + 1) * width + y) * length + x)] = 1;
        }
    }
    return geom;
}

CaseSetup init_tgv(const CaseConfig& config) {
    config.validate();
    CaseSetup setup;
    const std::int64_t L = config.L;
    setup.dims = {L, L, L};
    setup.periodic = {true, true, true};
    setup.t_c = config.t_c();

    CollisionParams params;
    params.set_trt(config.omega(), config.lambda);
    params.omega_bulk_ho = config.omega_bulk_ho;
    auto bulk = std::make_shared<DynamicsChain>(
        make_collision_chain(config.collision, params, config.smagorinsky_c));
    setup.chains.push_back(bulk);
    setup.chain_of = [bulk](std::int64_t, std::int64_t, std::int64_t) { return bulk.get(); };

    const double u_inf = config.lattice_velocity();
    const double scale = 2.0 * std::numbers::pi / double(L);
    setup.state_of = [u_inf, scale](std::int64_t i, std::int64_t j, std::int64_t k, double& rho,
                                    std::array<double, 3>& u) {
        const double x = scale * (double(i) + 0.5);
        const double y = scale * (double(j) + 0.5);
        const double z = scale * (double(k) + 0.5);
        const double dp = u_inf * u_inf / 16.0 * (std::cos(2.0 * z) + 2.0) *
                          (std::cos(2.0 * x) + std::cos(2.0 * y));
        rho = 1.0 + dp / D3Q19::cs2;
        u[0] = u_inf * std::sin(x) * std::cos(y) * std::cos(z);
        u[1] = -u_inf * std::cos(x) * std::sin(y) * std::cos(z);
        u[2] = 0.0;
    };
    return setup;
}

CaseSetup init_cavity(const CaseConfig& config) {
    config.validate();
    CaseSetup setup;
    const std::int64_t L = config.L;
    setup.dims = {L, L, L};
    setup.periodic = {false, false, false};
    setup.t_c = config.t_c();

    CollisionParams params;
    params.set_trt(config.omega(), config.lambda);
    params.omega_bulk_ho = config.omega_bulk_ho;
    auto bulk = std::make_shared<DynamicsChain>(
        make_collision_chain(config.collision, params, config.smagorinsky_c));
    auto wall = std::make_shared<DynamicsChain>(make_bounce_back());
    const double u_lid = config.lattice_velocity();
    auto lid = std::make_shared<DynamicsChain>(make_moving_bounce_back({u_lid, 0.0, 0.0}));
    setup.chains = {bulk, wall, lid};

    setup.chain_of = [bulk, wall, lid, L](std::int64_t x, std::int64_t y, std::int64_t z) {
        if (z == L - 1) return lid.get();
        if (x == 0 || x == L - 1 || y == 0 || y == L - 1 || z == 0) return wall.get();
        return bulk.get();
    };
    setup.state_of = [](std::int64_t, std::int64_t, std::int64_t, double& rho,
                        std::array<double, 3>& u) {
        rho = 1.0;
        u = {0.0, 0.0, 0.0};
    };
    return setup;
}

CaseSetup init_porous(const CaseConfig& config, std::shared_ptr<const VoxelGeometry> geometry) {
    config.validate();
    if (!geometry) throw std::invalid_argument("porous case requires a voxel geometry");
    const auto gdims = geometry->dims;
    CaseSetup setup;
    const std::int64_t nx = gdims[0] + config.upstream + config.downstream;
    setup.dims = {nx, gdims[1], gdims[2]};
    setup.periodic = {false, true, true};
    setup.t_c = config.t_c();
    setup.sample_begin = config.upstream;
    setup.sample_end = config.upstream + gdims[0];
    setup.geometry = geometry;

    CollisionParams params;
    params.set_trt(config.omega(), config.lambda);
    params.omega_bulk_ho = config.omega_bulk_ho;
    auto bulk = std::make_shared<DynamicsChain>(make_collision_chain(config.collision, params));
    auto solid_wall = std::make_shared<DynamicsChain>(make_bounce_back());
    auto empty = std::make_shared<DynamicsChain>(make_no_dynamics());

    const double u_in = config.lattice_velocity();
    std::shared_ptr<DynamicsChain> inlet, outlet;
    if (config.drive == DriveKind::Velocity) {
        inlet = std::make_shared<DynamicsChain>(
            make_regularized_velocity(0, 1, {u_in, 0.0, 0.0}, config.collision, params));
        outlet = std::make_shared<DynamicsChain>(
            make_regularized_velocity(0, -1, {u_in, 0.0, 0.0}, config.collision, params));
    } else {
        inlet = std::make_shared<DynamicsChain>(make_regularized_pressure(
            0, 1, 1.0 + config.delta_rho, config.collision, params));
        outlet = std::make_shared<DynamicsChain>(make_regularized_pressure(
            0, -1, 1.0 - config.delta_rho, config.collision, params));
    }
    setup.chains = {bulk, solid_wall, empty, inlet, outlet};

    const std::int64_t up = config.upstream;
    const bool plates_everywhere = config.geometry == "plates";
    auto solid_at = [geometry, gdims, up, nx, plates_everywhere](std::int64_t x, std::int64_t y,
                                                                 std::int64_t z) {
        if (plates_everywhere) {
            return z == 0 || z == gdims[2] - 1;
        }
        if (x < up || x >= up + gdims[0]) return false;
        return geometry->is_solid(x - up, y, z);
    };
    const std::array<std::int64_t, 3> dims = setup.dims;
    setup.chain_of = [bulk, solid_wall, empty, inlet, outlet, solid_at, dims, nx](
                         std::int64_t x, std::int64_t y, std::int64_t z) {
        if (solid_at(x, y, z)) {
            // Solid cells with no fluid neighbor need no collision work.
            for (int i = 1; i < D3Q19::q; ++i) {
                const std::int64_t sx = x + D3Q19::c[i][0];
                const std::int64_t sy = (y + D3Q19::c[i][1] + dims[1]) % dims[1];
                const std::int64_t sz = (z + D3Q19::c[i][2] + dims[2]) % dims[2];
                if (sx < 0 || sx >= nx) continue;
                if (!solid_at(sx, sy, sz)) return solid_wall.get();
            }
            return empty.get();
        }
        if (x == 0) return inlet.get();
        if (x == nx - 1) return outlet.get();
        return bulk.get();
    };
    setup.state_of = [](std::int64_t, std::int64_t, std::int64_t, double& rho,
                        std::array<double, 3>& u) {
        rho = 1.0;
        u = {0.0, 0.0, 0.0};
    };
    return setup;
}

ReferenceLattice build_reference(const CaseSetup& setup) {
    ReferenceLattice lattice(setup.dims, setup.periodic);
    for (std::int64_t z = 0; z < setup.dims[2]; ++z) {
        for (std::int64_t y = 0; y < setup.dims[1]; ++y) {
            for (std::int64_t x = 0; x < setup.dims[0]; ++x) {
                lattice.set_chain({{x, y, z}, {x + 1, y + 1, z + 1}},
                                  *setup.chain_of(x, y, z));
                double rho = 1.0;
                std::array<double, 3> u = {0, 0, 0};
                setup.state_of(x, y, z, rho, u);
                lattice.cell(x, y, z).f = equilibrium2(rho, u);
            }
        }
    }
    return lattice;
}

template <typename T>
MultiBlockRun<T> build_run(const CaseSetup& setup, std::array<int, 3> block_grid, int workers,
                           std::shared_ptr<DynamicsRegistry> registry,
                           std::optional<DispatchSet> dispatch,
                           std::shared_ptr<Transport> transport) {
    std::map<const DynamicsChain*, int> slot_of;
    for (const auto& chain : setup.chains) {
        slot_of[chain.get()] = registry->register_chain(*chain);
    }
    DispatchSet ds = dispatch ? *dispatch : DispatchSet::all_of(*registry);
    MultiBlockRun<T> run(partition(setup.dims, block_grid, workers), setup.periodic, registry,
                         std::move(ds), std::move(transport));
    run.fill(
        [&setup, &slot_of](std::int64_t x, std::int64_t y, std::int64_t z) {
            return slot_of.at(setup.chain_of(x, y, z));
        },
        setup.state_of);
    return run;
}

std::vector<std::string> setup_models(const CaseSetup& setup) {
    std::set<const DynamicsChain*> used;
    for (std::int64_t z = 0; z < setup.dims[2]; ++z) {
        for (std::int64_t y = 0; y < setup.dims[1]; ++y) {
            for (std::int64_t x = 0; x < setup.dims[0]; ++x) {
                used.insert(setup.chain_of(x, y, z));
            }
        }
    }
    std::set<std::string> names;
    for (const DynamicsChain* chain : used) names.insert(chain_string(*chain));
    return {names.begin(), names.end()};
}

template MultiBlockRun<float> build_run<float>(const CaseSetup&, std::array<int, 3>, int,
                                               std::shared_ptr<DynamicsRegistry>,
                                               std::optional<DispatchSet>,
                                               std::shared_ptr<Transport>);
template MultiBlockRun<double> build_run<double>(const CaseSetup&, std::array<int, 3>, int,
                                                 std::shared_ptr<DynamicsRegistry>,
                                                 std::optional<DispatchSet>,
                                                 std::shared_ptr<Transport>);

}  // namespace dolb
