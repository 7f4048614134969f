#include "dolb/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dolb/diagnostics.hpp"
#include "dolb/perfmodel.hpp"

namespace dolb::run {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file \"" + path + "\"");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line without '=': \"" + line + "\"");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        config.set(section.empty() ? key : section + "." + key, value);
    }
    return config;
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

std::optional<std::string> Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    const auto v = get(key);
    return v ? *v : fallback;
}

std::string Config::render() const {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
    for (const auto& [key, value] : values_) {
        const auto dot = key.find('.');
        const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
        const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        sections[section].push_back({name, value});
    }
    std::string out;
    for (const auto& [section, entries] : sections) {
        if (!section.empty()) out += "[" + section + "]\n";
        for (const auto& [name, value] : entries) out += name + " = " + value + "\n";
        out += "\n";
    }
    return out;
}

namespace {

double parse_double(const Config& config, const std::string& key, double fallback) {
    const auto v = config.get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const double d = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw std::invalid_argument("config key " + key + ": \"" + *v + "\" is not a number");
    }
}

std::int64_t parse_int(const Config& config, const std::string& key, std::int64_t fallback) {
    const auto v = config.get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const std::int64_t n = std::stoll(*v, &used);
        if (used != v->size()) throw std::invalid_argument("");
        return n;
    } catch (...) {
        throw std::invalid_argument("config key " + key + ": \"" + *v + "\" is not an integer");
    }
}

bool parse_bool(const Config& config, const std::string& key, bool fallback) {
    const auto v = config.get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw std::invalid_argument("config key " + key + ": \"" + *v + "\" is not a boolean");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, sep)) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

CaseKind parse_case_kind(const std::string& name) {
    if (name == "tgv") return CaseKind::Tgv;
    if (name == "cavity") return CaseKind::Cavity;
    if (name == "porous") return CaseKind::Porous;
    throw std::invalid_argument("unknown case \"" + name +
                                "\"; valid cases: tgv, cavity, porous");
}

LinkType parse_collision_name(const std::string& name) {
    if (name == "bgk") return LinkType::BGK;
    if (name == "trt") return LinkType::TRT;
    if (name == "rr") return LinkType::RR;
    throw std::invalid_argument("unknown collision model \"" + name +
                                "\"; valid models: bgk, trt, rr");
}

Precision parse_precision(const std::string& name) {
    if (name == "f32") return Precision::F32;
    if (name == "f64") return Precision::F64;
    throw std::invalid_argument("unknown precision \"" + name +
                                "\"; valid precisions: f32, f64");
}

// Accepts plain step counts, "<N>tc" in convective time units, or "steady".
void parse_tmax(const std::string& text, double t_c, RunPlan& plan) {
    if (text == "steady") {
        plan.until_steady = true;
        plan.tmax_steps = 0;
        return;
    }
    std::string num = text;
    bool in_tc = false;
    if (num.size() > 2) {
        std::string suffix = num.substr(num.size() - 2);
        for (char& c : suffix) c = char(std::tolower(c));
        if (suffix == "tc") {
            in_tc = true;
            num = num.substr(0, num.size() - 2);
        }
    }
    try {
        std::size_t used = 0;
        const double value = std::stod(num, &used);
        if (used != num.size() || value < 0) throw std::invalid_argument("");
        plan.tmax_steps = in_tc ? std::llround(value * t_c) : std::llround(value);
    } catch (...) {
        throw std::invalid_argument("cannot parse time specification \"" + text +
                                    "\": use steps, \"<N>tc\" or \"steady\"");
    }
}

}  // namespace

RunPlan resolve(const Config& config) {
    RunPlan plan;
    CaseConfig& cc = plan.case_config;
    cc.kind = parse_case_kind(config.get_or("case.kind", "tgv"));
    cc.L = parse_int(config, "case.L", 64);
    cc.Ma = parse_double(config, "case.Ma", cc.kind == CaseKind::Porous ? 0.01 : 0.2);
    cc.Re = parse_double(config, "case.Re", cc.kind == CaseKind::Cavity ? 1000.0 : 1600.0);
    cc.collision = parse_collision_name(
        config.get_or("case.collision", cc.kind == CaseKind::Porous ? "trt" : "bgk"));
    if (config.has("case.smagorinsky")) {
        cc.smagorinsky_c = parse_double(config, "case.smagorinsky", 0.0);
    }
    cc.lambda = parse_double(config, "case.lambda", 3.0 / 16.0);
    cc.omega_bulk_ho = parse_double(config, "case.omega_bulk_ho", 1.0);
    cc.precision = parse_precision(config.get_or("case.precision", "f64"));
    cc.drive = [&]() {
        const std::string name = config.get_or("case.drive", "velocity");
        if (name == "velocity") return DriveKind::Velocity;
        if (name == "pressure") return DriveKind::Pressure;
        throw std::invalid_argument("unknown drive \"" + name +
                                    "\"; valid drives: velocity, pressure");
    }();
    cc.geometry = config.get_or("case.geometry", "");
    cc.plate_layers = parse_int(config, "case.H", 11);
    cc.tau = parse_double(config, "case.tau", 1.0);
    cc.delta_rho = parse_double(config, "case.delta_rho", 2e-3);
    cc.upstream = parse_int(config, "case.upstream", 40);
    cc.downstream = parse_int(config, "case.downstream", 40);
    if (config.has("case.voxel_dims")) {
        const auto parts = split(*config.get("case.voxel_dims"), ',');
        if (parts.size() != 3) {
            throw std::invalid_argument("case.voxel_dims needs three comma-separated extents");
        }
        for (int a = 0; a < 3; ++a) cc.voxel_dims[std::size_t(a)] = std::stoll(parts[std::size_t(a)]);
    }
    cc.voxel_dx = parse_double(config, "case.voxel_dx", 0.0);
    cc.voxel_threshold = parse_double(config, "case.voxel_threshold", 0.5);

    if (config.has("run.blocks")) {
        const auto parts = split(*config.get("run.blocks"), ',');
        if (parts.size() != 3) {
            throw std::invalid_argument("run.blocks needs three comma-separated counts");
        }
        for (int a = 0; a < 3; ++a) cc.block_grid[std::size_t(a)] = int(std::stoll(parts[std::size_t(a)]));
    }
    cc.workers = int(parse_int(config, "run.workers", 1));
    cc.validate();

    const std::string default_tmax = cc.kind == CaseKind::Porous
                                         ? "steady"
                                         : (cc.kind == CaseKind::Tgv ? "12tc" : "20tc");
    parse_tmax(config.get_or("run.tmax", default_tmax), cc.t_c(), plan);
    plan.steady_tol = parse_double(config, "run.steady_tol", 1e-8);
    plan.max_steps = parse_int(config, "run.max_steps", 200000);
    const std::int64_t default_every =
        cc.kind == CaseKind::Porous
            ? 200
            : std::max<std::int64_t>(1, std::llround(cc.t_c() / (cc.kind == CaseKind::Tgv ? 8.0 : 1.0)));
    plan.output_every = parse_int(config, "run.output_every", default_every);
    if (plan.output_every < 1) throw std::invalid_argument("run.output_every must be >= 1");
    plan.dump_every = parse_int(config, "run.dump_every", 0);
    plan.avg_from_tc = parse_double(config, "run.avg_from", 50.0);
    plan.out_dir = config.get_or("run.out", "out");
    if (config.has("run.perf_device")) plan.perf_device = *config.get("run.perf_device");
    if (config.has("run.device_catalog")) plan.device_catalog = *config.get("run.device_catalog");
    plan.reference_check = parse_bool(config, "run.reference_check", false);
    if (config.has("dispatch.models")) {
        plan.dispatch_models = split(*config.get("dispatch.models"), ',');
    }
    return plan;
}

namespace {

std::shared_ptr<const VoxelGeometry> make_geometry(const CaseConfig& cc) {
    if (cc.kind != CaseKind::Porous) return nullptr;
    if (cc.geometry == "plates") {
        return std::make_shared<VoxelGeometry>(
            make_plate_geometry(cc.L, std::max<std::int64_t>(4, cc.L / 5), cc.plate_layers));
    }
    if (cc.voxel_dims[0] < 1) {
        throw std::invalid_argument("voxel geometry needs case.voxel_dims");
    }
    return std::make_shared<VoxelGeometry>(
        load_voxels(cc.geometry, cc.voxel_dims, cc.voxel_threshold, cc.voxel_dx));
}

CaseSetup make_setup(const CaseConfig& cc) {
    switch (cc.kind) {
        case CaseKind::Tgv: return init_tgv(cc);
        case CaseKind::Cavity: return init_cavity(cc);
        case CaseKind::Porous: return init_porous(cc, make_geometry(cc));
    }
    throw std::logic_error("unreachable");
}

struct SampleState {
    diag::DiagnosticsSeries series;
    double k0 = 0.0;
    double eps0 = 0.0;
    std::vector<double> prev_ux, prev_uy, prev_uz;
    std::vector<std::vector<double>> profile_ux, profile_uz;
    std::vector<double> profile_times;
    double last_perm = 0.0;
    int steady_hits = 0;
};

struct PorousProbe {
    std::vector<std::uint8_t> fluid;  // global mask, 1 = fluid
    std::int64_t x0 = 0, x1 = 0;      // measurement planes
    bool aperture_mean = false;       // plates: average over fluid rows only
};

template <typename T>
class Driver {
  public:
    Driver(const RunPlan& plan, const CaseSetup& setup,
           std::shared_ptr<DynamicsRegistry> registry, MultiBlockRun<T>&& run)
        : plan_(plan), setup_(setup), registry_(std::move(registry)), run_(std::move(run)) {}

    RunArtifacts execute();

  private:
    void sample(std::int64_t step);
    void porous_extras(const std::vector<double>& rho, const std::vector<double>& ux,
                       std::vector<double>& extras);
    void write_series() const;
    void write_profiles() const;
    void write_perf(double seconds, std::int64_t steps) const;
    void write_manifest() const;
    std::string out_path(const std::string& name) const;

    RunPlan plan_;
    CaseSetup setup_;
    std::shared_ptr<DynamicsRegistry> registry_;
    MultiBlockRun<T> run_;
    SampleState state_;
    std::optional<ReferenceLattice> reference_;
    std::int64_t reference_step_ = 0;
    std::optional<PorousProbe> probe_;
    std::vector<std::string> files_;
    double mlups_ = 0.0;
};

template <typename T>
std::string Driver<T>::out_path(const std::string& name) const {
    return (std::filesystem::path(plan_.out_dir) / name).string();
}

template <typename T>
void Driver<T>::porous_extras(const std::vector<double>& rho, const std::vector<double>& ux,
                              std::vector<double>& extras) {
    const auto& dims = setup_.dims;
    const std::int64_t plane = dims[1] * dims[2];
    auto plane_mean_p = [&](std::int64_t x) {
        std::vector<double> vals;
        vals.reserve(std::size_t(plane));
        for (std::int64_t z = 0; z < dims[2]; ++z) {
            for (std::int64_t y = 0; y < dims[1]; ++y) {
                const std::int64_t g = (z * dims[1] + y) * dims[0] + x;
                if (probe_->fluid[std::size_t(g)]) {
                    vals.push_back(D3Q19::cs2 * rho[std::size_t(g)]);
                }
            }
        }
        return vals.empty() ? 0.0 : diag::tree_mean(vals);
    };
    auto plane_mean_ux = [&](std::int64_t x) {
        std::vector<double> vals;
        for (std::int64_t z = 0; z < dims[2]; ++z) {
            for (std::int64_t y = 0; y < dims[1]; ++y) {
                const std::int64_t g = (z * dims[1] + y) * dims[0] + x;
                if (probe_->fluid[std::size_t(g)]) vals.push_back(ux[std::size_t(g)]);
            }
        }
        return vals.empty() ? 0.0 : diag::tree_mean(vals);
    };

    // Superficial mean velocity over the sample region. The plate channel
    // averages across the open aperture; voxel media include solid nodes as
    // zero velocity.
    std::vector<double> vals, density;
    for (std::int64_t z = 0; z < dims[2]; ++z) {
        for (std::int64_t y = 0; y < dims[1]; ++y) {
            for (std::int64_t x = setup_.sample_begin; x < setup_.sample_end; ++x) {
                const std::int64_t g = (z * dims[1] + y) * dims[0] + x;
                if (probe_->fluid[std::size_t(g)]) density.push_back(rho[std::size_t(g)]);
                if (probe_->aperture_mean && !probe_->fluid[std::size_t(g)]) continue;
                vals.push_back(ux[std::size_t(g)]);
            }
        }
    }
    const double ubar = diag::tree_mean(vals);
    // Pressure drop normalized by the sample's mean fluid density: the
    // velocity-driven setup slowly accumulates mass, which would otherwise
    // scale dp with the rising base density.
    const double rho_bar = density.empty() ? 1.0 : diag::tree_mean(density);
    const double dp = (plane_mean_p(probe_->x0) - plane_mean_p(probe_->x1)) / rho_bar;
    const double lx = double(probe_->x1 - probe_->x0);
    const double nu = plan_.case_config.viscosity();
    const double k_perm = std::abs(dp) < 1e-300 ? 0.0 : diag::permeability(ubar, nu, lx, dp);
    extras.push_back(k_perm);
    extras.push_back(ubar);
    extras.push_back(dp);
    extras.push_back(plane_mean_ux(1));
    extras.push_back(plane_mean_ux(dims[0] - 2));
}

template <typename T>
void Driver<T>::sample(std::int64_t step) {
    std::vector<double> rho, ux, uy, uz;
    run_.gather_macroscopic(rho, ux, uy, uz);

    diag::VectorField u;
    u.dims = setup_.dims;
    u.x = ux;
    u.y = uy;
    u.z = uz;
    const double k = diag::kinetic_energy(u);
    const double eps = diag::enstrophy(diag::vorticity_fd8(u, setup_.periodic));

    diag::DiagnosticsSeries::Row row;
    row.step = step;
    row.time_tc = double(step) / setup_.t_c;
    row.kinetic = k;
    row.enstrophy = eps;

    const CaseKind kind = plan_.case_config.kind;
    if (step == 0) {
        state_.k0 = k;
        state_.eps0 = eps;
    }
    if (kind == CaseKind::Tgv) {
        row.extras.push_back(state_.k0 == 0.0 ? 0.0 : k / state_.k0);
        row.extras.push_back(state_.eps0 == 0.0 ? 0.0 : eps / state_.eps0);
    } else if (kind == CaseKind::Cavity) {
        double du = 0.0;
        if (!state_.prev_ux.empty()) {
            std::vector<double> num(ux.size()), den(ux.size());
            for (std::size_t i = 0; i < ux.size(); ++i) {
                const double dx = ux[i] - state_.prev_ux[i];
                const double dy = uy[i] - state_.prev_uy[i];
                const double dz = uz[i] - state_.prev_uz[i];
                num[i] = dx * dx + dy * dy + dz * dz;
                den[i] = ux[i] * ux[i] + uy[i] * uy[i] + uz[i] * uz[i];
            }
            const double nn = diag::tree_sum(num);
            const double dd = diag::tree_sum(den);
            if (dd > 0.0) {
                du = std::sqrt(nn / dd) * setup_.t_c / double(plan_.output_every);
            }
        }
        row.extras.push_back(du);
        state_.prev_ux = ux;
        state_.prev_uy = uy;
        state_.prev_uz = uz;

        // Center-line profiles, recorded for time averaging.
        const std::int64_t L = setup_.dims[0];
        std::vector<double> line_ux(static_cast<std::size_t>(L), 0.0);
        std::vector<double> line_uz(static_cast<std::size_t>(L), 0.0);
        for (std::int64_t zc = 0; zc < L; ++zc) {
            line_ux[std::size_t(zc)] =
                ux[std::size_t((zc * L + L / 2) * L + L / 2)];
        }
        for (std::int64_t xc = 0; xc < L; ++xc) {
            line_uz[std::size_t(xc)] =
                uz[std::size_t(((L / 2) * L + L / 2) * L + xc)];
        }
        state_.profile_ux.push_back(std::move(line_ux));
        state_.profile_uz.push_back(std::move(line_uz));
        state_.profile_times.push_back(row.time_tc);
    } else {
        porous_extras(rho, ux, row.extras);
        const double k_perm = row.extras[0];
        if (step > 0) {
            const double prev = state_.last_perm;
            if (k_perm != 0.0 && prev != 0.0 &&
                std::abs(k_perm - prev) <= plan_.steady_tol * std::abs(k_perm)) {
                ++state_.steady_hits;
            } else {
                state_.steady_hits = 0;
            }
        }
        state_.last_perm = k_perm;
    }

    if (reference_) {
        while (reference_step_ < step) {
            reference_->collide_and_stream();
            ++reference_step_;
        }
        const std::vector<double> acc = run_.gather_populations();
        const std::int64_t n = run_.num_cells();
        double max_diff = 0.0;
        const auto& dims = setup_.dims;
        for (std::int64_t z = 0; z < dims[2]; ++z) {
            for (std::int64_t y = 0; y < dims[1]; ++y) {
                for (std::int64_t x = 0; x < dims[0]; ++x) {
                    const auto& cell = reference_->cell(x, y, z);
                    const std::int64_t g = (z * dims[1] + y) * dims[0] + x;
                    for (int i = 0; i < D3Q19::q; ++i) {
                        max_diff = std::max(
                            max_diff,
                            std::abs(cell.f[i] -
                                     acc[std::size_t(i) * std::size_t(n) + std::size_t(g)]));
                    }
                }
            }
        }
        row.extras.push_back(max_diff);
    }

    state_.series.append(std::move(row));
}

template <typename T>
void Driver<T>::write_series() const {
    std::ofstream out(out_path("series.csv"), std::ios::binary);
    out << state_.series.to_csv();
}

template <typename T>
void Driver<T>::write_profiles() const {
    const std::int64_t L = setup_.dims[0];
    std::vector<std::vector<double>> ux_snaps, uz_snaps;
    for (std::size_t s = 0; s < state_.profile_times.size(); ++s) {
        if (state_.profile_times[s] >= plan_.avg_from_tc) {
            ux_snaps.push_back(state_.profile_ux[s]);
            uz_snaps.push_back(state_.profile_uz[s]);
        }
    }
    if (ux_snaps.empty() && !state_.profile_ux.empty()) {
        ux_snaps.push_back(state_.profile_ux.back());
        uz_snaps.push_back(state_.profile_uz.back());
    }
    if (ux_snaps.empty()) return;
    const std::vector<double> mean_ux = diag::averaged_profile(ux_snaps);
    const std::vector<double> mean_uz = diag::averaged_profile(uz_snaps);
    const double u0 = plan_.case_config.lattice_velocity();
    std::ofstream out(out_path("profiles.csv"), std::ios::binary);
    out << "z_c,ux_over_u0,x_c,uz_over_u0\n";
    for (std::int64_t i = 0; i < L; ++i) {
        const double coord = diag::normalized_coordinate(double(i) + 0.5, double(L));
        out << format_g17(coord) << "," << format_g17(mean_ux[std::size_t(i)] / u0) << ","
            << format_g17(coord) << "," << format_g17(mean_uz[std::size_t(i)] / u0) << "\n";
    }
}

template <typename T>
void Driver<T>::write_perf(double seconds, std::int64_t steps) const {
    std::ofstream out(out_path("perf.csv"), std::ios::binary);
    out << "cells,steps,seconds,mlups,device,bytes_per_cell,peak_glups,fraction_of_peak,"
           "memory_fraction\n";
    const std::int64_t cells = run_.num_cells();
    const double mlups =
        seconds > 0.0 ? double(cells) * double(steps) / seconds / 1e6 : 0.0;
    out << cells << "," << steps << "," << format_g17(seconds) << "," << format_g17(mlups);
    const int bits = plan_.case_config.precision == Precision::F32 ? 32 : 64;
    if (plan_.perf_device) {
        std::vector<perf::DeviceSpec> catalog = perf::builtin_devices();
        if (plan_.device_catalog) {
            const auto extra = perf::load_device_catalog(*plan_.device_catalog);
            catalog.insert(catalog.end(), extra.begin(), extra.end());
        }
        const auto device = perf::find_device(*plan_.perf_device, catalog);
        if (!device) {
            throw std::invalid_argument("unknown device \"" + *plan_.perf_device +
                                        "\"; list entries in the catalog file or use "
                                        "A100-SXM4-40GB");
        }
        const double peak = perf::peak_glups(*device, bits);
        out << "," << device->name << "," << perf::bytes_per_cell(bits) << ","
            << format_g17(peak) << "," << format_g17(mlups / (peak * 1e3)) << ","
            << format_g17(perf::memory_fraction(*device, bits, plan_.case_config.L));
    } else {
        out << "," << "," << perf::bytes_per_cell(bits) << ",,,";
    }
    out << "\n";
}

template <typename T>
void Driver<T>::write_manifest() const {
    Config manifest;
    const CaseConfig& cc = plan_.case_config;
    manifest.set("case.kind", cc.kind == CaseKind::Tgv
                                  ? "tgv"
                                  : (cc.kind == CaseKind::Cavity ? "cavity" : "porous"));
    manifest.set("case.L", std::to_string(cc.L));
    manifest.set("case.Re", format_g17(cc.Re));
    manifest.set("case.Ma", format_g17(cc.Ma));
    manifest.set("case.collision", cc.collision == LinkType::BGK
                                       ? "bgk"
                                       : (cc.collision == LinkType::TRT ? "trt" : "rr"));
    if (cc.smagorinsky_c) manifest.set("case.smagorinsky", format_g17(*cc.smagorinsky_c));
    manifest.set("case.lambda", format_g17(cc.lambda));
    manifest.set("case.omega_bulk_ho", format_g17(cc.omega_bulk_ho));
    manifest.set("case.precision", cc.precision == Precision::F32 ? "f32" : "f64");
    if (cc.kind == CaseKind::Porous) {
        manifest.set("case.drive", cc.drive == DriveKind::Velocity ? "velocity" : "pressure");
        manifest.set("case.geometry", cc.geometry);
        manifest.set("case.H", std::to_string(cc.plate_layers));
        manifest.set("case.tau", format_g17(cc.tau));
        manifest.set("case.delta_rho", format_g17(cc.delta_rho));
        manifest.set("case.upstream", std::to_string(cc.upstream));
        manifest.set("case.downstream", std::to_string(cc.downstream));
        if (cc.voxel_dims[0] > 0) {
            manifest.set("case.voxel_dims", std::to_string(cc.voxel_dims[0]) + "," +
                                                std::to_string(cc.voxel_dims[1]) + "," +
                                                std::to_string(cc.voxel_dims[2]));
            manifest.set("case.voxel_dx", format_g17(cc.voxel_dx));
            manifest.set("case.voxel_threshold", format_g17(cc.voxel_threshold));
        }
    }
    manifest.set("run.blocks", std::to_string(cc.block_grid[0]) + "," +
                                   std::to_string(cc.block_grid[1]) + "," +
                                   std::to_string(cc.block_grid[2]));
    manifest.set("run.workers", std::to_string(cc.workers));
    manifest.set("run.tmax",
                 plan_.until_steady ? "steady" : std::to_string(plan_.tmax_steps));
    manifest.set("run.steady_tol", format_g17(plan_.steady_tol));
    manifest.set("run.max_steps", std::to_string(plan_.max_steps));
    manifest.set("run.output_every", std::to_string(plan_.output_every));
    manifest.set("run.dump_every", std::to_string(plan_.dump_every));
    manifest.set("run.avg_from", format_g17(plan_.avg_from_tc));
    manifest.set("run.out", plan_.out_dir);
    if (plan_.perf_device) manifest.set("run.perf_device", *plan_.perf_device);
    if (plan_.device_catalog) manifest.set("run.device_catalog", *plan_.device_catalog);
    manifest.set("run.reference_check", plan_.reference_check ? "true" : "false");

    std::string models;
    for (const std::string& name : registry_->chain_strings()) {
        if (!run_.dispatch().contains(registry_->tag_for(name))) continue;
        if (!models.empty()) models += ",";
        models += name;
    }
    manifest.set("dispatch.models", models);

    std::string out = manifest.render();
    out += "[registry]\n";
    for (const std::string& name : registry_->chain_strings()) {
        out += "tag_" + std::to_string(registry_->tag_for(name)) + " = " + name + "\n";
    }
    out += "\n[files]\n";
    int index = 0;
    for (const std::string& file : files_) {
        out += "file_" + std::to_string(index++) + " = " + file + "\n";
    }
    std::ofstream file(out_path("manifest"), std::ios::binary);
    file << out;
}

template <typename T>
RunArtifacts Driver<T>::execute() {
    std::filesystem::create_directories(plan_.out_dir);

    if (plan_.case_config.kind == CaseKind::Porous) {
        PorousProbe probe;
        const auto& dims = setup_.dims;
        probe.fluid.assign(std::size_t(dims[0] * dims[1] * dims[2]), 0);
        for (std::int64_t z = 0; z < dims[2]; ++z) {
            for (std::int64_t y = 0; y < dims[1]; ++y) {
                for (std::int64_t x = 0; x < dims[0]; ++x) {
                    const DynamicsChain* chain = setup_.chain_of(x, y, z);
                    const LinkType t = chain->links.back().type;
                    const bool solid = t == LinkType::BounceBack || t == LinkType::NoDynamics ||
                                       t == LinkType::MovingBounceBack;
                    probe.fluid[std::size_t((z * dims[1] + y) * dims[0] + x)] = solid ? 0 : 1;
                }
            }
        }
        probe.x0 = setup_.sample_begin;
        probe.x1 = setup_.sample_end - 1;
        probe.aperture_mean = plan_.case_config.geometry == "plates";
        probe_ = std::move(probe);
    }

    if (plan_.reference_check) {
        for (int a = 0; a < 3; ++a) {
            if (setup_.dims[a] > 64) {
                throw std::invalid_argument(
                    "reference check supports monolithic grids up to 64^3");
            }
        }
        reference_ = build_reference(setup_);
    }

    switch (plan_.case_config.kind) {
        case CaseKind::Tgv:
            state_.series.extra_names = {"k_over_k0", "eps_over_eps0"};
            break;
        case CaseKind::Cavity:
            state_.series.extra_names = {"du_per_tc"};
            break;
        case CaseKind::Porous:
            state_.series.extra_names = {"k_perm", "ubar", "dp", "ux_in", "ux_out"};
            break;
    }
    if (plan_.reference_check) state_.series.extra_names.push_back("ref_maxdiff");

    sample(0);

    const perf::Clock clock = perf::monotonic_clock();
    double seconds = 0.0;
    std::int64_t step = 0;
    const std::int64_t limit = plan_.until_steady ? plan_.max_steps : plan_.tmax_steps;
    while (step < limit) {
        const std::int64_t chunk = std::min(plan_.output_every, limit - step);
        const double t0 = clock();
        run_.advance(chunk);
        seconds += clock() - t0;
        step += chunk;
        sample(step);
        if (plan_.dump_every > 0 && step % plan_.dump_every == 0) {
            char name[32];
            std::snprintf(name, sizeof name, "dump_%08lld.dolb", (long long)step);
            write_field_dump(out_path(name), run_.gather_block());
            files_.push_back(name);
        }
        if (plan_.until_steady && state_.steady_hits >= 3) break;
    }

    write_series();
    files_.insert(files_.begin(), "series.csv");
    if (plan_.case_config.kind == CaseKind::Cavity) {
        write_profiles();
        files_.push_back("profiles.csv");
    }
    write_perf(seconds, step);
    files_.push_back("perf.csv");
    write_manifest();
    files_.push_back("manifest");

    RunArtifacts artifacts;
    artifacts.out_dir = plan_.out_dir;
    artifacts.files = files_;
    artifacts.steps = step;
    artifacts.mlups = seconds > 0.0
                          ? double(run_.num_cells()) * double(step) / seconds / 1e6
                          : 0.0;
    return artifacts;
}

}  // namespace

RunArtifacts execute(const Config& config) {
    const RunPlan plan = resolve(config);
    const CaseSetup setup = make_setup(plan.case_config);
    auto registry = std::make_shared<DynamicsRegistry>();

    // build_run registers the case's chains; the configured dispatch set is
    // applied afterwards. Unknown names fail here, missing-but-used tags fail
    // at step time with the chain string.
    if (plan.case_config.precision == Precision::F32) {
        MultiBlockRun<float> run = build_run<float>(setup, plan.case_config.block_grid,
                                                    plan.case_config.workers, registry);
        if (!plan.dispatch_models.empty()) {
            run.set_dispatch(DispatchSet::from_strings(*registry, plan.dispatch_models));
        }
        Driver<float> driver(plan, setup, registry, std::move(run));
        return driver.execute();
    }
    MultiBlockRun<double> run = build_run<double>(setup, plan.case_config.block_grid,
                                                  plan.case_config.workers, registry);
    if (!plan.dispatch_models.empty()) {
        run.set_dispatch(DispatchSet::from_strings(*registry, plan.dispatch_models));
    }
    Driver<double> driver(plan, setup, registry, std::move(run));
    return driver.execute();
}

std::vector<std::string> show_models(const Config& config) {
    const RunPlan plan = resolve(config);
    const CaseSetup setup = make_setup(plan.case_config);
    return setup_models(setup);
}

}  // namespace dolb::run
