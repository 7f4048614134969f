#include "dolb/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace dolb::diag {

double tree_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (const double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return tree_sum(values.subspan(0, half)) + tree_sum(values.subspan(half));
}

double tree_mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of an empty set");
    return tree_sum(values) / double(values.size());
}

double kinetic_energy(const VectorField& u) {
    std::vector<double> e(std::size_t(u.size()));
    for (std::size_t k = 0; k < e.size(); ++k) {
        e[k] = 0.5 * (u.x[k] * u.x[k] + u.y[k] * u.y[k] + u.z[k] * u.z[k]);
    }
    return tree_mean(e);
}

std::array<double, 4> fd8_coefficients() {
    return {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
}

namespace {

struct Derivative {
    const VectorField* field;
    std::array<bool, 3> periodic;
    std::array<double, 4> coeff = fd8_coefficients();

    double along(const std::vector<double>& comp, std::array<std::int64_t, 3> at,
                 int axis) const {
        const std::int64_t n = field->dims[std::size_t(axis)];
        double d = 0.0;
        for (int k = 1; k <= 4; ++k) {
            std::array<std::int64_t, 3> plus = at, minus = at;
            plus[std::size_t(axis)] = (at[std::size_t(axis)] + k) % n;
            minus[std::size_t(axis)] = (at[std::size_t(axis)] - k + 4 * n) % n;
            d += coeff[std::size_t(k - 1)] *
                 (comp[std::size_t(field->index(plus[0], plus[1], plus[2]))] -
                  comp[std::size_t(field->index(minus[0], minus[1], minus[2]))]);
        }
        return d;
    }
};

}  // namespace

VorticityField vorticity_fd8(const VectorField& u, std::array<bool, 3> periodic) {
    for (int a = 0; a < 3; ++a) {
        if (!periodic[std::size_t(a)] && u.dims[std::size_t(a)] < 9) {
            throw std::invalid_argument(
                "vorticity_fd8: non-periodic extent below the 9-point stencil width");
        }
    }
    VorticityField w;
    w.omega.dims = u.dims;
    const std::size_t n = std::size_t(u.size());
    w.omega.x.assign(n, 0.0);
    w.omega.y.assign(n, 0.0);
    w.omega.z.assign(n, 0.0);
    w.valid.assign(n, 1);

    const Derivative d{&u, periodic};
    for (std::int64_t k = 0; k < u.dims[2]; ++k) {
        for (std::int64_t j = 0; j < u.dims[1]; ++j) {
            for (std::int64_t i = 0; i < u.dims[0]; ++i) {
                const std::array<std::int64_t, 3> at = {i, j, k};
                bool ok = true;
                for (int a = 0; a < 3; ++a) {
                    if (!periodic[std::size_t(a)] &&
                        (at[std::size_t(a)] < 4 ||
                         at[std::size_t(a)] >= u.dims[std::size_t(a)] - 4)) {
                        ok = false;
                    }
                }
                const std::size_t c = std::size_t(u.index(i, j, k));
                if (!ok) {
                    w.valid[c] = 0;
                    continue;
                }
                const double duz_dy = d.along(u.z, at, 1);
                const double duy_dz = d.along(u.y, at, 2);
                const double dux_dz = d.along(u.x, at, 2);
                const double duz_dx = d.along(u.z, at, 0);
                const double duy_dx = d.along(u.y, at, 0);
                const double dux_dy = d.along(u.x, at, 1);
                w.omega.x[c] = duz_dy - duy_dz;
                w.omega.y[c] = dux_dz - duz_dx;
                w.omega.z[c] = duy_dx - dux_dy;
            }
        }
    }
    return w;
}

double enstrophy(const VorticityField& w) {
    std::vector<double> e;
    e.reserve(w.valid.size());
    for (std::size_t c = 0; c < w.valid.size(); ++c) {
        if (w.valid[c]) {
            e.push_back(0.5 * (w.omega.x[c] * w.omega.x[c] + w.omega.y[c] * w.omega.y[c] +
                               w.omega.z[c] * w.omega.z[c]));
        }
    }
    return tree_mean(e);
}

double permeability(double mean_velocity, double nu, double lx, double dP) {
    if (dP == 0.0) {
        throw std::domain_error("permeability: zero pressure drop, k is undefined");
    }
    return mean_velocity * nu * lx / dP;
}

double to_millidarcy(double k_lattice, double dx_meters) {
    return k_lattice * dx_meters * dx_meters / 9.869233e-16;
}

std::vector<double> averaged_profile(const std::vector<std::vector<double>>& snapshots) {
    if (snapshots.empty()) throw std::invalid_argument("averaged_profile: no snapshots");
    const std::size_t n = snapshots.front().size();
    std::vector<double> mean(n, 0.0);
    std::vector<double> column(snapshots.size());
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t s = 0; s < snapshots.size(); ++s) {
            if (snapshots[s].size() != n) {
                throw std::invalid_argument("averaged_profile: ragged snapshots");
            }
            column[s] = snapshots[s][p];
        }
        mean[p] = tree_mean(column);
    }
    return mean;
}

double normalized_coordinate(double alpha, double extent) {
    return 2.0 * alpha / extent - 1.0;
}

namespace {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void DiagnosticsSeries::append(Row row) {
    if (!rows.empty() && row.step <= rows.back().step) {
        throw std::invalid_argument("diagnostics steps must be strictly increasing");
    }
    if (!std::isfinite(row.kinetic) || !std::isfinite(row.enstrophy)) {
        throw std::invalid_argument("diagnostics values must be finite");
    }
    for (const double v : row.extras) {
        if (!std::isfinite(v)) throw std::invalid_argument("diagnostics values must be finite");
    }
    if (row.extras.size() != extra_names.size()) {
        throw std::invalid_argument("diagnostics row arity mismatch");
    }
    rows.push_back(std::move(row));
}

std::string DiagnosticsSeries::to_csv() const {
    std::string out = "step,t_c,k,eps";
    for (const std::string& name : extra_names) out += "," + name;
    out += "\n";
    for (const Row& row : rows) {
        out += std::to_string(row.step);
        out += "," + format_g17(row.time_tc);
        out += "," + format_g17(row.kinetic);
        out += "," + format_g17(row.enstrophy);
        for (const double v : row.extras) out += "," + format_g17(v);
        out += "\n";
    }
    return out;
}

DiagnosticsSeries DiagnosticsSeries::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty diagnostics CSV");
    DiagnosticsSeries series;
    std::istringstream header(line);
    std::string col;
    int col_index = 0;
    while (std::getline(header, col, ',')) {
        if (col_index >= 4) series.extra_names.push_back(col);
        ++col_index;
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string cell;
        Row row;
        int c = 0;
        while (std::getline(cells, cell, ',')) {
            switch (c) {
                case 0: row.step = std::stoll(cell); break;
                case 1: row.time_tc = std::stod(cell); break;
                case 2: row.kinetic = std::stod(cell); break;
                case 3: row.enstrophy = std::stod(cell); break;
                default: row.extras.push_back(std::stod(cell));
            }
            ++c;
        }
        series.append(std::move(row));
    }
    return series;
}

}  // namespace dolb::diag
