#include "dolb/perfmodel.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dolb::perf {

std::vector<DeviceSpec> builtin_devices() {
    return {{"A100-SXM4-40GB", 1555e9, 40e9}};
}

std::vector<DeviceSpec> load_device_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open device catalog \"" + path + "\"");
    std::vector<DeviceSpec> catalog;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        DeviceSpec dev;
        double bw_gb = 0.0, cap_gb = 0.0;
        if (fields >> dev.name >> bw_gb >> cap_gb) {
            dev.bandwidth_bytes = bw_gb * 1e9;
            dev.capacity_bytes = cap_gb * 1e9;
            if (dev.bandwidth_bytes <= 0.0 || dev.capacity_bytes <= 0.0) {
                throw std::runtime_error("device \"" + dev.name +
                                         "\" needs positive bandwidth and capacity");
            }
            catalog.push_back(std::move(dev));
        }
    }
    return catalog;
}

std::optional<DeviceSpec> find_device(const std::string& name,
                                      const std::vector<DeviceSpec>& catalog) {
    for (const DeviceSpec& dev : catalog) {
        if (dev.name == name) return dev;
    }
    return std::nullopt;
}

std::int64_t bytes_per_cell_for_store(std::int64_t n_store_bytes) {
    return 2 * 19 * n_store_bytes + 8 + 4;
}

std::int64_t bytes_per_cell(int precision_bits) {
    if (precision_bits != 32 && precision_bits != 64) {
        throw std::invalid_argument("precision must be 32 or 64 bits");
    }
    return bytes_per_cell_for_store(precision_bits / 8);
}

double peak_glups(const DeviceSpec& device, int precision_bits) {
    return device.bandwidth_bytes / double(bytes_per_cell(precision_bits)) / 1e9;
}

double memory_fraction(const DeviceSpec& device, int precision_bits, std::int64_t L) {
    const double bytes = double(bytes_per_cell(precision_bits)) * double(L) * double(L) *
                         double(L);
    return bytes / device.capacity_bytes;
}

std::int64_t max_L(const DeviceSpec& device, int precision_bits) {
    const double cells = device.capacity_bytes / double(bytes_per_cell(precision_bits));
    std::int64_t L = std::int64_t(std::cbrt(cells));
    while (memory_fraction(device, precision_bits, L + 1) <= 1.0) ++L;
    while (L > 1 && memory_fraction(device, precision_bits, L) > 1.0) --L;
    return L;
}

std::vector<std::int64_t> scaling_sizes(std::int64_t L, int workers, ScalingMode mode) {
    if (workers < 1) throw std::invalid_argument("scaling_sizes: workers must be >= 1");
    std::vector<std::int64_t> sizes;
    for (int w = 1; w <= workers; ++w) {
        const double factor = std::cbrt(double(w));
        const double value = mode == ScalingMode::Weak ? double(L) * factor : double(L) / factor;
        sizes.push_back(std::llround(value));
    }
    return sizes;
}

Clock monotonic_clock() {
    return []() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
            .count();
    };
}

PerfReport measure_mlups(const std::function<void(std::int64_t)>& step, std::int64_t cells,
                         std::int64_t warmup_steps, std::int64_t timed_steps, int repetitions,
                         const Clock& clock, const std::optional<DeviceSpec>& device,
                         int precision_bits) {
    if (timed_steps < 1) throw std::invalid_argument("measure_mlups: timed_steps must be >= 1");
    if (repetitions < 1) throw std::invalid_argument("measure_mlups: repetitions must be >= 1");
    if (warmup_steps > 0) step(warmup_steps);
    PerfReport report;
    report.cells = cells;
    report.steps = timed_steps * repetitions;
    double total_seconds = 0.0;
    for (int r = 0; r < repetitions; ++r) {
        const double t0 = clock();
        step(timed_steps);
        const double t1 = clock();
        const double seconds = t1 - t0;
        total_seconds += seconds;
        report.repetition_mlups.push_back(double(cells) * double(timed_steps) / seconds / 1e6);
    }
    report.seconds = total_seconds;
    double sum = 0.0;
    for (const double m : report.repetition_mlups) sum += m;
    report.mlups = sum / double(repetitions);
    if (device) {
        report.fraction_of_peak = report.mlups / (peak_glups(*device, precision_bits) * 1e3);
    }
    return report;
}

}  // namespace dolb::perf
