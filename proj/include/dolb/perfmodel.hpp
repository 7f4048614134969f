#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dolb::perf {

struct DeviceSpec {
    std::string name;
    double bandwidth_bytes = 0.0;  // bytes / second
    double capacity_bytes = 0.0;
};

// Built-in catalog entry plus optional user entries from a structured text
// file: one device per line, "name bandwidth_GB_per_s capacity_GB",
// '#' starts a comment. GB is decimal (1e9).
std::vector<DeviceSpec> builtin_devices();
std::vector<DeviceSpec> load_device_catalog(const std::string& path);
std::optional<DeviceSpec> find_device(const std::string& name,
                                      const std::vector<DeviceSpec>& catalog);

// Bytes touched per cell and step: two population sets of 19 values each
// plus an 8-byte cell index and a 4-byte tag.
std::int64_t bytes_per_cell_for_store(std::int64_t n_store_bytes);
std::int64_t bytes_per_cell(int precision_bits);

// bandwidth / bytes_per_cell, in billions of cell updates per second.
double peak_glups(const DeviceSpec& device, int precision_bits);

// Used fraction of device memory for a cubic domain of side L; values above
// one mean the domain does not fit.
double memory_fraction(const DeviceSpec& device, int precision_bits, std::int64_t L);

// Largest cubic L that fits the device memory.
std::int64_t max_L(const DeviceSpec& device, int precision_bits);

enum class ScalingMode { Weak, Strong };

// Domain sides for 1..workers devices: weak scaling multiplies L by the cube
// root of the device count, strong scaling divides, both rounded to nearest.
std::vector<std::int64_t> scaling_sizes(std::int64_t L, int workers, ScalingMode mode);

struct PerfReport {
    std::int64_t cells = 0;
    std::int64_t steps = 0;
    double seconds = 0.0;
    double mlups = 0.0;
    std::optional<double> fraction_of_peak;
    std::vector<double> repetition_mlups;
};

using Clock = std::function<double()>;  // monotonic seconds

Clock monotonic_clock();

// Times `timed_steps` applications of `step` after a warmup, repeated
// `repetitions` times; the reported MLUPS is the mean over repetitions.
PerfReport measure_mlups(const std::function<void(std::int64_t)>& step, std::int64_t cells,
                         std::int64_t warmup_steps, std::int64_t timed_steps,
                         int repetitions = 3, const Clock& clock = monotonic_clock(),
                         const std::optional<DeviceSpec>& device = std::nullopt,
                         int precision_bits = 64);

}  // namespace dolb::perf
