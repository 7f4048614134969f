#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dolb/cases.hpp"

namespace dolb::run {

// Flat key-value configuration with sections; keys are "section.name".
// Later assignments win, so command-line overrides are plain set() calls.
class Config {
  public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    // Section-grouped rendering, parseable by from_string.
    std::string render() const;

  private:
    std::map<std::string, std::string> values_;
};

// Resolved run schedule alongside the case parameters.
struct RunPlan {
    CaseConfig case_config;
    std::int64_t tmax_steps = 0;     // 0 with steady = true means "until steady"
    bool until_steady = false;
    double steady_tol = 1e-8;
    std::int64_t max_steps = 200000;
    std::int64_t output_every = 1;
    std::int64_t dump_every = 0;     // 0 disables field dumps
    double avg_from_tc = 0.0;        // profile averaging window start
    std::string out_dir = "out";
    std::optional<std::string> perf_device;
    std::optional<std::string> device_catalog;
    bool reference_check = false;
    std::vector<std::string> dispatch_models;  // empty: all registered chains
};

// Parses and validates the configuration; unknown identifiers raise
// std::invalid_argument naming the valid alternatives.
RunPlan resolve(const Config& config);

struct RunArtifacts {
    std::string out_dir;
    std::vector<std::string> files;
    std::int64_t steps = 0;
    double mlups = 0.0;
};

// Executes the configured benchmark and writes series.csv, perf.csv, the
// manifest and any requested field dumps into the output directory.
RunArtifacts execute(const Config& config);

// Chain strings the configured case requires, sorted; a sufficient dispatch
// set for the run.
std::vector<std::string> show_models(const Config& config);

}  // namespace dolb::run
