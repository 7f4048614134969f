// Command-line runner for the dolb solver. Talks to the solver exclusively
// through the C API in dolb/dolb.h.

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dolb/dolb.h"

namespace {

struct ConfigDeleter {
    void operator()(dolb_config* c) const { dolb_config_free(c); }
};
using ConfigPtr = std::unique_ptr<dolb_config, ConfigDeleter>;

struct CommonOptions {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_option_if(CLI::App* cmd, CommonOptions& opts, const char* flag, const char* key,
                   const char* help) {
    auto setter = [&opts, key](const std::string& value) {
        opts.overrides.push_back({key, value});
    };
    cmd->add_option_function<std::string>(flag, setter, help);
}

ConfigPtr build_config(const CommonOptions& opts) {
    ConfigPtr config(dolb_config_new());
    if (!config) throw std::bad_alloc();
    if (!opts.config_file.empty()) {
        if (dolb_config_load(config.get(), opts.config_file.c_str()) != DOLB_OK) {
            throw CLI::RuntimeError(std::string(dolb_last_error()), 2);
        }
    }
    for (const auto& [key, value] : opts.overrides) {
        if (dolb_config_set(config.get(), key.c_str(), value.c_str()) != DOLB_OK) {
            throw CLI::RuntimeError(std::string(dolb_last_error()), 2);
        }
    }
    return config;
}

void add_case_flags(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_file, "configuration file (overridden by flags)");
    add_option_if(cmd, opts, "--case", "case.kind", "benchmark case: tgv, cavity or porous");
    add_option_if(cmd, opts, "--L", "case.L", "resolution in cells");
    add_option_if(cmd, opts, "--Re", "case.Re", "Reynolds number");
    add_option_if(cmd, opts, "--Ma", "case.Ma", "Mach number");
    add_option_if(cmd, opts, "--collision", "case.collision", "collision model: bgk, trt or rr");
    add_option_if(cmd, opts, "--smagorinsky", "case.smagorinsky", "Smagorinsky constant C");
    add_option_if(cmd, opts, "--precision", "case.precision", "f32 or f64");
    add_option_if(cmd, opts, "--drive", "case.drive", "porous drive: velocity or pressure");
    add_option_if(cmd, opts, "--geometry", "case.geometry",
                  "porous geometry: \"plates\" or a raw voxel file");
    add_option_if(cmd, opts, "--H", "case.H", "fluid layers of the plate channel");
    add_option_if(cmd, opts, "--tau", "case.tau", "porous relaxation time");
    add_option_if(cmd, opts, "--voxel-dims", "case.voxel_dims", "voxel file extents nx,ny,nz");
    add_option_if(cmd, opts, "--voxel-dx", "case.voxel_dx", "voxel size in meters");
    add_option_if(cmd, opts, "--blocks", "run.blocks", "block grid bx,by,bz");
    add_option_if(cmd, opts, "--workers", "run.workers", "worker threads");
}

int command_run(const CommonOptions& opts) {
    ConfigPtr config = build_config(opts);
    int64_t steps = 0;
    double mlups = 0.0;
    if (dolb_run(config.get(), &steps, &mlups) != DOLB_OK) {
        std::fprintf(stderr, "error: %s\n", dolb_last_error());
        return 2;
    }
    char out_dir[4096] = "out";
    dolb_config_get(config.get(), "run.out", out_dir, sizeof out_dir);
    std::printf("completed %lld steps at %.2f MLUPS; artifacts in %s\n", (long long)steps, mlups,
                out_dir);
    return 0;
}

int command_show_models(const CommonOptions& opts, bool write) {
    ConfigPtr config = build_config(opts);
    size_t length = 0;
    if (dolb_show_models(config.get(), nullptr, 0, &length) != DOLB_OK) {
        std::fprintf(stderr, "error: %s\n", dolb_last_error());
        return 2;
    }
    std::string buffer(length, '\0');
    if (dolb_show_models(config.get(), buffer.data(), buffer.size(), nullptr) != DOLB_OK) {
        std::fprintf(stderr, "error: %s\n", dolb_last_error());
        return 2;
    }
    buffer.resize(length > 0 ? length - 1 : 0);
    std::fputs(buffer.c_str(), stdout);

    if (write) {
        if (opts.config_file.empty()) {
            std::fprintf(stderr, "error: --write needs --config FILE\n");
            return 2;
        }
        std::string models;
        for (const char c : buffer) models += c == '\n' ? ',' : c;
        while (!models.empty() && models.back() == ',') models.pop_back();
        std::ofstream out(opts.config_file, std::ios::app);
        out << "\n[dispatch]\nmodels = " << models << "\n";
        std::printf("dispatch set written to %s\n", opts.config_file.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dolb: D3Q19 lattice Boltzmann benchmark runner"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "run a benchmark case");
    add_case_flags(run_cmd, run_opts);
    add_option_if(run_cmd, run_opts, "--tmax", "run.tmax",
                  "run length: steps, \"<N>tc\" or \"steady\"");
    add_option_if(run_cmd, run_opts, "--out", "run.out", "output directory");
    add_option_if(run_cmd, run_opts, "--output-every", "run.output_every",
                  "diagnostics cadence in steps");
    add_option_if(run_cmd, run_opts, "--dump-every", "run.dump_every",
                  "field dump cadence in steps (0: off)");
    add_option_if(run_cmd, run_opts, "--perf-device", "run.perf_device",
                  "device name for the fraction-of-peak column");
    add_option_if(run_cmd, run_opts, "--device-catalog", "run.device_catalog",
                  "extra device catalog file");
    bool reference_check = false;
    run_cmd->add_flag("--reference-check", reference_check,
                      "run the AoS oracle alongside and report max divergence");

    CommonOptions show_opts;
    bool write_models = false;
    CLI::App* show_cmd =
        app.add_subcommand("show-models", "print the chain strings a case requires");
    add_case_flags(show_cmd, show_opts);
    show_cmd->add_flag("--write", write_models, "append the list to the config file");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        if (reference_check) run_opts.overrides.push_back({"run.reference_check", "true"});
        return command_run(run_opts);
    }
    return command_show_models(show_opts, write_models);
}
