#include "dolb/dolb.h"

#include <cstring>
#include <string>

#include "dolb/accelerated_lattice.hpp"
#include "dolb/multiblock.hpp"
#include "dolb/perfmodel.hpp"
#include "dolb/runner.hpp"

namespace {

thread_local std::string g_last_error;

dolb_status fail(dolb_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <typename Fn>
dolb_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const dolb::DispatchError& e) {
        return fail(DOLB_ERROR_DISPATCH, e.what());
    } catch (const dolb::ExchangeError& e) {
        return fail(DOLB_ERROR_EXCHANGE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(DOLB_ERROR_CONFIG, e.what());
    } catch (const std::domain_error& e) {
        return fail(DOLB_ERROR_CONFIG, e.what());
    } catch (const std::runtime_error& e) {
        return fail(DOLB_ERROR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(DOLB_ERROR_INTERNAL, e.what());
    } catch (...) {
        return fail(DOLB_ERROR_INTERNAL, "unknown error");
    }
}

dolb::perf::DeviceSpec lookup_device(const char* name, const char* catalog_path) {
    auto catalog = dolb::perf::builtin_devices();
    if (catalog_path != nullptr) {
        const auto extra = dolb::perf::load_device_catalog(catalog_path);
        catalog.insert(catalog.end(), extra.begin(), extra.end());
    }
    const auto device = dolb::perf::find_device(name, catalog);
    if (!device) {
        throw std::invalid_argument(std::string("unknown device \"") + name + "\"");
    }
    return *device;
}

}  // namespace

struct dolb_config {
    dolb::run::Config config;
};

extern "C" {

const char* dolb_version(void) {
    return "0.1.0";
}

const char* dolb_last_error(void) {
    return g_last_error.c_str();
}

dolb_config* dolb_config_new(void) {
    return new (std::nothrow) dolb_config();
}

void dolb_config_free(dolb_config* config) {
    delete config;
}

dolb_status dolb_config_load(dolb_config* config, const char* path) {
    if (config == nullptr || path == nullptr) {
        return fail(DOLB_ERROR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&]() {
        const dolb::run::Config loaded = dolb::run::Config::from_file(path);
        for (const auto& [key, value] : loaded.values()) {
            config->config.set(key, value);
        }
        return DOLB_OK;
    });
}

dolb_status dolb_config_set(dolb_config* config, const char* key, const char* value) {
    if (config == nullptr || key == nullptr || value == nullptr) {
        return fail(DOLB_ERROR_INVALID_ARGUMENT, "null argument");
    }
    config->config.set(key, value);
    return DOLB_OK;
}

dolb_status dolb_config_get(const dolb_config* config, const char* key, char* buffer,
                            size_t capacity) {
    if (config == nullptr || key == nullptr || buffer == nullptr) {
        return fail(DOLB_ERROR_INVALID_ARGUMENT, "null argument");
    }
    const auto value = config->config.get(key);
    if (!value) {
        return fail(DOLB_ERROR_INVALID_ARGUMENT, std::string("config key \"") + key + "\" unset");
    }
    if (value->size() + 1 > capacity) {
        return fail(DOLB_ERROR_INVALID_ARGUMENT, "buffer too small");
    }
    std::memcpy(buffer, value->c_str(), value->size() + 1);
    return DOLB_OK;
}

dolb_status dolb_run(const dolb_config* config, int64_t* steps_out, double* mlups_out) {
    if (config == nullptr) return fail(DOLB_ERROR_INVALID_ARGUMENT, "null config");
    return guarded([&]() {
        const dolb::run::RunArtifacts artifacts = dolb::run::execute(config->config);
        if (steps_out != nullptr) *steps_out = artifacts.steps;
        if (mlups_out != nullptr) *mlups_out = artifacts.mlups;
        return DOLB_OK;
    });
}

dolb_status dolb_show_models(const dolb_config* config, char* buffer, size_t capacity,
                             size_t* length_out) {
    if (config == nullptr) return fail(DOLB_ERROR_INVALID_ARGUMENT, "null config");
    return guarded([&]() {
        const std::vector<std::string> models = dolb::run::show_models(config->config);
        std::string joined;
        for (const std::string& model : models) {
            joined += model;
            joined += '\n';
        }
        if (length_out != nullptr) *length_out = joined.size() + 1;
        if (buffer != nullptr) {
            if (joined.size() + 1 > capacity) {
                return fail(DOLB_ERROR_INVALID_ARGUMENT, "buffer too small");
            }
            std::memcpy(buffer, joined.c_str(), joined.size() + 1);
        }
        return DOLB_OK;
    });
}

dolb_status dolb_bytes_per_cell(int precision_bits, int64_t* bytes_out) {
    if (bytes_out == nullptr) return fail(DOLB_ERROR_INVALID_ARGUMENT, "null output");
    return guarded([&]() {
        *bytes_out = dolb::perf::bytes_per_cell(precision_bits);
        return DOLB_OK;
    });
}

dolb_status dolb_peak_glups(const char* device_name, const char* catalog_path_or_null,
                            int precision_bits, double* glups_out) {
    if (device_name == nullptr || glups_out == nullptr) {
        return fail(DOLB_ERROR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&]() {
        *glups_out =
            dolb::perf::peak_glups(lookup_device(device_name, catalog_path_or_null),
                                   precision_bits);
        return DOLB_OK;
    });
}

dolb_status dolb_memory_fraction(const char* device_name, const char* catalog_path_or_null,
                                 int precision_bits, int64_t L, double* fraction_out) {
    if (device_name == nullptr || fraction_out == nullptr) {
        return fail(DOLB_ERROR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&]() {
        *fraction_out = dolb::perf::memory_fraction(
            lookup_device(device_name, catalog_path_or_null), precision_bits, L);
        return DOLB_OK;
    });
}

}  // extern "C"
