#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dolb/perfmodel.hpp"

using namespace dolb::perf;

TEST_CASE("bytes per cell") {
    CHECK(bytes_per_cell(32) == 164);
    CHECK(bytes_per_cell(64) == 316);
    CHECK(bytes_per_cell_for_store(1) == 50);
    CHECK_THROWS_AS((void)bytes_per_cell(16), std::invalid_argument);
}

TEST_CASE("peak GLUPS on the A100 and on a constructed device") {
    const DeviceSpec a100 = builtin_devices().front();
    CHECK(a100.name == "A100-SXM4-40GB");
    CHECK(std::abs(peak_glups(a100, 32) - 9.481) <= 1e-3);
    CHECK(std::abs(peak_glups(a100, 64) - 4.921) <= 1e-3);

    const DeviceSpec unit{"unit", 164e9, 1e9};
    CHECK(peak_glups(unit, 32) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("peak GLUPS scales linearly in bandwidth, inversely in bytes") {
    DeviceSpec dev{"d", 1000e9, 10e9};
    const double base = peak_glups(dev, 64);
    dev.bandwidth_bytes *= 3.0;
    CHECK(peak_glups(dev, 64) == doctest::Approx(3.0 * base).epsilon(1e-13));
    CHECK(peak_glups(dev, 32) ==
          doctest::Approx(3.0 * base * 316.0 / 164.0).epsilon(1e-13));
}

TEST_CASE("memory fraction at L = 500 and the exact-fit identity") {
    const DeviceSpec a100 = builtin_devices().front();
    CHECK(std::abs(memory_fraction(a100, 32, 500) - 0.5125) <= 1e-4);
    CHECK(std::abs(memory_fraction(a100, 64, 500) - 0.9875) <= 1e-4);

    const double cells = 1000.0;
    const DeviceSpec snug{"snug", 1e9, 316.0 * cells};
    CHECK(memory_fraction(snug, 64, 10) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("max_L brackets the capacity") {
    const DeviceSpec a100 = builtin_devices().front();
    for (const int bits : {32, 64}) {
        const std::int64_t L = max_L(a100, bits);
        CHECK(memory_fraction(a100, bits, L) <= 1.0);
        CHECK(memory_fraction(a100, bits, L + 1) > 1.0);
    }
}

TEST_CASE("weak and strong scaling sizes reproduce the published lists") {
    CHECK(scaling_sizes(590, 4, ScalingMode::Weak) ==
          std::vector<std::int64_t>{590, 743, 851, 937});
    CHECK(scaling_sizes(590, 4, ScalingMode::Strong) ==
          std::vector<std::int64_t>{590, 468, 409, 372});
    CHECK(scaling_sizes(480, 1, ScalingMode::Strong) == std::vector<std::int64_t>{480});
}

TEST_CASE("weak scaling keeps the per-worker cell count within half a percent") {
    for (const std::int64_t L : {480, 590}) {
        const auto sizes = scaling_sizes(L, 8, ScalingMode::Weak);
        for (int w = 1; w <= 8; ++w) {
            const double per_worker = std::pow(double(sizes[std::size_t(w - 1)]), 3) / double(w);
            const double target = std::pow(double(L), 3);
            CHECK(std::abs(per_worker - target) / target <= 5e-3);
        }
    }
}

TEST_CASE("device catalog parsing") {
    const std::string path = "/tmp/dolb_devices_test.txt";
    {
        FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("# name bandwidth_GBps capacity_GB\n", f);
        std::fputs("host 204.8 512\n", f);
        std::fputs("\n", f);
        std::fclose(f);
    }
    const auto catalog = load_device_catalog(path);
    REQUIRE(catalog.size() == 1);
    CHECK(catalog[0].name == "host");
    CHECK(catalog[0].bandwidth_bytes == doctest::Approx(204.8e9).epsilon(1e-14));
    CHECK(catalog[0].capacity_bytes == doctest::Approx(512e9).epsilon(1e-14));
    CHECK(!find_device("missing", catalog).has_value());
    std::remove(path.c_str());
}

TEST_CASE("measure_mlups is definitional and averages three repetitions") {
    // Fake timer with scripted (t0, t1) pairs: durations 2 s, 1 s, 4 s.
    const std::vector<double> times = {0.0, 2.0, 2.0, 3.0, 3.0, 7.0};
    std::size_t call = 0;
    const Clock fake = [&]() { return times.at(call++); };

    std::int64_t stepped = 0;
    const auto step = [&stepped](std::int64_t n) { stepped += n; };

    const PerfReport report = measure_mlups(step, 1000, 5, 1000, 3, fake);
    CHECK(stepped == 5 + 3000);
    CHECK(report.cells == 1000);
    CHECK(report.steps == 3000);
    REQUIRE(report.repetition_mlups.size() == 3);
    // cells*steps/seconds/1e6 per repetition: 0.5, 1.0, 0.25 MLUPS.
    CHECK(report.repetition_mlups[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.repetition_mlups[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.repetition_mlups[2] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(report.mlups == doctest::Approx((0.5 + 1.0 + 0.25) / 3.0).epsilon(1e-12));

    SUBCASE("one-second single repetition gives exactly 1 MLUPS for 1000x1000") {
        double t = 0.0;
        const Clock tick = [&t]() {
            const double v = t;
            t += 1.0;
            return v;
        };
        const PerfReport simple = measure_mlups([](std::int64_t) {}, 1000, 0, 1000, 1, tick);
        CHECK(simple.mlups == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("fraction of peak uses the device model") {
        double t = 0.0;
        const Clock tick = [&t]() {
            const double v = t;
            t += 1.0;
            return v;
        };
        const DeviceSpec dev{"unit", 164e9, 1e9};  // peak 1 GLUPS in f32
        const PerfReport r =
            measure_mlups([](std::int64_t) {}, 1000000, 0, 1000, 1, tick, dev, 32);
        // 1e6 cells * 1e3 steps / 1 s = 1000 MLUPS = the 1 GLUPS peak.
        CHECK(r.fraction_of_peak.has_value());
        CHECK(*r.fraction_of_peak == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("monolithic and partitioned runs account the same cells-times-steps") {
    // cells * steps is partition independent by construction; check the
    // arithmetic the reports are built from.
    const std::int64_t cells = 64 * 64 * 64;
    const std::int64_t steps = 100;
    const std::int64_t blocks[4][3] = {{1, 1, 1}, {2, 2, 1}, {2, 2, 2}, {4, 1, 1}};
    for (const auto& grid : blocks) {
        std::int64_t sum = 0;
        // Balanced split of each axis.
        for (int gx = 0; gx < grid[0]; ++gx) {
            for (int gy = 0; gy < grid[1]; ++gy) {
                for (int gz = 0; gz < grid[2]; ++gz) {
                    auto len = [](std::int64_t n, int k, int b) {
                        return n / k + (b < int(n % k) ? 1 : 0);
                    };
                    sum += len(64, int(grid[0]), gx) * len(64, int(grid[1]), gy) *
                           len(64, int(grid[2]), gz);
                }
            }
        }
        CHECK(sum == cells);
        CHECK(sum * steps == cells * steps);
    }
}
