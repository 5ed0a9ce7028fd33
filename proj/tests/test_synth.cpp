#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <vector>

#include "sopcast/rng.hpp"
#include "sopcast/series.hpp"
#include "sopcast/stats.hpp"
#include "sopcast/synth.hpp"

using namespace sopcast;

TEST_CASE("generate is deterministic per seed") {
    SynthConfig cfg;
    cfg.duration_seconds = 172800.0;
    const auto [sop_a, w_a] = generate(cfg, 42);
    const auto [sop_b, w_b] = generate(cfg, 42);
    CHECK(sop_a.values == sop_b.values);
    CHECK(sop_a.start_time == sop_b.start_time);
    CHECK(w_a.columns == w_b.columns);

    const auto [sop_c, w_c] = generate(cfg, 43);
    CHECK(sop_a.values != sop_c.values);
    CHECK(w_a.columns != w_c.columns);
}

TEST_CASE("generated grids and shapes") {
    SynthConfig cfg;
    cfg.duration_seconds = 172800.0;
    const auto [sop, weather] = generate(cfg, 1);

    CHECK(sop.step == 1.0);
    CHECK(weather.step == 1800.0);
    CHECK(sop.size() == 172800);
    CHECK(weather.rows() == 172800 / 1800 + 1);
    CHECK(sop.start_time == cfg.start_time);
    CHECK(weather.start_time == cfg.start_time);
    CHECK(sop.unit == "rad/s");
    CHECK(weather.names ==
          std::vector<std::string>{"wind_gust", "temperature", "humidity"});
    CHECK_NOTHROW(weather.validate());
    for (double v : sop.values) REQUIRE(std::isfinite(v));
    for (double g : weather.channel("wind_gust")) REQUIRE(g >= 0.0);
}

TEST_CASE("default ten-day run lands on the calibration targets") {
    SynthConfig cfg;
    const auto [sop, weather] = generate(cfg, 42);
    REQUIRE(sop.size() == 864000);
    const auto stats = summary_stats(sop);
    CHECK(std::abs(stats.mean - 211.0) <= 5.0);
    CHECK(std::abs(stats.std - 42.0) <= 5.0);
    CHECK(stats.min < stats.mean);
    CHECK(stats.max > stats.mean);
}

TEST_CASE("null coupling leaves only chance correlation") {
    SynthConfig cfg;
    cfg.wind_gain = 0.0;
    cfg.temp_gain = 0.0;
    cfg.humidity_gain = 0.0;
    const auto [sop, weather] = generate(cfg, 42);
    const auto [al, wal] = align(sop, weather);
    for (const auto& name : wal.names) {
        const double r = pearson(al.values, wal.channel(name));
        CHECK(std::abs(r) <= 0.1);
    }
}

TEST_CASE("wind coupling strengthens the gust correlation") {
    // On a fixed realization the coupled term grows linearly with the gain
    // while everything else stays put, so |r| rises through these probes.
    std::vector<double> magnitude;
    for (double g : {0.0, 0.5, 1.0}) {
        SynthConfig cfg;
        cfg.wind_gain = g;
        const auto [sop, weather] = generate(cfg, 43);
        const auto [al, wal] = align(sop, weather);
        magnitude.push_back(std::abs(pearson(al.values, wal.channel("wind_gust"))));
    }
    CHECK(magnitude[0] < magnitude[1]);
    CHECK(magnitude[1] < magnitude[2]);
}

TEST_CASE("summary_stats") {
    UniformSeries s;
    s.values = {3, 3, 3};
    auto st = summary_stats(s);
    CHECK(st.mean == 3.0);
    CHECK(st.std == 0.0);
    CHECK(st.min == 3.0);
    CHECK(st.max == 3.0);

    s.values = {-1, 1};
    st = summary_stats(s);
    CHECK(st.mean == 0.0);
    CHECK(st.std == 1.0);
    CHECK(st.min == -1.0);
    CHECK(st.max == 1.0);

    Rng rng(5);
    s.values.resize(1000);
    for (auto& v : s.values) v = rng.normal();
    st = summary_stats(s);
    double m = 0.0;
    for (double v : s.values) m += v;
    m /= 1000.0;
    double s2 = 0.0;
    for (double v : s.values) s2 += (v - m) * (v - m);
    CHECK(std::abs(st.mean - m) <= 1e-12);
    CHECK(std::abs(st.std - std::sqrt(s2 / 1000.0)) <= 1e-12);

    CHECK_THROWS(summary_stats(UniformSeries{}));
}

TEST_CASE("config validation") {
    SynthConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("duration must cover both window geometries") {
        cfg.duration_seconds = 1000.0;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("gains must be non-negative") {
        cfg.wind_gain = -0.1;
        CHECK_THROWS(cfg.validate());
        cfg = SynthConfig{};
        cfg.vibration_amplitude = -1.0;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("vibration periods must be ordered and positive") {
        cfg.vibration_period_windy = 0.0;
        CHECK_THROWS(cfg.validate());
        cfg = SynthConfig{};
        cfg.vibration_period_windy = cfg.vibration_period_calm + 1.0;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("time constants must be positive") {
        cfg.drift_period = 0.0;
        CHECK_THROWS(cfg.validate());
        cfg = SynthConfig{};
        cfg.wander_tau = -5.0;
        CHECK_THROWS(cfg.validate());
        cfg = SynthConfig{};
        cfg.vibration_envelope_tau = 0.0;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("generate rejects an invalid config") {
        cfg = SynthConfig{};
        cfg.duration_seconds = 10.0;
        CHECK_THROWS(generate(cfg, 1));
    }
}
