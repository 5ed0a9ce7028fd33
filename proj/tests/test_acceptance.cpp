// Acceptance gate for the forecasting pipeline. Each numbered criterion
// prints one PASS or FAIL line; the exit code is the number of failures.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sopcast/forecast.hpp"
#include "sopcast/fusion.hpp"
#include "sopcast/harness.hpp"
#include "sopcast/neural.hpp"
#include "sopcast/rng.hpp"
#include "sopcast/series.hpp"
#include "sopcast/synth.hpp"
#include "sopcast/wavelet.hpp"

namespace fs = std::filesystem;
using namespace sopcast;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(-5.0, 5.0);
    return x;
}

int max_feasible_levels(std::size_t n, const WaveletSpec& spec) {
    int j = 0;
    while (n >= 2 && j < 12) {
        n = (n + spec.taps() - 1) / 2;
        ++j;
    }
    return j;
}

void criterion_1_reconstruction() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& spec = db5_filters();
    double worst = 0.0;
    for (std::size_t n : {36ul, 48ul, 257ul, 1024ul}) {
        const auto x = random_signal(n, n);
        for (int j = 1; j <= max_feasible_levels(n, spec); ++j) {
            const auto rec = waverec(wavedec(x, j, spec), spec);
            for (std::size_t i = 0; i < n; ++i)
                worst = std::max(worst, std::abs(rec[i] - x[i]));
        }
    }
    const double secs = seconds_since(t0);
    report(1, worst <= 1e-10 && secs < 5.0,
           fmt("reconstruction error %.3e over lengths {36,48,257,1024} at all depths (%.2f s)",
               worst, secs));
}

void criterion_2_filters() {
    const auto& spec = db5_filters();
    double sum = 0.0, sumsq = 0.0;
    for (double h : spec.lowpass) {
        sum += h;
        sumsq += h * h;
    }
    const double sum_err = std::abs(sum - std::sqrt(2.0));
    const double sumsq_err = std::abs(sumsq - 1.0);
    bool qmf = true;
    for (std::size_t k = 0; k < 10; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        if (spec.highpass[k] != sign * spec.lowpass[9 - k]) qmf = false;
    }
    report(2, sum_err <= 1e-12 && sumsq_err <= 1e-12 && qmf,
           fmt("filter sums off by %.3e and %.3e, quadrature mirror %s", sum_err, sumsq_err,
               qmf ? "exact" : "violated"));
}

void criterion_3_gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(77);
    double worst = 0.0;
    int models = 0;
    for (int trial = 0; trial < 24; ++trial) {
        std::vector<std::size_t> sizes;
        const int layers = 2 + static_cast<int>(rng.bounded(2));
        for (int l = 0; l <= layers; ++l) sizes.push_back(1 + rng.bounded(16));
        auto m = mlp_new(sizes, 500 + static_cast<std::uint64_t>(trial));
        std::vector<double> x(sizes.front()), t(sizes.back());
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        for (auto& v : t) v = rng.uniform(-2.0, 2.0);
        const auto g = backward(m, x, t);

        const double eps = 1e-5;
        const auto check = [&](double& slot, double analytic) {
            const double orig = slot;
            slot = orig + eps;
            const double up = loss_mse(forward(m, x), t);
            slot = orig - eps;
            const double dn = loss_mse(forward(m, x), t);
            slot = orig;
            const double numeric = (up - dn) / (2.0 * eps);
            const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
            worst = std::max(worst, std::abs(numeric - analytic) / denom);
        };
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
            for (std::size_t i = 0; i < m.weights[l].size(); ++i)
                check(m.weights[l][i], g.weights[l][i]);
            for (std::size_t i = 0; i < m.biases[l].size(); ++i)
                check(m.biases[l][i], g.biases[l][i]);
        }
        ++models;
    }
    const double secs = seconds_since(t0);
    report(3, worst <= 1e-4 && models >= 20 && secs < 10.0,
           fmt("gradient check worst relative error %.3e over %d models (%.2f s)", worst, models,
               secs));
}

void criterion_4_metrics() {
    Rng rng(314);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.bounded(50);
        std::vector<double> truth(n), pred(n);
        for (auto& v : truth) v = rng.uniform(5.0, 50.0);
        for (auto& v : pred) v = rng.uniform(-10.0, 60.0);

        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        const double rmse_ref = std::sqrt(acc / static_cast<double>(n));
        acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::abs((truth[i] - pred[i]) / truth[i]);
        const double mape_ref = acc / static_cast<double>(n) * 100.0;

        worst = std::max(worst, std::abs(rmse(truth, pred) - rmse_ref) /
                                    std::max(1.0, std::abs(rmse_ref)));
        worst = std::max(worst, std::abs(mape(truth, pred) - mape_ref) /
                                    std::max(1.0, std::abs(mape_ref)));
    }
    report(4, worst <= 1e-12,
           fmt("rmse/mape deviate from loop references by at most %.3e over 100 pairs", worst));
}

void criterion_5_stubbed_models() {
    ForecastConfig cfg = ForecastConfig::short_term();
    cfg.exogenous.clear();

    std::vector<double> target(static_cast<std::size_t>(cfg.window));
    for (std::size_t i = 0; i < target.size(); ++i)
        target[i] = 211.0 + 30.0 * std::sin(0.4 * static_cast<double>(i));
    CoefficientPyramid p = wavedec(target, cfg.levels, db5_filters());

    ForecasterBundle b;
    b.config = cfg;
    b.wiring.levels = cfg.levels;
    b.wiring.inputs.assign(static_cast<std::size_t>(cfg.levels) + 1, {});
    std::vector<std::vector<double>> bands;
    bands.push_back(p.approx);
    for (int j = cfg.levels; j >= 1; --j) bands.push_back(p.details[static_cast<std::size_t>(j - 1)]);
    for (const auto& coeffs : bands) {
        MlpModel m = mlp_new({coeffs.size(), coeffs.size()}, 0);
        for (auto& w : m.weights[0]) w = 0.0;
        m.biases[0] = coeffs;
        b.band_models.push_back(std::move(m));
        b.input_stats.push_back(ZScoreStats{0.0, 1.0});
        b.target_stats.push_back(ZScoreStats{0.0, 1.0});
    }

    const auto window = random_signal(static_cast<std::size_t>(cfg.window), 99);
    const auto pred = predict(b, window, {});
    const auto H = static_cast<std::size_t>(cfg.horizon);
    double worst = 0.0;
    for (std::size_t i = 0; i < H; ++i)
        worst = std::max(worst, std::abs(pred[i] - target[target.size() - H + i]));
    report(5, pred.size() == H && worst <= 1e-8,
           fmt("stubbed band models reproduce the target horizon within %.3e", worst));
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    BenchmarkResult result;
    SummaryStats stats;
};

std::vector<SeedOutcome> run_benchmarks(double* secs) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SeedOutcome> out;
    for (std::uint64_t seed : {41ull, 42ull, 43ull}) {
        SeedOutcome run;
        run.seed = seed;
        auto [sop, weather] = generate(SynthConfig{}, seed);
        run.stats = summary_stats(sop);
        run.result = run_benchmark(sop, weather, BenchmarkConfig{}, seed);
        out.push_back(std::move(run));
    }
    *secs = seconds_since(t0);
    return out;
}

void criterion_6_short_scale(const std::vector<SeedOutcome>& runs, double secs) {
    bool ordered = true;
    double mean_improvement = 0.0;
    std::string detail;
    for (const auto& run : runs) {
        const auto& r = run.result.short_report;
        const double windy = r.row("windy").rmse;
        const double calm = r.row("calm").rmse;
        const double ma = r.row("moving_average").rmse;
        if (!(windy < calm && calm < ma)) ordered = false;
        mean_improvement += r.improvements.at("windy_over_calm_rmse");
        detail += fmt("%s%llu: %.2f/%.2f/%.2f", detail.empty() ? "" : " ",
                      static_cast<unsigned long long>(run.seed), windy, calm, ma);
    }
    mean_improvement /= static_cast<double>(runs.size());
    report(6, ordered && mean_improvement >= 15.0 && secs < 600.0,
           fmt("windy/calm/moving_average RMSE %s; mean improvement %.1f%% (%.0f s)",
               detail.c_str(), mean_improvement, secs));
}

void criterion_7_long_scale(const std::vector<SeedOutcome>& runs) {
    int ordered = 0;
    std::string detail;
    for (const auto& run : runs) {
        const auto& r = run.result.long_report;
        const double lt = r.row("long_term").rmse;
        const double dwt = r.row("ann_dwt").rmse;
        const double ann = r.row("ann").rmse;
        const double ma = r.row("moving_average").rmse;
        const bool ok = lt < dwt && dwt < ann && ann < ma;
        if (ok) ++ordered;
        detail += fmt("%s%llu:%s", detail.empty() ? "" : " ",
                      static_cast<unsigned long long>(run.seed), ok ? "ordered" : "violated");
    }
    report(7, ordered >= 2,
           fmt("long_term<ann_dwt<ann<moving_average on %d of 3 seeds (%s)", ordered,
               detail.c_str()));
}

void criterion_8_statistics(const std::vector<SeedOutcome>& runs) {
    bool ok = true;
    std::string detail;
    for (const auto& run : runs) {
        if (std::abs(run.stats.mean - 211.0) > 5.0 || std::abs(run.stats.std - 42.0) > 5.0)
            ok = false;
        detail += fmt("%s%llu: mean %.2f std %.2f", detail.empty() ? "" : "; ",
                      static_cast<unsigned long long>(run.seed), run.stats.mean, run.stats.std);
    }
    report(8, ok, detail + " (targets 211+-5, 42+-5)");
}

void criterion_9_fusion_identities() {
    UniformSeries long_track;
    long_track.start_time = 0.0;
    long_track.step = 1800.0;
    long_track.values = {100.0, 130.0, 160.0, 190.0};

    UniformSeries seconds;
    seconds.start_time = 0.0;
    seconds.step = 1.0;
    seconds.values.resize(5401);
    for (std::size_t i = 0; i < seconds.values.size(); ++i)
        seconds.values[i] = 150.0 + 40.0 * std::sin(0.002 * static_cast<double>(i));
    const UniformSeries short_minutes = aggregate_to_minutes(seconds);

    const UniformSeries baseline = resample_linear(long_track, 60.0);
    FusionGate calm_gate, windy_gate;
    calm_gate.threshold = windy_gate.threshold = 10.0;
    calm_gate.windy.assign(baseline.size(), false);
    windy_gate.windy.assign(baseline.size(), true);

    const FusedForecast calm = fuse(long_track, short_minutes, calm_gate);
    const FusedForecast windy = fuse(long_track, short_minutes, windy_gate);

    bool calm_ok = calm.series.size() == baseline.size();
    for (std::size_t i = 0; calm_ok && i < baseline.size(); ++i) {
        if (calm.series.values[i] != baseline.values[i]) calm_ok = false;
        if (calm.provenance[i] != Provenance::kLongTerm) calm_ok = false;
    }
    bool windy_ok = windy.series.size() == baseline.size();
    for (std::size_t i = 0; windy_ok && i < baseline.size(); ++i) {
        if (windy.series.values[i] != short_minutes.values[i]) windy_ok = false;
        if (windy.provenance[i] != Provenance::kShortTerm) windy_ok = false;
    }
    report(9, calm_ok && windy_ok,
           fmt("all-calm equals the interpolated long track (%s), all-windy the aggregated "
               "short track (%s), both bit-exact",
               calm_ok ? "yes" : "no", windy_ok ? "yes" : "no"));
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SOPCAST_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool read_file(const fs::path& path, std::string* out) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    *out = buf.str();
    return true;
}

void criterion_10_determinism() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path root =
        fs::temp_directory_path() / ("sopcast_accept_" + std::to_string(::getpid()));
    fs::create_directories(root);

    bool commands_ok = true;
    for (const char* run : {"a", "b"}) {
        const std::string dir = (root / run).string();
        if (run_cli("synth --out " + dir + "/data --seed 11 --duration 230400") != 0)
            commands_ok = false;
        if (run_cli("train --sop " + dir + "/data/sop.csv --weather " + dir +
                    "/data/weather.csv --out " + dir + "/bundles --scale both --seed 11"
                    " --max-epochs 30") != 0)
            commands_ok = false;
        if (run_cli("eval --sop " + dir + "/data/sop.csv --weather " + dir +
                    "/data/weather.csv --out " + dir + "/report --seed 11 --test-fraction 0.25"
                    " --max-epochs 30") != 0)
            commands_ok = false;
    }

    const std::vector<std::string> files = {
        "data/sop.csv",           "data/weather.csv",      "data/synth_meta.json",
        "bundles/bundle_short.json", "bundles/bundle_long.json", "report/report_short.json",
        "report/report_short.txt", "report/plot_short.csv", "report/report_long.json",
        "report/report_long.txt",  "report/plot_long.csv"};
    std::size_t identical = 0;
    bool files_ok = commands_ok;
    for (const auto& name : files) {
        std::string a, b;
        if (!read_file(root / "a" / name, &a) || !read_file(root / "b" / name, &b) || a != b)
            files_ok = false;
        else
            ++identical;
    }
    std::error_code ec;
    fs::remove_all(root, ec);
    report(10, files_ok,
           fmt("synth+train+eval reruns byte-identical on %zu of %zu artifacts (%.0f s)",
               identical, files.size(), seconds_since(t0)));
}

} // namespace

int main() {
    criterion_1_reconstruction();
    criterion_2_filters();
    criterion_3_gradients();
    criterion_4_metrics();
    criterion_5_stubbed_models();

    double bench_secs = 0.0;
    const auto runs = run_benchmarks(&bench_secs);
    criterion_6_short_scale(runs, bench_secs);
    criterion_7_long_scale(runs);
    criterion_8_statistics(runs);

    criterion_9_fusion_identities();
    criterion_10_determinism();

    if (g_failures == 0)
        std::printf("all criteria satisfied\n");
    else
        std::printf("%d criteria failing\n", g_failures);
    return g_failures;
}
