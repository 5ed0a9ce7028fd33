#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("sopcast_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SOPCAST_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// First `rows` data rows of a CSV, header included.
std::string truncate_csv(const std::string& text, std::size_t rows) {
    std::size_t pos = text.find('\n');
    REQUIRE(pos != std::string::npos);
    for (std::size_t i = 0; i < rows; ++i) {
        pos = text.find('\n', pos + 1);
        REQUIRE(pos != std::string::npos);
    }
    return text.substr(0, pos + 1);
}

} // namespace

TEST_CASE("help exits cleanly and bare or bad invocations do not") {
    CHECK(run_cli("--help") == 0);
    for (const char* sub : {"synth", "train", "forecast", "eval", "decompose", "correlate"})
        CHECK(run_cli(std::string(sub) + " --help") == 0);

    CHECK(run_cli("") == 1);
    CHECK(run_cli("synth --no-such-flag") == 1);
    CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("synth writes a deterministic dataset") {
    TempDir a, b;
    REQUIRE(run_cli("synth --out " + a.file("data") + " --seed 5 --duration 172800") == 0);
    REQUIRE(run_cli("synth --out " + b.file("data") + " --seed 5 --duration 172800") == 0);

    for (const char* name : {"sop.csv", "weather.csv", "synth_meta.json"}) {
        const auto pa = a.path / "data" / name;
        const auto pb = b.path / "data" / name;
        REQUIRE(fs::exists(pa));
        CHECK(read_file(pa.string()) == read_file(pb.string()));
    }

    const std::string sop = read_file((a.path / "data" / "sop.csv").string());
    CHECK(sop.rfind("timestamp,sop_rad_per_s\n", 0) == 0);
    CHECK(count_lines(sop) == 172801);

    const auto meta = nlohmann::json::parse(read_file((a.path / "data" / "synth_meta.json").string()));
    CHECK(meta.at("seed") == 5);
    CHECK(meta.at("config").at("duration_seconds") == 172800);

    TempDir c;
    REQUIRE(run_cli("synth --out " + c.file("data") + " --seed 6 --duration 172800") == 0);
    CHECK(read_file((a.path / "data" / "sop.csv").string()) !=
          read_file((c.path / "data" / "sop.csv").string()));
}

TEST_CASE("synth honors the config file and flags override it") {
    TempDir t;
    write_file(t.file("run.cfg"),
               "# smoke config\n"
               "synth.duration_seconds = 172800\n"
               "synth.noise_std = 2\n");
    REQUIRE(run_cli("synth --config " + t.file("run.cfg") + " --out " + t.file("from_config") +
                    " --seed 5") == 0);
    CHECK(count_lines(read_file((t.path / "from_config" / "sop.csv").string())) == 172801);

    REQUIRE(run_cli("synth --config " + t.file("run.cfg") + " --out " + t.file("flag_wins") +
                    " --seed 5 --duration 216000") == 0);
    CHECK(count_lines(read_file((t.path / "flag_wins" / "sop.csv").string())) == 216001);

    write_file(t.file("bad.cfg"), "synth.no_such_knob = 1\n");
    CHECK(run_cli("synth --config " + t.file("bad.cfg") + " --out " + t.file("x") + " --seed 5") ==
          2);

    CHECK(run_cli("synth --out " + t.file("y") + " --seed 5 --duration 1000") == 2);
}

TEST_CASE("train, forecast, decompose, and correlate chain off one dataset") {
    TempDir t;
    REQUIRE(run_cli("synth --out " + t.file("data") + " --seed 7 --duration 216000") == 0);
    const std::string sop = (t.path / "data" / "sop.csv").string();
    const std::string weather = (t.path / "data" / "weather.csv").string();

    REQUIRE(run_cli("train --sop " + sop + " --weather " + weather + " --out " +
                    t.file("bundles") + " --scale both --max-epochs 2 --seed 9") == 0);
    const std::string short_bundle = (t.path / "bundles" / "bundle_short.json").string();
    const std::string long_bundle = (t.path / "bundles" / "bundle_long.json").string();
    REQUIRE(fs::exists(short_bundle));
    REQUIRE(fs::exists(long_bundle));

    const auto doc = nlohmann::json::parse(read_file(short_bundle));
    CHECK(doc.at("format_version") == 1);
    CHECK(doc.at("config").at("scale") == "short");
    CHECK(doc.at("band_models").size() == 6);
    CHECK(nlohmann::json::parse(read_file(long_bundle)).at("config").at("scale") == "long");

    SUBCASE("single-scale forecast appends one horizon") {
        const std::string out = t.file("forecast.csv");
        REQUIRE(run_cli("forecast --bundle " + short_bundle + " --sop " + sop + " --weather " +
                        weather + " --out " + out) == 0);
        const std::string text = read_file(out);
        CHECK(text.rfind("timestamp,sop_rad_per_s\n", 0) == 0);
        CHECK(count_lines(text) == 13);

        const std::string again = t.file("forecast2.csv");
        REQUIRE(run_cli("forecast --bundle " + short_bundle + " --sop " + sop + " --weather " +
                        weather + " --out " + again) == 0);
        CHECK(read_file(again) == text);
    }

    SUBCASE("adaptive forecast fuses both scales over twelve hours") {
        // Keep 48 h of history so the weather file covers the horizon beyond it.
        const std::string history = t.file("history.csv");
        write_file(history, truncate_csv(read_file(sop), 172800));

        const std::string out = t.file("adaptive.csv");
        REQUIRE(run_cli("forecast --mode adaptive --short-bundle " + short_bundle +
                        " --long-bundle " + long_bundle + " --sop " + history + " --weather " +
                        weather + " --out " + out) == 0);
        const std::string text = read_file(out);
        CHECK(text.rfind("timestamp,sop_rad_per_s,provenance\n", 0) == 0);
        CHECK(count_lines(text) == 692);
        CHECK(text.find("long-term") != std::string::npos);
    }

    SUBCASE("decompose and correlate report band structure") {
        const std::string out = t.file("pyramid.json");
        REQUIRE(run_cli("decompose --sop " + sop + " --levels 3 --last 64 --out " + out) == 0);
        const auto pyramid = nlohmann::json::parse(read_file(out));
        CHECK(pyramid.at("levels") == 3);
        CHECK(pyramid.at("original_length") == 64);
        for (const char* band : {"A3", "D3", "D2", "D1"})
            CHECK(pyramid.at("bands").contains(band));

        const std::string corr = t.file("corr.csv");
        REQUIRE(run_cli("correlate --sop " + sop + " --weather " + weather +
                        " --scale short --channels wind_gust --out " + corr) == 0);
        const std::string text = read_file(corr);
        CHECK(text.rfind("channel,band,r\n", 0) == 0);
        CHECK(count_lines(text) == 7);
        CHECK(text.find("wind_gust,A5,") != std::string::npos);
    }
}

TEST_CASE("eval writes reports and plots for both scales") {
    TempDir t;
    REQUIRE(run_cli("synth --out " + t.file("data") + " --seed 3 --duration 230400") == 0);
    const std::string sop = (t.path / "data" / "sop.csv").string();
    const std::string weather = (t.path / "data" / "weather.csv").string();

    REQUIRE(run_cli("eval --sop " + sop + " --weather " + weather + " --out " + t.file("report") +
                    " --seed 3 --test-fraction 0.25 --max-epochs 2") == 0);
    for (const char* name : {"report_short.json", "report_short.txt", "plot_short.csv",
                             "report_long.json", "report_long.txt", "plot_long.csv"})
        CHECK(fs::exists(t.path / "report" / name));

    const auto report =
        nlohmann::json::parse(read_file((t.path / "report" / "report_short.json").string()));
    CHECK(report.at("scale") == "short");
    CHECK(report.at("seed") == 3);
    CHECK(report.at("rows").size() == 4);
    CHECK(report.at("rows")[0].at("method") == "windy");

    const std::string plot = read_file((t.path / "report" / "plot_long.csv").string());
    CHECK(plot.rfind("timestamp,truth,prediction,method\n", 0) == 0);
    CHECK(count_lines(plot) > 4);
}

TEST_CASE("data errors surface as exit code 2") {
    TempDir t;
    CHECK(run_cli("forecast --bundle " + t.file("missing.json") + " --sop " +
                  t.file("missing.csv")) == 2);

    write_file(t.file("tiny_sop.csv"), "timestamp,sop_rad_per_s\n0,211\n1,212\n2,211\n");
    write_file(t.file("tiny_weather.csv"),
               "timestamp,wind_gust,temperature,humidity\n0,3,15,60\n1,3,15,60\n");
    CHECK(run_cli("train --sop " + t.file("tiny_sop.csv") + " --weather " +
                  t.file("tiny_weather.csv") + " --out " + t.file("bundles") +
                  " --scale short --max-epochs 1") == 2);

    write_file(t.file("garbage.csv"), "not,a,sop\nfile,at,all\n");
    CHECK(run_cli("decompose --sop " + t.file("garbage.csv") + " --levels 2") == 2);
}
