#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "sopcast/csv.hpp"

using namespace sopcast;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sopcast_csv_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

} // namespace

TEST_CASE("parse_rfc3339") {
    CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == 0.0);
    CHECK(parse_rfc3339("2021-01-01T00:00:00Z") == 1609459200.0);
    CHECK(parse_rfc3339("2021-03-18T06:30:00Z") == 1616049000.0);
    CHECK(parse_rfc3339("2021-01-01T01:00:00+01:00") == 1609459200.0);
    CHECK(parse_rfc3339("2020-12-31T23:30:00-00:30") == 1609459200.0);
    CHECK(parse_rfc3339("2021-01-01T00:00:00.25Z") == 1609459200.25);

    CHECK_THROWS(parse_rfc3339("2021-01-01"));
    CHECK_THROWS(parse_rfc3339("2021-13-01T00:00:00Z"));
    CHECK_THROWS(parse_rfc3339("2021-01-01T00:00:00"));
    CHECK_THROWS(parse_rfc3339("2021-01-01T00:00:00Zjunk"));
    CHECK_THROWS(parse_rfc3339("not a timestamp"));
}

TEST_CASE("format_number") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(1609459200.0) == "1609459200");
    CHECK(format_number(-42.0) == "-42");
    CHECK(format_number(2.5) == "2.5");
    const double v = 211.38266801;
    CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("read_sop_csv") {
    TempDir dir;

    SUBCASE("epoch timestamps") {
        const auto p = dir.file("sop.csv", "timestamp,sop_rad_per_s\n"
                                           "100,1.5\n110,2.5\n120,3.5\n");
        const auto s = read_sop_csv(p);
        CHECK(s.start_time == 100);
        CHECK(s.step == 10);
        CHECK(s.values == std::vector<double>{1.5, 2.5, 3.5});
        CHECK(s.unit == "rad/s");
    }
    SUBCASE("RFC 3339 timestamps") {
        const auto p = dir.file("sop.csv",
                                "timestamp,sop_rad_per_s\n"
                                "2021-01-01T00:00:00Z,1\n"
                                "2021-01-01T00:00:01Z,2\n"
                                "2021-01-01T00:00:02Z,3\n");
        const auto s = read_sop_csv(p);
        CHECK(s.start_time == 1609459200.0);
        CHECK(s.step == 1);
        CHECK(s.values == std::vector<double>{1, 2, 3});
    }
    SUBCASE("mixed timestamp formats are rejected") {
        const auto p = dir.file("sop.csv", "timestamp,sop_rad_per_s\n"
                                           "100,1\n"
                                           "2021-01-01T00:00:00Z,2\n");
        CHECK_THROWS(read_sop_csv(p));
    }
    SUBCASE("irregular grid is rejected") {
        const auto p = dir.file("sop.csv", "timestamp,sop_rad_per_s\n"
                                           "0,1\n1,2\n3,3\n");
        CHECK_THROWS(read_sop_csv(p));
    }
    SUBCASE("non-finite value is rejected") {
        const auto p = dir.file("sop.csv", "timestamp,sop_rad_per_s\n"
                                           "0,1\n1,nan\n2,3\n");
        CHECK_THROWS(read_sop_csv(p));
    }
    SUBCASE("missing file, header, and rows") {
        CHECK_THROWS(read_sop_csv((dir.path / "absent.csv").string()));
        CHECK_THROWS(read_sop_csv(dir.file("empty.csv", "")));
        CHECK_THROWS(read_sop_csv(dir.file("headonly.csv", "timestamp,sop_rad_per_s\n")));
        CHECK_THROWS(read_sop_csv(dir.file("narrow.csv", "timestamp\n1\n")));
    }
    SUBCASE("field count must match the header") {
        const auto p = dir.file("sop.csv", "timestamp,sop_rad_per_s\n"
                                           "0,1,9\n");
        CHECK_THROWS(read_sop_csv(p));
    }
}

TEST_CASE("read_weather_csv") {
    TempDir dir;
    const std::string header = "timestamp,wind_gust,temperature,humidity\n";

    SUBCASE("basic table") {
        const auto p = dir.file("w.csv", header + "0,3,15,68\n1800,4,16,67\n3600,5,17,66\n");
        const auto w = read_weather_csv(p);
        CHECK(w.step == 1800);
        CHECK(w.rows() == 3);
        CHECK(w.channel("wind_gust") == std::vector<double>{3, 4, 5});
        CHECK(w.channel("temperature") == std::vector<double>{15, 16, 17});
        CHECK(w.channel("humidity") == std::vector<double>{68, 67, 66});
    }
    SUBCASE("short gaps repaired by linear interpolation") {
        const auto p = dir.file("w.csv", header + "0,10,1,1\n"
                                                  "1,,1,1\n"
                                                  "2,,1,1\n"
                                                  "3,nan,1,1\n"
                                                  "4,NaN,1,1\n"
                                                  "5,20,1,1\n");
        const auto w = read_weather_csv(p);
        const auto& g = w.channel("wind_gust");
        CHECK(g == std::vector<double>{10, 12, 14, 16, 18, 20});
    }
    SUBCASE("five-step gap is an error") {
        const auto p = dir.file("w.csv", header + "0,10,1,1\n"
                                                  "1,,1,1\n2,,1,1\n3,,1,1\n4,,1,1\n5,,1,1\n"
                                                  "6,20,1,1\n");
        CHECK_THROWS(read_weather_csv(p));
    }
    SUBCASE("gap touching the start or end is an error") {
        CHECK_THROWS(read_weather_csv(dir.file("w2.csv", header + "0,,1,1\n1,11,1,1\n")));
        CHECK_THROWS(read_weather_csv(dir.file("w3.csv", header + "0,10,1,1\n1,,1,1\n")));
    }
    SUBCASE("extra channels are preserved in order") {
        const auto p = dir.file("w.csv", "timestamp,wind_gust,temperature,humidity,pressure\n"
                                         "0,1,2,3,1013\n60,1,2,3,1014\n");
        const auto w = read_weather_csv(p);
        CHECK(w.names == std::vector<std::string>{"wind_gust", "temperature", "humidity",
                                                  "pressure"});
        CHECK(w.channel("pressure") == std::vector<double>{1013, 1014});
        CHECK_NOTHROW(w.validate());
    }
    SUBCASE("missing required channel is an error") {
        const auto p = dir.file("w.csv", "timestamp,wind_gust,temperature,dampness\n"
                                         "0,1,2,3\n60,1,2,3\n");
        CHECK_THROWS(read_weather_csv(p));
    }
}

TEST_CASE("write then read round trip") {
    TempDir dir;

    SUBCASE("sop series") {
        UniformSeries s;
        s.start_time = 1609459200.0;
        s.step = 1.0;
        s.unit = "rad/s";
        s.values = {211.25, 210.0, 213.5, 208.75};
        const auto p = (dir.path / "sop.csv").string();
        write_sop_csv(p, s);
        const auto back = read_sop_csv(p);
        CHECK(back.start_time == s.start_time);
        CHECK(back.step == s.step);
        CHECK(back.values == s.values);
    }
    SUBCASE("weather table") {
        WeatherTable w;
        w.start_time = 0.0;
        w.step = 1800.0;
        w.names = {"wind_gust", "temperature", "humidity"};
        w.columns = {{3.5, 4.25, 9.0}, {15.0, 15.5, 16.0}, {68.0, 67.5, 67.0}};
        const auto p = (dir.path / "weather.csv").string();
        write_weather_csv(p, w);
        const auto back = read_weather_csv(p);
        CHECK(back.start_time == w.start_time);
        CHECK(back.step == w.step);
        CHECK(back.names == w.names);
        CHECK(back.columns == w.columns);
    }
}
