#include "sopcast/csv.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sopcast {

namespace {

constexpr int kMaxGapSteps = 4;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_double(const std::string& text, double* out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = begin + t.size();
    auto [ptr, ec] = std::from_chars(begin, end, *out);
    return ec == std::errc{} && ptr == end;
}

bool is_integer_token(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    std::size_t i = (t[0] == '+' || t[0] == '-') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    }
    return true;
}

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// days_from_civil).
long long days_from_civil(long long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned long long>(y - era * 400);
    const unsigned long long doy = (153ULL * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned long long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

bool is_missing_token(const std::string& raw) {
    const std::string t = trim(raw);
    if (t.empty()) return true;
    if (t == "nan" || t == "NaN" || t == "NAN") return true;
    double v;
    if (parse_double(t, &v) && std::isnan(v)) return true;
    return false;
}

struct ParsedFile {
    std::vector<std::string> header;
    std::vector<double> timestamps;
    std::vector<std::vector<std::string>> cells; // per data row, excluding timestamp
};

ParsedFile read_rows(const std::string& path, std::size_t min_columns) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");

    ParsedFile file;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header row");
    file.header = split_csv_line(line);
    if (file.header.size() < min_columns)
        throw std::runtime_error(path + ": expected at least " + std::to_string(min_columns) +
                                 " columns, found " + std::to_string(file.header.size()));

    int ts_format = -1; // 0 = epoch seconds, 1 = RFC 3339
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != file.header.size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(file.header.size()) + " fields, found " +
                                     std::to_string(fields.size()));
        const int fmt = is_integer_token(fields[0]) ? 0 : 1;
        if (ts_format < 0) {
            ts_format = fmt;
        } else if (fmt != ts_format) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": mixed timestamp formats within one file");
        }
        double t;
        if (fmt == 0) {
            if (!parse_double(fields[0], &t))
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad epoch timestamp");
        } else {
            t = parse_rfc3339(trim(fields[0]));
        }
        file.timestamps.push_back(t);
        fields.erase(fields.begin());
        file.cells.push_back(std::move(fields));
    }
    if (file.timestamps.empty()) throw std::runtime_error(path + ": no data rows");
    return file;
}

// start/step from the timestamp column; rejects irregular grids.
std::pair<double, double> grid_of(const std::string& path, const std::vector<double>& ts) {
    if (ts.size() < 2) return {ts.front(), 1.0};
    const double step = ts[1] - ts[0];
    if (step <= 0.0) throw std::runtime_error(path + ": timestamps must strictly increase");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double expected = ts[0] + static_cast<double>(i) * step;
        if (std::abs(ts[i] - expected) > 1e-6 * step)
            throw std::runtime_error(path + ": irregular sampling near timestamp index " +
                                     std::to_string(i));
    }
    return {ts[0], step};
}

// In-place linear repair of missing runs; gaps longer than kMaxGapSteps or
// touching either end are errors.
void repair_gaps(const std::string& path, const std::string& channel, std::vector<double>& v,
                 const std::vector<bool>& missing) {
    std::size_t i = 0;
    while (i < v.size()) {
        if (!missing[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < v.size() && missing[j]) ++j;
        const std::size_t run = j - i;
        if (i == 0 || j == v.size())
            throw std::runtime_error(path + ": channel '" + channel +
                                     "' has missing values at the series boundary");
        if (run > kMaxGapSteps)
            throw std::runtime_error(path + ": channel '" + channel + "' has a gap of " +
                                     std::to_string(run) + " steps (max " +
                                     std::to_string(kMaxGapSteps) + ")");
        const double lo = v[i - 1];
        const double hi = v[j];
        for (std::size_t k = 0; k < run; ++k)
            v[i + k] = lo + (hi - lo) * static_cast<double>(k + 1) / static_cast<double>(run + 1);
        i = j;
    }
}

} // namespace

double parse_rfc3339(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM)
    const auto fail = [&]() -> double {
        throw std::runtime_error("malformed RFC 3339 timestamp '" + text + "'");
    };
    if (text.size() < 20) fail();
    const auto digit = [&](std::size_t i) -> int {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) fail();
        return text[i] - '0';
    };
    const auto num2 = [&](std::size_t i) { return digit(i) * 10 + digit(i + 1); };

    const int year = digit(0) * 1000 + digit(1) * 100 + digit(2) * 10 + digit(3);
    if (text[4] != '-' || text[7] != '-') fail();
    const int month = num2(5);
    const int day = num2(8);
    if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') fail();
    const int hour = num2(11);
    if (text[13] != ':') fail();
    const int minute = num2(14);
    if (text[16] != ':') fail();
    const int second = num2(17);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        fail();

    std::size_t pos = 19;
    double frac = 0.0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        double scale = 0.1;
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) fail();
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            frac += scale * (text[pos] - '0');
            scale *= 0.1;
            ++pos;
        }
    }
    if (pos >= text.size()) fail();
    long long offset = 0;
    if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '+' ? 1 : -1;
        if (pos + 6 > text.size() || text[pos + 3] != ':') fail();
        offset = sign * (num2(pos + 1) * 3600LL + num2(pos + 4) * 60LL);
        pos += 6;
    } else {
        fail();
    }
    if (pos != text.size()) fail();

    const long long days = days_from_civil(year, static_cast<unsigned>(month),
                                           static_cast<unsigned>(day));
    const long long secs = days * 86400LL + hour * 3600LL + minute * 60LL + second - offset;
    return static_cast<double>(secs) + frac;
}

std::string format_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) {
        const auto i = static_cast<long long>(v);
        return std::to_string(i);
    }
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

UniformSeries read_sop_csv(const std::string& path) {
    const ParsedFile file = read_rows(path, 2);
    const auto [start, step] = grid_of(path, file.timestamps);

    UniformSeries s;
    s.start_time = start;
    s.step = step;
    s.unit = "rad/s";
    s.values.reserve(file.cells.size());
    for (std::size_t i = 0; i < file.cells.size(); ++i) {
        double v;
        if (!parse_double(file.cells[i][0], &v) || !std::isfinite(v))
            throw std::runtime_error(path + ": non-finite or missing value at row " +
                                     std::to_string(i + 2));
        s.values.push_back(v);
    }
    return s;
}

WeatherTable read_weather_csv(const std::string& path) {
    const ParsedFile file = read_rows(path, 4);
    const auto [start, step] = grid_of(path, file.timestamps);

    WeatherTable w;
    w.start_time = start;
    w.step = step;
    for (std::size_t c = 1; c < file.header.size(); ++c) w.names.push_back(trim(file.header[c]));

    const std::size_t rows = file.cells.size();
    for (std::size_t c = 0; c < w.names.size(); ++c) {
        std::vector<double> col(rows, 0.0);
        std::vector<bool> missing(rows, false);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::string& cell = file.cells[r][c];
            if (is_missing_token(cell)) {
                missing[r] = true;
                continue;
            }
            double v;
            if (!parse_double(cell, &v) || !std::isfinite(v))
                throw std::runtime_error(path + ": bad value in channel '" + w.names[c] +
                                         "' at row " + std::to_string(r + 2));
            col[r] = v;
        }
        repair_gaps(path, w.names[c], col, missing);
        w.columns.push_back(std::move(col));
    }
    w.validate();
    return w;
}

void write_sop_csv(const std::string& path, const UniformSeries& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "timestamp,sop_rad_per_s\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << format_number(s.time_at(i)) << ',' << format_number(s.values[i]) << '\n';
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

void write_weather_csv(const std::string& path, const WeatherTable& w) {
    w.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "timestamp";
    for (const auto& name : w.names) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < w.rows(); ++r) {
        out << format_number(w.time_at(r));
        for (const auto& col : w.columns) out << ',' << format_number(col[r]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

} // namespace sopcast
