#include "covest/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "covest/common.hpp"

namespace covest {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& field, const std::string& what, std::size_t line,
                    const std::string& origin) {
    const std::string t = trim(field);
    const char* begin = t.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ValidationError(origin + ":" + std::to_string(line) + ": cannot parse " + what +
                              " from '" + field + "'");
    return v;
}

} // namespace

std::vector<TickSeries> parse_ticks_csv(std::istream& in, bool normalize_time,
                                        const std::string& origin) {
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw ValidationError(origin + ": empty input");
    ++lineno;
    {
        std::string header = trim(line);
        if (header != "asset,time,value")
            throw ValidationError(origin + ": expected header 'asset,time,value', got '" + header +
                                  "'");
    }

    std::vector<TickSeries> series;
    std::unordered_map<std::string, std::size_t> index;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": expected exactly 3 comma-separated fields");
        const std::string asset = trim(line.substr(0, c1));
        if (asset.empty())
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty asset name");
        const double t =
            parse_double(line.substr(c1 + 1, c2 - c1 - 1), "time", lineno, origin);
        const double v = parse_double(line.substr(c2 + 1), "value", lineno, origin);

        auto it = index.find(asset);
        if (it == index.end()) {
            it = index.emplace(asset, series.size()).first;
            series.emplace_back();
            series.back().asset = asset;
        }
        TickSeries& s = series[it->second];
        s.times.push_back(t);
        s.values.push_back(v);
    }
    if (series.empty()) throw ValidationError(origin + ": no data rows");

    if (normalize_time) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& s : series) {
            for (const double t : s.times) {
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
        }
        if (!(hi > lo))
            throw ValidationError(origin + ": cannot normalize a zero-length time range");
        const double scale = 1.0 / (hi - lo);
        for (auto& s : series)
            for (double& t : s.times) t = (t - lo) * scale;
    }
    return series;
}

std::vector<TickSeries> read_ticks_csv(const std::string& path, bool normalize_time) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return parse_ticks_csv(in, normalize_time, path);
}

void write_ticks_csv(std::ostream& out, const std::vector<TickSeries>& series) {
    out << "asset,time,value\n";
    out.precision(17);
    for (const auto& s : series) {
        if (s.times.size() != s.values.size())
            throw ValidationError("series '" + s.asset + "' has mismatched lengths");
        for (std::size_t i = 0; i < s.times.size(); ++i)
            out << s.asset << ',' << s.times[i] << ',' << s.values[i] << '\n';
    }
}

void write_ticks_csv(const std::string& path, const std::vector<TickSeries>& series) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    write_ticks_csv(out, series);
    if (!out) throw ValidationError("write to '" + path + "' failed");
}

} // namespace covest
