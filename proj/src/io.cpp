#include "hqmom/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hqmom/errors.hpp"

namespace hqmom {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    const char* rest = res.ptr;
    while (rest != last && (*rest == ' ' || *rest == '\t' || *rest == '\r')) ++rest;
    if (res.ec != std::errc{} || rest != last)
        throw SchemaError("parse_double: cannot parse '" + s + "' as a number");
    return v;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw IoError("atomic_write: cannot open " + tmp.string());
        out << content;
        if (!out) throw IoError("atomic_write: write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("atomic_write: rename to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_file: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string content_digest(const std::string& content) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : content) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

void append_row(std::string& out, const std::vector<double>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        out += format_double(row[c]);
    }
    out += '\n';
}

}  // namespace

std::string trajectory_to_csv(const TrajectoryRecord& rec) {
    std::string out = kTrajectoryHeader;
    out += '\n';
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto m = rec.moments[i].as_array();
        const auto& tm = rec.target_moments[i];
        append_row(out, {rec.times[i], m[0], m[1], m[2], m[3], m[4], tm[0], tm[1], tm[2], tm[3],
                         rec.cp[i]});
    }
    return out;
}

std::string hybrid_run_to_csv(const HybridRun& run) {
    std::string out = kTrajectoryHeader;
    out += '\n';
    for (std::size_t i = 0; i < run.size(); ++i) {
        const auto m = run.moments[i].as_array();
        const auto& tm = run.target_moments[i];
        append_row(out, {run.times[i], m[0], m[1], m[2], m[3], m[4], tm[0], tm[1], tm[2], tm[3],
                         run.cp[i]});
    }
    return out;
}

std::vector<std::vector<double>> csv_columns(const std::string& csv,
                                             const std::vector<std::string>& expected_header) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("csv: empty document");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split(line, ',');
    if (header != expected_header) throw SchemaError("csv: unexpected header '" + line + "'");

    std::vector<std::vector<double>> cols(header.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != header.size())
            throw SchemaError("csv: row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            try {
                cols[c].push_back(parse_double(cells[c]));
            } catch (const SchemaError& e) {
                throw SchemaError("csv: row " + std::to_string(row) + ", column " +
                                  std::to_string(c + 1) + ": " + e.what());
            }
        }
    }
    return cols;
}

TrajectoryRecord trajectory_from_csv(const std::string& csv) {
    const std::vector<std::string> header = split(kTrajectoryHeader, ',');
    const auto cols = csv_columns(csv, header);
    TrajectoryRecord rec;
    const std::size_t n = cols[0].size();
    rec.times = cols[0];
    rec.moments.resize(n);
    rec.target_moments.resize(n);
    rec.cp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rec.moments[i] = {cols[1][i], cols[2][i], cols[3][i], cols[4][i], cols[5][i]};
        rec.target_moments[i] = {cols[6][i], cols[7][i], cols[8][i], cols[9][i]};
        rec.cp[i] = cols[10][i];
    }
    // Rates are derived data; rebuild them from the grid when possible.
    // The grid is in natural periods but rates are per RP time.
    if (n >= 3) {
        const double dt = (rec.times[1] - rec.times[0]) * PhysParams{}.natural_period();
        rec.moment_rates.resize(n);
        for (int c = 0; c < 5; ++c) {
            std::vector<double> series(n);
            for (std::size_t i = 0; i < n; ++i) series[i] = rec.moments[i].as_array()[c];
            const auto d = grid_derivative(series, dt);
            for (std::size_t i = 0; i < n; ++i) rec.moment_rates[i][c] = d[i];
        }
    } else {
        rec.moment_rates.assign(n, {});
    }
    return rec;
}

std::string make_manifest(const std::string& command, const std::string& config_json,
                          const std::vector<std::pair<std::string, std::string>>& input_digests,
                          bool deterministic) {
    nlohmann::json doc;
    doc["tool_version"] = kToolVersion;
    doc["command"] = command;
    doc["config"] = nlohmann::json::parse(config_json.empty() ? "{}" : config_json);
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [name, digest] : input_digests) inputs[name] = digest;
    doc["input_digests"] = inputs;
    if (deterministic) {
        doc["timestamp"] = nullptr;
    } else {
        const auto now = std::chrono::system_clock::now();
        doc["timestamp"] =
            std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    }
    return doc.dump(2);
}

}  // namespace hqmom
