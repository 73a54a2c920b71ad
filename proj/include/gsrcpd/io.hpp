#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <span>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/detect.hpp"
#include "gsrcpd/error.hpp"
#include "gsrcpd/observation.hpp"

namespace gsrcpd {

using Json = nlohmann::ordered_json;

/// Malformed input, with 1-based line and column when known.
class ParseError : public DomainError {
  public:
    ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& what)
        : DomainError(source + ":" + std::to_string(line) + (column ? ":" + std::to_string(column) : "") + ": " +
                      what),
          line_(line),
          column_(column) {}

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

enum class InputFormat { Auto, Csv, Jsonl };

inline InputFormat parse_input_format(std::string_view name) {
    if (name == "auto") return InputFormat::Auto;
    if (name == "csv") return InputFormat::Csv;
    if (name == "jsonl") return InputFormat::Jsonl;
    throw DomainError("unknown input format '" + std::string(name) + "' (expected auto, csv or jsonl)");
}

/// Jsonl for .jsonl/.ndjson paths, Csv otherwise.
inline InputFormat resolve_format(InputFormat f, const std::filesystem::path& path) {
    if (f != InputFormat::Auto) return f;
    const auto ext = path.extension().string();
    return ext == ".jsonl" || ext == ".ndjson" ? InputFormat::Jsonl : InputFormat::Csv;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ptr != s.data() + s.size()) return std::nullopt;
    if (ec == std::errc::result_out_of_range) return std::copysign(HUGE_VAL, s.front() == '-' ? -1.0 : 1.0);
    if (ec != std::errc()) return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

}  // namespace detail

/// Calls fn(row) for each data row of a CSV stream. Rows are time steps,
/// columns dimensions. A first line with any non-numeric cell is a header.
/// Blank lines are skipped; ragged rows and NaN/Inf cells are rejected with
/// their coordinates.
template <class Fn>
void scan_csv(std::istream& in, const std::string& source, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t dim = 0;
    bool first = true;
    std::vector<double> row;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_commas(line);
        row.clear();
        std::optional<std::size_t> bad;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto v = detail::parse_double(cells[j]);
            if (!v) {
                bad = j;
                break;
            }
            if (!std::isfinite(*v)) {
                throw ParseError(source, lineno, j + 1, "non-finite value '" + std::string(detail::trim(cells[j])) + "'");
            }
            row.push_back(*v);
        }
        if (bad) {
            if (first) {
                first = false;
                continue;
            }
            throw ParseError(source, lineno, *bad + 1,
                             "cannot parse '" + std::string(detail::trim(cells[*bad])) + "' as a number");
        }
        first = false;
        if (dim != 0 && row.size() != dim) {
            throw ParseError(source, lineno, 0,
                             "row has " + std::to_string(row.size()) + " columns, expected " + std::to_string(dim));
        }
        dim = row.size();
        fn(std::span<const double>(row));
    }
}

/// Calls fn(t, row) for each {"t": int, "y": [floats]} line; t must be
/// strictly increasing.
template <class Fn>
void scan_jsonl(std::istream& in, const std::string& source, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t dim = 0;
    std::optional<std::int64_t> last_t;
    std::vector<double> row;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, lineno, e.byte, "invalid JSON");
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, lineno, 0, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("t") || !j.contains("y")) {
            throw ParseError(source, lineno, 0, "expected an object with fields \"t\" and \"y\"");
        }
        if (!j["t"].is_number_integer()) throw ParseError(source, lineno, 0, "\"t\" must be an integer");
        const auto t = j["t"].get<std::int64_t>();
        if (last_t && t <= *last_t) throw ParseError(source, lineno, 0, "\"t\" must be strictly increasing");
        const auto& y = j["y"];
        if (!y.is_array() || y.empty()) throw ParseError(source, lineno, 0, "\"y\" must be a non-empty array");
        row.clear();
        for (std::size_t c = 0; c < y.size(); ++c) {
            if (!y[c].is_number()) throw ParseError(source, lineno, c + 1, "\"y\" entry is not a number");
            const double v = y[c].get<double>();
            if (!std::isfinite(v)) throw ParseError(source, lineno, c + 1, "non-finite value");
            row.push_back(v);
        }
        if (dim != 0 && row.size() != dim) {
            throw ParseError(source, lineno, 0,
                             "\"y\" has " + std::to_string(row.size()) + " entries, expected " + std::to_string(dim));
        }
        dim = row.size();
        last_t = t;
        fn(t, std::span<const double>(row));
    }
}

inline ObservationWindow read_csv(std::istream& in, const std::string& source = "<csv>") {
    ObservationWindow w;
    scan_csv(in, source, [&](std::span<const double> y) { w.push_back(y); });
    return w;
}

/// The window is anchored at the first t.
inline ObservationWindow read_jsonl(std::istream& in, const std::string& source = "<jsonl>") {
    ObservationWindow w;
    scan_jsonl(in, source, [&](std::int64_t t, std::span<const double> y) {
        if (w.size() == 0) w.set_anchor(t);
        w.push_back(y);
    });
    return w;
}

/// Calls fn(t, row) for every observation of a CSV or JSONL file; t is the
/// record time for JSONL and the 0-based row index for CSV.
template <class Fn>
void scan_observations(const std::filesystem::path& path, InputFormat format, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open input '" + path.string() + "'");
    if (resolve_format(format, path) == InputFormat::Jsonl) {
        scan_jsonl(in, path.string(), fn);
    } else {
        std::int64_t row = 0;
        scan_csv(in, path.string(), [&](std::span<const double> y) { fn(row++, y); });
    }
}

inline ObservationWindow read_observations(const std::filesystem::path& path, InputFormat format = InputFormat::Auto) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open input '" + path.string() + "'");
    return resolve_format(format, path) == InputFormat::Jsonl ? read_jsonl(in, path.string())
                                                              : read_csv(in, path.string());
}

inline void write_csv(std::ostream& os, const ObservationWindow& w) {
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto r = w.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
        os << '\n';
    }
    os.precision(old);
}

// Thresholds

namespace detail {

inline Json per_stat(const std::array<double, 3>& v) {
    Json j = Json::object();
    for (auto s : kAllStats) j[std::string(to_string(s))] = v[index_of(s)];
    return j;
}

inline std::array<double, 3> per_stat_from(const Json& j) {
    std::array<double, 3> v{};
    for (auto s : kAllStats) v[index_of(s)] = j.at(std::string(to_string(s))).get<double>();
    return v;
}

}  // namespace detail

inline Json to_json(const ThresholdTable& t) {
    Json j;
    j["version"] = t.version;
    for (auto s : kAllStats) {
        Json m = Json::object();
        for (const auto& [k, rho] : t.rho[index_of(s)]) {
            if (!std::isfinite(rho)) {
                throw DomainError("threshold for " + std::string(to_string(s)) + " at k=" + std::to_string(k) +
                                  " is not finite");
            }
            m[std::to_string(k)] = rho;
        }
        j[std::string(to_string(s))] = m;
    }
    j["alpha"] = t.alpha;
    j["alpha_star"] = detail::per_stat(t.alpha_star);
    j["n"] = t.n;
    j["d"] = t.d;
    j["graph"] = std::string(to_string(t.graph));
    j["method"] = t.method;
    j["B"] = t.reps;
    j["seed"] = t.seed;
    j["converged"] = t.converged;
    Json sc = Json::object();
    for (auto s : kAllStats) sc[std::string(to_string(s))] = t.stat_converged[index_of(s)];
    j["stat_converged"] = sc;
    j["achieved_rate"] = detail::per_stat(t.achieved_rate);
    j["dropped_replicates"] = t.dropped_replicates;
    return j;
}

inline ThresholdTable threshold_table_from_json(const Json& j) {
    try {
        ThresholdTable t;
        t.version = j.at("version").get<int>();
        if (t.version != 1) throw DomainError("unsupported threshold table version " + std::to_string(t.version));
        for (auto s : kAllStats) {
            for (const auto& [key, val] : j.at(std::string(to_string(s))).items()) {
                std::size_t k = 0;
                const auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), k);
                if (ec != std::errc() || p != key.data() + key.size()) throw DomainError("bad k key '" + key + "'");
                const double rho = val.get<double>();
                if (!std::isfinite(rho)) throw DomainError("non-finite threshold at k=" + key);
                t.rho[index_of(s)][k] = rho;
            }
        }
        t.alpha = j.at("alpha").get<double>();
        t.alpha_star = detail::per_stat_from(j.at("alpha_star"));
        t.n = j.at("n").get<std::size_t>();
        t.d = j.value("d", std::size_t{0});
        t.graph = parse_graph_kind(j.at("graph").get<std::string>());
        t.method = j.at("method").get<std::string>();
        t.reps = j.at("B").get<std::size_t>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.converged = j.at("converged").get<bool>();
        if (j.contains("stat_converged")) {
            for (auto s : kAllStats) t.stat_converged[index_of(s)] = j["stat_converged"].at(std::string(to_string(s)));
        } else {
            t.stat_converged.fill(t.converged);
        }
        t.achieved_rate = detail::per_stat_from(j.at("achieved_rate"));
        t.dropped_replicates = j.value("dropped_replicates", std::size_t{0});
        if (t.n < 2) throw DomainError("threshold table n must be >= 2");
        (void)t.k_range();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed threshold table: ") + e.what());
    }
}

inline ThresholdTable read_threshold_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open thresholds '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.byte, "invalid JSON");
    }
    return threshold_table_from_json(j);
}

// Events

inline Json to_json(const DetectionEvent& e) {
    Json j;
    j["t"] = e.time;
    j["loc"] = e.location;
    j["stat"] = std::string(to_string(e.stat));
    j["k"] = e.k;
    j["value"] = e.value;
    j["threshold"] = e.threshold;
    j["n"] = e.window_n;
    return j;
}

inline void write_event_jsonl(std::ostream& os, const DetectionEvent& e) { os << to_json(e).dump() << '\n'; }

inline DetectionEvent event_from_json(const Json& j) {
    DetectionEvent e;
    e.time = j.at("t").get<std::int64_t>();
    e.location = j.at("loc").get<std::int64_t>();
    e.stat = parse_stat_kind(j.at("stat").get<std::string>());
    e.k = j.at("k").get<std::size_t>();
    e.value = j.at("value").get<double>();
    e.threshold = j.at("threshold").get<double>();
    e.window_n = j.at("n").get<std::size_t>();
    e.arrival = e.time + static_cast<std::int64_t>(e.window_n) - 1;
    return e;
}

// Manifests

/// 64-bit FNV-1a of a byte sequence.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64({buf.data(), static_cast<std::size_t>(in.gcount())}, h);
    }
    return "fnv1a64:" + hex64(h);
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::filesystem::path manifest_path(const std::filesystem::path& output) {
    return output.string() + ".manifest.json";
}

/// Provenance record written next to every output file.
struct RunManifest {
    std::string command;
    Json config = Json::object();
    std::optional<std::uint64_t> seed;
    std::string tool_version =
#ifdef GSRCPD_VERSION
        GSRCPD_VERSION;
#else
        "unknown";
#endif
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    std::string started_at = utc_timestamp();
    std::string finished_at;

    [[nodiscard]] Json to_json() const {
        Json j;
        j["command"] = command;
        j["config"] = config;
        j["seed"] = seed ? Json(*seed) : Json(nullptr);
        j["tool_version"] = tool_version;
        Json in = Json::array();
        for (const auto& p : inputs) in.push_back({{"path", p.string()}, {"hash", file_digest(p)}});
        j["inputs"] = in;
        Json out = Json::array();
        for (const auto& p : outputs) {
            Json o{{"path", p.string()}};
            if (std::filesystem::exists(p)) o["hash"] = file_digest(p);
            out.push_back(o);
        }
        j["outputs"] = out;
        j["started_at"] = started_at;
        j["finished_at"] = finished_at.empty() ? utc_timestamp() : finished_at;
        return j;
    }

    /// Writes <output>.manifest.json and returns its path.
    std::filesystem::path write(const std::filesystem::path& output) const {
        const auto p = manifest_path(output);
        std::ofstream os(p, std::ios::binary);
        if (!os) throw DomainError("cannot write manifest '" + p.string() + "'");
        os << to_json().dump(2) << '\n';
        return p;
    }
};

inline void write_threshold_table(const std::filesystem::path& path, const ThresholdTable& t,
                                  const std::optional<std::filesystem::path>& manifest = {}) {
    auto j = to_json(t);
    if (manifest) j["manifest"] = manifest->filename().string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DomainError("cannot write '" + path.string() + "'");
    os << j.dump(2) << '\n';
}

}  // namespace gsrcpd
