// io.hpp — CSV tables and JSON run metadata, written atomically

#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbs/errors.hpp"
#include "qbs/model.hpp"

namespace qbs {

inline constexpr const char* k_version = "0.1.0";

// Shortest text that round-trips a double.
inline std::string fmt17(double x) {
    if (x == 0.0) x = 0.0; // no "-0" in output
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Writes through a sibling temporary and renames, so readers never see a
// partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path() && !path.parent_path().empty()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot move output into place at " + path.string());
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        require(row.size() == header.size(), "csv row width does not match header");
        rows.push_back(std::move(row));
    }

    std::string str() const {
        std::ostringstream os;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
            os << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return os.str();
    }
};

inline CsvTable surface_table(const BispectrumSurface& s) {
    CsvTable t;
    t.header = {"omega1", "omega2", "re", "im"};
    for (std::size_t i = 0; i < s.grid.rows(); ++i)
        for (std::size_t j = 0; j < s.grid.cols(); ++j) {
            const cplx v = s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            t.add({fmt17(s.grid.omega1_values[i]), fmt17(s.grid.omega2_values[j]), fmt17(v.real()), fmt17(v.imag())});
        }
    return t;
}

// Metadata sidecar. Everything needed to rerun the computation goes in params.
struct RunMeta {
    std::string command;
    std::string source;
    nlohmann::json params = nlohmann::json::object();
    std::vector<std::uint64_t> seeds;
    nlohmann::json tolerances = nlohmann::json::object();
    nlohmann::json diagnostics = nlohmann::json::object();

    nlohmann::json to_json() const {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char ts[32];
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return nlohmann::json{{"tool", "qbs"},        {"version", k_version},   {"timestamp", ts},
                              {"command", command},   {"source", source},       {"params", params},
                              {"seeds", seeds},       {"tolerances", tolerances}, {"diagnostics", diagnostics}};
    }
};

inline nlohmann::json params_json(const CavityParams& p) {
    return {{"gamma", p.gamma}, {"delta", p.delta}, {"drive_re", p.drive_re}, {"drive_im", p.drive_im},
            {"n_th", p.n_th}};
}

inline nlohmann::json params_json(const SqueezedBathParams& p) {
    return {{"gamma", p.gamma}, {"delta", p.delta}, {"r", p.r}, {"n_cl", p.n_cl}};
}

inline std::filesystem::path meta_path(const std::filesystem::path& out) {
    std::filesystem::path m = out;
    m += ".meta.json";
    return m;
}

// Data first, then metadata; each file individually atomic.
inline void write_outputs(const std::filesystem::path& out, const CsvTable& table, const RunMeta& meta) {
    write_atomic(out, table.str());
    write_atomic(meta_path(out), meta.to_json().dump(2) + "\n");
}

} // namespace qbs
