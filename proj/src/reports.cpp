#include "rbsde/reports.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace rbsde {

const char* const kToolVersion = "rbsde 1.0.0";

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::vector<ScheduleRow> to_rows(const ConvergenceReport& report) {
    std::vector<ScheduleRow> rows;
    rows.reserve(report.cells.size());
    for (const auto& c : report.cells) {
        ScheduleRow r;
        r.p = c.p;
        r.m = c.m;
        r.n = c.n;
        r.y0 = c.y0;
        r.e_supY2 = c.bounds.e_sup_y2;
        r.e_intZ2 = c.bounds.e_int_z2;
        r.e_AT2 = c.bounds.e_a_t2;
        r.e_KT2 = c.bounds.e_k_t2;
        r.gap_vs_oracle = c.gap_vs_oracle;
        r.mono_viol_m = c.mono_viol_m;
        r.mono_viol_n = c.mono_viol_n;
        rows.push_back(r);
    }
    return rows;
}

std::vector<std::string> write_reports(const std::vector<ScheduleRow>& schedule,
                                       const std::vector<SkorohodRow>& skorohod,
                                       const std::string& dir, bool csv, bool json_fmt,
                                       const std::string& config_hash,
                                       const std::string& extra_json_name,
                                       const std::string& extra_json_body) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);

    std::vector<std::string> written;

    if (csv) {
        std::string body =
            "p,m,n,y0,e_supY2,e_intZ2,e_AT2,e_KT2,gap_vs_oracle,mono_viol_m,mono_viol_n\n";
        for (const auto& r : schedule) {
            body += std::to_string(r.p) + "," + fmt(r.m) + "," + fmt(r.n) + "," + fmt(r.y0) +
                    "," + fmt(r.e_supY2) + "," + fmt(r.e_intZ2) + "," + fmt(r.e_AT2) + "," +
                    fmt(r.e_KT2) + "," + fmt(r.gap_vs_oracle) + "," +
                    std::to_string(r.mono_viol_m) + "," + std::to_string(r.mono_viol_n) + "\n";
        }
        write_file(fs::path(dir) / "schedule.csv", body);
        written.push_back("schedule.csv");

        std::string sk = "theta,r_A,r_K\n";
        for (const auto& r : skorohod)
            sk += fmt(r.theta) + "," + fmt(r.r_A) + "," + fmt(r.r_K) + "\n";
        write_file(fs::path(dir) / "skorohod.csv", sk);
        written.push_back("skorohod.csv");
    }

    if (json_fmt) {
        json sched = json::array();
        for (const auto& r : schedule) {
            sched.push_back(json{{"p", r.p},
                                 {"m", r.m},
                                 {"n", r.n},
                                 {"y0", r.y0},
                                 {"e_supY2", r.e_supY2},
                                 {"e_intZ2", r.e_intZ2},
                                 {"e_AT2", r.e_AT2},
                                 {"e_KT2", r.e_KT2},
                                 {"gap_vs_oracle", r.gap_vs_oracle},
                                 {"mono_viol_m", r.mono_viol_m},
                                 {"mono_viol_n", r.mono_viol_n}});
        }
        write_file(fs::path(dir) / "schedule.json", sched.dump(2) + "\n");
        written.push_back("schedule.json");

        json sk = json::array();
        for (const auto& r : skorohod)
            sk.push_back(json{{"theta", r.theta}, {"r_A", r.r_A}, {"r_K", r.r_K}});
        write_file(fs::path(dir) / "skorohod.json", sk.dump(2) + "\n");
        written.push_back("skorohod.json");
    }

    if (!extra_json_name.empty()) {
        write_file(fs::path(dir) / extra_json_name, extra_json_body);
        written.push_back(extra_json_name);
    }

    json manifest{{"config_hash", config_hash},
                  {"tool_version", kToolVersion},
                  {"written_at", iso_now()},
                  {"files", written}};
    write_file(fs::path(dir) / "manifest.json", manifest.dump(2) + "\n");
    written.push_back("manifest.json");
    return written;
}

} // namespace rbsde
