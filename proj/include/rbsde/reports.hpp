#pragma once

#include "rbsde/config.hpp"
#include "rbsde/diagnostics.hpp"
#include "rbsde/runner.hpp"

#include <string>
#include <vector>

namespace rbsde {

struct IoError : Error {
    using Error::Error;
};

/// One row of schedule.csv; field names match the CSV header exactly.
struct ScheduleRow {
    int p = 0;
    double m = 0.0;
    double n = 0.0;
    double y0 = 0.0;
    double e_supY2 = 0.0;
    double e_intZ2 = 0.0;
    double e_AT2 = 0.0;
    double e_KT2 = 0.0;
    double gap_vs_oracle = 0.0;
    long mono_viol_m = 0;
    long mono_viol_n = 0;
};

struct SkorohodRow {
    double theta = 0.0;
    double r_A = 0.0;
    double r_K = 0.0;
};

std::vector<ScheduleRow> to_rows(const ConvergenceReport& report);

/// Writes schedule/skorohod tables in the requested formats plus
/// manifest.json (always, written last). Returns the file names written.
/// CSV and JSON bodies are deterministic; only the manifest carries
/// timestamps.
std::vector<std::string> write_reports(const std::vector<ScheduleRow>& schedule,
                                       const std::vector<SkorohodRow>& skorohod,
                                       const std::string& dir, bool csv, bool json,
                                       const std::string& config_hash,
                                       const std::string& extra_json_name = "",
                                       const std::string& extra_json_body = "");

extern const char* const kToolVersion;

} // namespace rbsde
