#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bistress/errors.hpp"

namespace bistress {

inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

// One identity/property check. `statement` spells out the law being tested;
// lower-bound checks (quantities that must stay away from zero) store the
// shortfall max(0, required - value) as their residual.
struct CheckRecord {
    std::string id;
    std::string statement;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string verdict;  // "pass" | "fail" | "inconclusive"

    bool passed() const { return verdict == "pass"; }
};

bool operator==(const CheckRecord& a, const CheckRecord& b);

struct EntrySpec {
    std::string name;
    std::map<std::string, double> params;
};

// Parses "name" or "name:k=v,k=v".
EntrySpec parse_entry_spec(const std::string& text);
std::string entry_spec_to_string(const EntrySpec& spec);

struct SuiteConfig {
    std::string suite = "all";
    std::vector<EntrySpec> entries;           // empty = suite defaults
    int mesh_resolution = 0;                  // 0 = per-entry defaults; else >= 8
    std::map<std::string, double> tolerances; // overrides by name
    std::uint64_t seed = 20240817;
    std::string format = "text";
    int points = 0;                           // 0 = suite default sample count

    void validate() const;
    double tol(const std::string& name) const;
};

// Default tolerance registry (names are part of the CLI contract).
const std::map<std::string, double>& default_tolerances();

struct RunReport {
    int schema_version = kReportSchemaVersion;
    std::string engine_version = kEngineVersion;
    SuiteConfig config;
    std::vector<CheckRecord> checks;
    double wall_time_seconds = 0.0;

    bool all_passed() const;
    bool any_inconclusive() const;
    // 0 all pass, 1 any fail, 3 inconclusive only.
    int exit_code() const;
};

// Equality ignores wall time: reports are deterministic per config.
bool operator==(const RunReport& a, const RunReport& b);

std::string to_json(const RunReport& report);
RunReport report_from_json(const std::string& json_text);
std::string to_text(const RunReport& report);

// Flat key=value lines or a JSON object; see the README for the format.
SuiteConfig parse_config_file(const std::string& content);

}  // namespace bistress
