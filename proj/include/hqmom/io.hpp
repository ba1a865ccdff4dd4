#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hqmom/ensemble.hpp"
#include "hqmom/hybrid.hpp"

namespace hqmom {

// Locale-independent double formatting/parsing (std::to_chars/from_chars),
// 17 significant digits so round-trips are exact.
std::string format_double(double v);
double parse_double(const std::string& s);

// Write-temp-then-rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit content digest, hex-encoded.
std::string content_digest(const std::string& content);

// Time-series CSV, header: t,mu10,mu01,mu20,mu11,mu02,mu30,mu21,mu32,mu_pbw,cp
std::string trajectory_to_csv(const TrajectoryRecord& rec);
TrajectoryRecord trajectory_from_csv(const std::string& csv);

std::string hybrid_run_to_csv(const HybridRun& run);

// Header-checked generic CSV of doubles.
std::vector<std::vector<double>> csv_columns(const std::string& csv,
                                             const std::vector<std::string>& expected_header);

inline const char* kTrajectoryHeader = "t,mu10,mu01,mu20,mu11,mu02,mu30,mu21,mu32,mu_pbw,cp";

inline const char* kToolVersion = "0.1.0";

// Reproducibility manifest written next to every produced artifact set.
// Timestamps are omitted when deterministic mode is on (repro subcommand).
std::string make_manifest(const std::string& command, const std::string& config_json,
                          const std::vector<std::pair<std::string, std::string>>& input_digests,
                          bool deterministic);

}  // namespace hqmom
