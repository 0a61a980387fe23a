#pragma once

#include "inclusive/experiments.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace inclusive {

inline constexpr int kRecordSchemaVersion = 1;

/// Column names of records.csv, in order.
const std::vector<std::string>& record_columns();

/// Header row plus one row per record. Strings are quoted; numbers use the
/// shortest round-trip form. wall_time_ms is written as 0 unless
/// `with_timing` is set, which keeps the file byte-identical across reruns.
void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool with_timing = false);

/// Parses what write_records_csv produced. Throws std::runtime_error naming
/// the offending line.
std::vector<ExperimentRecord> read_records_csv(std::istream& in);

/// Full resolved configuration as the config.json sidecar.
std::string config_json(const ExperimentConfig& cfg, const std::vector<MethodId>& methods,
                        const std::vector<double>& beta_grid, int jobs);

}  // namespace inclusive
