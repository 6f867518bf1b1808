#pragma once

#include "mtt/experiment.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mtt::cli {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// 9 significant digits, shortest of fixed/scientific ("%.9g").
[[nodiscard]] std::string format_number(double value);

/// RFC-4180 quoting, LF line endings. Throws std::runtime_error on I/O failure.
void write_csv(const CsvTable& table, const std::filesystem::path& path);

[[nodiscard]] std::string to_csv_text(const CsvTable& table);

/// step, true_x_i, true_y_i per target, cardinality_est, rmse, card_err[, ospa]
[[nodiscard]] CsvTable metrics_table(const TrackingLog& log, const MetricReport& report);

/// step, true_x_i, true_y_i, true_vx_i, true_vy_i per target
[[nodiscard]] CsvTable truth_table(const Truth& truth);

}  // namespace mtt::cli
