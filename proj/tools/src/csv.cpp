#include "mtt/cli/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mtt::cli {

namespace {

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void append_row(std::string& text, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) text += ',';
        text += quote(row[i]);
    }
    text += '\n';
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string to_csv_text(const CsvTable& table) {
    std::string text;
    append_row(text, table.header);
    for (const auto& row : table.rows) append_row(text, row);
    return text;
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    const auto text = to_csv_text(table);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

CsvTable metrics_table(const TrackingLog& log, const MetricReport& report) {
    if (report.steps.size() != log.steps.size()) throw std::invalid_argument("metrics_table: step count mismatch");
    const bool with_ospa = !report.steps.empty() && report.steps.front().ospa.has_value();

    CsvTable table;
    table.header.push_back("step");
    for (int i = 1; i <= log.n_targets; ++i) {
        table.header.push_back("true_x_" + std::to_string(i));
        table.header.push_back("true_y_" + std::to_string(i));
    }
    table.header.insert(table.header.end(), {"cardinality_est", "rmse", "card_err"});
    if (with_ospa) table.header.push_back("ospa");

    for (std::size_t k = 0; k < log.steps.size(); ++k) {
        const auto& rec = log.steps[k];
        const auto& m = report.steps[k];
        std::vector<std::string> row{std::to_string(rec.step)};
        for (const auto& x : rec.truth) {
            row.push_back(format_number(x(kPosX)));
            row.push_back(format_number(x(kPosY)));
        }
        row.push_back(format_number(rec.cardinality_estimate));
        row.push_back(format_number(m.rmse));
        row.push_back(format_number(m.cardinality_error));
        if (with_ospa) row.push_back(format_number(m.ospa.value_or(0.0)));
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable truth_table(const Truth& truth) {
    CsvTable table;
    table.header.push_back("step");
    const std::size_t n = truth.empty() ? 0 : truth.front().size();
    for (std::size_t i = 1; i <= n; ++i) {
        const auto id = std::to_string(i);
        table.header.insert(table.header.end(), {"true_x_" + id, "true_y_" + id, "true_vx_" + id, "true_vy_" + id});
    }
    for (std::size_t k = 0; k < truth.size(); ++k) {
        std::vector<std::string> row{std::to_string(k)};
        for (const auto& x : truth[k]) {
            row.push_back(format_number(x(0)));
            row.push_back(format_number(x(2)));
            row.push_back(format_number(x(1)));
            row.push_back(format_number(x(3)));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace mtt::cli
