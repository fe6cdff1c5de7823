#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclog/config.hpp"
#include "fraclog/operator.hpp"

namespace fraclog {

inline constexpr int kReportSchemaVersion = 1;

const char* code_version();

struct CsvTable {
  std::string file;  // name inside the output directory
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::string command;
  RunConfig config;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::vector<CsvTable> tables;
};

/// Shortest text that parses back to the same double ("nan", "inf" for non-finite).
std::string csv_number(double v);

/// Per-cell table: cell_index, x (, y), one column per field, d, and field/d^s
/// for the first field.
CsvTable field_table(const std::string& file, const Grid& grid, double s,
                     const std::vector<std::pair<std::string, Vector>>& fields);

/// Writes report.json and every table; returns the paths written.
/// Only report.json carries a timestamp, so CSV bodies are reproducible.
std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& out_dir);

/// The JSON document write_report would emit, without the timestamp.
nlohmann::ordered_json report_json(const Report& report);

}  // namespace fraclog
