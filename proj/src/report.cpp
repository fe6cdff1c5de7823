#include "fraclog/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <system_error>

namespace fraclog {

const char* code_version() { return FRACLOG_VERSION; }

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable field_table(const std::string& file, const Grid& grid, double s,
                     const std::vector<std::pair<std::string, Vector>>& fields) {
  CsvTable t;
  t.file = file;
  t.header = {"cell_index", "x"};
  if (grid.dim() == 2) t.header.push_back("y");
  for (const auto& [name, v] : fields) {
    if (static_cast<std::size_t>(v.size()) != grid.size()) throw ValidationError("field_table: grid mismatch in " + name);
    t.header.push_back(name);
  }
  t.header.push_back("d");
  if (!fields.empty()) t.header.push_back(fields.front().first + "/d^s");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    std::vector<std::string> row{std::to_string(i), csv_number(grid.centers[i][0])};
    if (grid.dim() == 2) row.push_back(csv_number(grid.centers[i][1]));
    for (const auto& f : fields) row.push_back(csv_number(f.second[k]));
    row.push_back(csv_number(grid.dist[k]));
    if (!fields.empty()) row.push_back(csv_number(fields.front().second[k] / std::pow(grid.dist[k], s)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

nlohmann::ordered_json report_json(const Report& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["code_version"] = code_version();
  j["command"] = report.command;
  auto& cfg = j["config"] = nlohmann::ordered_json::object();
  for (const auto& k : config_keys()) cfg[k.name] = k.get(report.config);
  j["results"] = report.results;
  auto& files = j["files"] = nlohmann::ordered_json::array();
  for (const auto& t : report.tables) files.push_back(t.file);
  return j;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string csv_body(const Report& report, const CsvTable& t) {
  std::string out = "# fraclog " + std::string(code_version()) + " " + report.command + "\n# config:";
  for (const auto& k : config_keys()) out += " " + k.name + "=" + k.get(report.config);
  out += "\n";
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) out += (c ? "," : "") + cells[c];
    out += "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

}  // namespace

std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto j = report_json(report);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  j["generated_at"] = stamp;
  const auto json_path = out_dir / "report.json";
  write_file(json_path, j.dump(2) + "\n");
  written.push_back(json_path);
  for (const auto& t : report.tables) {
    const auto path = out_dir / t.file;
    write_file(path, csv_body(report, t));
    written.push_back(path);
  }
  return written;
}

}  // namespace fraclog
