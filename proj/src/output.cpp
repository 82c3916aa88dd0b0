#include "mfl/output.hpp"

#include <boost/crc.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mfl {

Table::Table(std::string name_, std::vector<std::string> header_)
    : name(std::move(name_)), header(std::move(header_)) {}

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw std::logic_error("Table " + name + ": row width does not match header");
  rows.push_back(std::move(row));
}

std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string cell(long long x) { return std::to_string(x); }

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const Table& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(row[i]);
    }
    out += "\r\n";
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

bool ExperimentReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

Table* ExperimentReport::table(const std::string& name) {
  for (auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

std::uint32_t crc32_of(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::string artifact_version() { return "1.0.0"; }

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string gnuplot_script(const ExperimentReport& report, const std::string& prefix) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set terminal pngcairo size 900,600\n";
  int i = 0;
  for (const auto& p : report.plots) {
    const std::string file = prefix + p.table + ".csv";
    os << "\nset output '" << prefix << "plot" << i++ << ".png'\n";
    os << (p.logscale ? "set logscale xy\n" : "unset logscale\n");
    os << "set xlabel '" << p.x << "'\nplot ";
    for (std::size_t k = 0; k < p.y.size(); ++k) {
      if (k) os << ", ";
      os << "'" << file << "' using '" << p.x << "':'" << p.y[k] << "' with linespoints";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace

std::vector<EmittedFile> emit_outputs(const ExperimentReport& report,
                                      const std::filesystem::path& dir,
                                      const EmitOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  const std::string prefix = options.run_id + "-" + report.stage + "-";
  std::vector<EmittedFile> files;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    files.push_back({name, crc32_of(content), content.size()});
  };
  for (const auto& t : report.tables) emit(prefix + t.name + ".csv", to_csv(t));
  if (!report.plots.empty()) emit(prefix + "plot.gp", gnuplot_script(report, prefix));

  nlohmann::ordered_json m;
  m["artifact_version"] = artifact_version();
  m["run_id"] = options.run_id;
  m["stage"] = report.stage;
  m["config"] = options.config_text;
  m["wall_clock_seconds"] = options.wall_seconds;
  m["seeds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.seeds) m["seeds"][k] = v;
  m["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", f.crc32);
    m["files"].push_back({{"name", f.name}, {"crc32", hex}, {"bytes", f.bytes}});
  }
  m["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metrics) {
    if (std::isfinite(v)) m["metrics"][k] = v;
    else m["metrics"][k] = cell(v);
  }
  m["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks)
    m["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  m["passed"] = report.passed();
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  return files;
}

}  // namespace mfl
