#pragma once

// Result tables, RFC 4180 CSV, the JSON run manifest and gnuplot scripts.
// Files are named <run_id>-<stage>-<table>.csv; the manifest is
// manifest.json in the output directory.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mfl {

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Table() = default;
  Table(std::string name, std::vector<std::string> header);
  void add(std::vector<std::string> row);
};

// Shortest round-trip representation; "nan", "inf" and "-inf" spelled out.
std::string cell(double x);
std::string cell(long long x);
inline std::string cell(int x) { return cell(static_cast<long long>(x)); }
inline std::string cell(std::size_t x) { return cell(static_cast<long long>(x)); }
inline std::string cell(const char* s) { return s; }
inline std::string cell(const std::string& s) { return s; }
inline std::string cell(bool b) { return b ? "true" : "false"; }

std::string csv_escape(const std::string& field);
std::string to_csv(const Table& table);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct PlotSpec {
  std::string table;
  std::string x;
  std::vector<std::string> y;
  bool logscale = false;
};

struct ExperimentReport {
  std::string stage;
  std::vector<Table> tables;
  std::vector<Check> checks;
  std::map<std::string, double> metrics;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<PlotSpec> plots;

  bool passed() const;
  Table* table(const std::string& name);
};

struct EmittedFile {
  std::string name;
  std::uint32_t crc32 = 0;
  std::uintmax_t bytes = 0;
};

std::uint32_t crc32_of(const std::string& bytes);

struct EmitOptions {
  std::string run_id = "run";
  std::string config_text;
  double wall_seconds = 0.0;
};

// Writes all tables, the plot script (when plots are declared) and
// manifest.json. Throws std::runtime_error naming the path on I/O failure.
std::vector<EmittedFile> emit_outputs(const ExperimentReport& report,
                                      const std::filesystem::path& dir,
                                      const EmitOptions& options);

std::string artifact_version();

}  // namespace mfl
