#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polyrad/experiments.hpp"

namespace polyrad::io {

inline constexpr int kSchemaVersion = 1;

/// Settings shared by every command; CLI flags override the file.
struct RunConfig {
  std::string command;
  std::filesystem::path output_dir = "polyrad-out";
  std::optional<std::filesystem::path> kernel_cache;
  std::uint64_t seed = 20240611;
  unsigned threads = 0;
  std::optional<double> rel_tol, abs_tol, r_max;

  void apply(IntegrationConfig& cfg) const;
};

struct BisectConfig {
  std::string name = "bisect";
  ProblemSpec spec;
  OriginData origin;
  FreeParam free = FreeParam::B;
  double lo = 0.0, hi = 0.0;
  IntegrationConfig cfg;
  ClassifierConfig classifier;
};

struct RepresentConfig {
  std::string name = "represent";
  int n = 5;
  std::vector<double> q_values;
  double a = 1.0;
  std::pair<double, double> b_bracket{0.1, 2.0};
  std::pair<double, double> c_bracket{-50.0, 0.0};
  IntegrationConfig cfg;
  ClassifierConfig classifier;
};

std::string read_file(const std::filesystem::path& file);

/// Parsers throw Error(ConfigError) with "source:line:col" for syntax errors
/// and "source: field 'path': ..." for schema errors.
SweepPlan parse_sweep_plan(std::string_view text, std::string_view source = "<config>");
BisectConfig parse_bisect_config(std::string_view text, std::string_view source = "<config>");
RepresentConfig parse_represent_config(std::string_view text, std::string_view source = "<config>");

/// Canonical JSON accepted by the matching parser.
std::string to_json(const SweepPlan& plan);
std::string to_json(const BisectConfig& cfg);
std::string to_json(const RepresentConfig& cfg);

struct CheckRecord {
  std::string name;
  std::string status;
  double worst_margin = 0.0;
  double radius = 0.0;

  bool operator==(const CheckRecord&) const = default;
};

/// One JSONL line of a sweep.
struct SweepRecord {
  std::size_t index = 0;
  int n = 0, m = 0, s = 0;
  double q = 0.0, a = 0.0, b = 0.0;
  std::optional<double> c;
  std::string cls;
  double constant = 0.0;
  double exponent = 0.0;
  std::string termination;
  double termination_radius = 0.0;
  std::size_t steps = 0;
  std::vector<CheckRecord> checks;
  std::optional<double> m_inf, log_r_w0, log_r_death, observed;
  std::optional<bool> mass_converged;
  std::string error;

  static SweepRecord from(const CellResult& cell);
  bool operator==(const SweepRecord&) const = default;
};

std::string schema_header(std::string_view kind);
std::string to_jsonl(const SweepRecord& rec);
SweepRecord sweep_record_from_jsonl(std::string_view line);
/// Reads a JSONL file written by write_sweep_outputs, checking the header.
std::vector<SweepRecord> read_sweep_jsonl(const std::filesystem::path& file);

/// Class counts per q, one row per q.
std::string class_summary(const std::vector<SweepRecord>& records);

/// Writes <name>.jsonl, <name>.csv, <name>.dat (plot columns) and <name>-summary.txt.
void write_sweep_outputs(const std::filesystem::path& dir, const std::string& name,
                         const std::vector<SweepRecord>& records);

/// manifest.json: command, effective config, versions and seed.
void write_manifest(const std::filesystem::path& dir, const RunConfig& run, std::string_view config_json);

/// Multi-column whitespace table with '#' header lines.
void write_table(const std::filesystem::path& file, const std::vector<std::string>& header,
                 const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows);

/// Version strings of the library and its dependencies.
std::string version_string();

}  // namespace polyrad::io
