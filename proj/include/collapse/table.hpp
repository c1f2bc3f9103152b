#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collapse {

/// Shortest decimal text that parses back to the same double. NaN is "NA",
/// infinities are "Inf" and "-Inf".
std::string format_value(double v);

/// Inverse of format_value. Throws ParseError.
double parse_value(std::string_view text);

/// One long-format row. A missing generation marks a run-level metric; a
/// missing value or standard error is written as NA.
struct ResultRow {
  std::string run_id;
  std::optional<int> generation;
  std::string metric;
  double value = 0.0;
  std::optional<double> stderr_value;

  friend bool operator==(const ResultRow& a, const ResultRow& b);
};

/// Columns: run_id,generation,metric,value,stderr. UTF-8, LF line endings,
/// '.' as the decimal separator, no quoting (run ids and metric names never
/// contain commas, quotes or line breaks).
struct ResultTable {
  std::vector<ResultRow> rows;

  void add(std::string run_id, std::optional<int> generation, std::string metric, double value,
           std::optional<double> stderr_value = std::nullopt);
  /// Adds one row per generation 1 .. values.size().
  void add_series(const std::string& run_id, const std::string& metric, const std::vector<double>& values,
                  const std::vector<double>* stderr_values = nullptr, int first_generation = 1);

  friend bool operator==(const ResultTable& a, const ResultTable& b);
};

inline constexpr std::string_view kCsvHeader = "run_id,generation,metric,value,stderr";

std::string to_csv(const ResultTable& table);
ResultTable parse_csv(std::string_view text);

/// JSON object with the rows; NA becomes null.
std::string to_json(const ResultTable& table, std::string_view config_hash, std::string_view config_text);

/// Writes `content` to `path` via a temporary sibling and a rename, so
/// readers never see a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

} // namespace collapse
