#include "collapse/table.hpp"

#include "collapse/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

namespace collapse {

std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(Errc::io_error, "cannot format number");
  return {buf, end};
}

double parse_value(std::string_view text) {
  if (text == "NA") return std::numeric_limits<double>::quiet_NaN();
  if (text == "Inf") return std::numeric_limits<double>::infinity();
  if (text == "-Inf") return -std::numeric_limits<double>::infinity();
  // from_chars also takes "nan" and "inf"; only the sentinels above are valid.
  if (text.find_first_of("nN") != std::string_view::npos) {
    throw Error(Errc::parse_error, "not a number: '" + std::string(text) + "'");
  }
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw Error(Errc::parse_error, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same_optional(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same_value(*a, *b);
}

void check_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") != std::string::npos || field.empty()) {
    throw Error(Errc::io_error, "field '" + field + "' cannot be written unquoted");
  }
}

} // namespace

bool operator==(const ResultRow& a, const ResultRow& b) {
  return a.run_id == b.run_id && a.generation == b.generation && a.metric == b.metric && same_value(a.value, b.value) &&
         same_optional(a.stderr_value, b.stderr_value);
}

bool operator==(const ResultTable& a, const ResultTable& b) { return a.rows == b.rows; }

void ResultTable::add(std::string run_id, std::optional<int> generation, std::string metric, double value,
                      std::optional<double> stderr_value) {
  if (stderr_value && std::isnan(*stderr_value)) stderr_value.reset();
  rows.push_back({std::move(run_id), generation, std::move(metric), value, stderr_value});
}

void ResultTable::add_series(const std::string& run_id, const std::string& metric, const std::vector<double>& values,
                             const std::vector<double>* stderr_values, int first_generation) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::optional<double> se;
    if (stderr_values != nullptr && i < stderr_values->size()) se = (*stderr_values)[i];
    add(run_id, first_generation + static_cast<int>(i), metric, values[i], se);
  }
}

std::string to_csv(const ResultTable& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& row : table.rows) {
    check_field(row.run_id);
    check_field(row.metric);
    out += row.run_id;
    out += ',';
    out += row.generation ? std::to_string(*row.generation) : "NA";
    out += ',';
    out += row.metric;
    out += ',';
    out += format_value(row.value);
    out += ',';
    out += row.stderr_value ? format_value(*row.stderr_value) : "NA";
    out += '\n';
  }
  return out;
}

ResultTable parse_csv(std::string_view text) {
  ResultTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto fail = [&](const std::string& msg) {
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": " + msg);
    };
    if (!header_seen) {
      if (line != kCsvHeader) fail("expected header '" + std::string(kCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) fail("empty line");
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 5) fail("expected 5 fields, got " + std::to_string(cells.size()));
    ResultRow row;
    row.run_id = std::string(cells[0]);
    if (cells[1] != "NA") {
      int g = 0;
      const auto [p, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), g);
      if (ec != std::errc{} || p != cells[1].data() + cells[1].size()) fail("bad generation '" + std::string(cells[1]) + "'");
      row.generation = g;
    }
    row.metric = std::string(cells[2]);
    try {
      row.value = parse_value(cells[3]);
      if (cells[4] != "NA") row.stderr_value = parse_value(cells[4]);
    } catch (const Error& e) {
      fail(e.what());
    }
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(Errc::parse_error, "missing header");
  return table;
}

std::string to_json(const ResultTable& table, std::string_view config_hash, std::string_view config_text) {
  using nlohmann::ordered_json;
  auto number = [](double v) -> ordered_json {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    return v;
  };
  ordered_json doc;
  doc["schema"] = std::string(kCsvHeader);
  doc["config_hash"] = std::string(config_hash);
  doc["config"] = std::string(config_text);
  ordered_json rows = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json r;
    r["run_id"] = row.run_id;
    r["generation"] = row.generation ? ordered_json(*row.generation) : ordered_json(nullptr);
    r["metric"] = row.metric;
    r["value"] = number(row.value);
    r["stderr"] = row.stderr_value ? number(*row.stderr_value) : ordered_json(nullptr);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(1) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(Errc::io_error, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::io_error, "cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace collapse
