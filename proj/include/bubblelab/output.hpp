#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace bubblelab {

/// "%.17g"; non-finite values become "null" in JSON and "nan"/"inf" in CSV.
std::string format_double(double v);

/// Deterministic JSON text: keys in insertion order, doubles at 17 significant digits.
std::string dump_json(const nlohmann::ordered_json& j, int indent = 2);

/// Writes to a temporary sibling file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// RFC-4180 table: CRLF line ends, fields quoted when they contain ',', '"' or line breaks.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(const std::vector<std::string>& fields);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

  static std::string field(double v) { return format_double(v); }
  static std::string field(long long v) { return std::to_string(v); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// git-describe style identifier baked in at configure time.
const char* build_id();

}  // namespace bubblelab
