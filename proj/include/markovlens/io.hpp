#pragma once

// Serialization helpers: complex matrices as row-major [re, im] pairs,
// 17-significant-digit floats, CSV tables and atomic file writes.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "markovlens/linalg.hpp"

namespace markovlens::io {

using Json = nlohmann::json;

/// %.17g; non-finite values become "nan", "inf" or "-inf".
std::string format_double(double x);

/// Finite doubles as numbers, anything else as null.
Json number_or_null(double x);

Json matrix_to_json(const Matrix& m);
/// Accepts rows of [re, im] pairs or plain reals. Raises ConfigError.
Matrix matrix_from_json(const Json& j, const std::string& where);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_json(const std::filesystem::path& path, const Json& j);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  /// Cells are pre-formatted; use format_double for numbers.
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace markovlens::io
