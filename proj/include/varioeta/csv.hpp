#pragma once

// CSV output: header row, comma separated, LF line endings, reals with 17
// significant digits so every value round-trips exactly.

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace varioeta {

std::string format_real(double value);

inline std::string csv_cell(double value) { return format_real(value); }
inline std::string csv_cell(const std::string& value) { return value; }
inline std::string csv_cell(const char* value) { return value; }
template <std::integral T>
std::string csv_cell(T value) {
  return std::to_string(value);
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  template <typename... Cells>
  void add(const Cells&... cells) {
    add_row({csv_cell(cells)...});
  }
  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  std::string to_string() const;
  /// Raises ErrorCode::io when the file cannot be written.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace varioeta
