#include "varioeta/csv.hpp"

#include <cstdio>
#include <fstream>

#include "varioeta/error.hpp"

namespace varioeta {

std::string format_real(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw Error(ErrorCode::invalid_argument, "CSV row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::string out;
  const auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& row : rows_) line(row);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  const std::string text = to_string();
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  file.close();
  if (!file) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

}  // namespace varioeta
