#include <fstream>

#include <fmt/format.h>

#include "ebeam/error.hpp"
#include "ebeam/runner.hpp"

namespace ebeam::runner {

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw DomainError("write_csv: header and column count differ");
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (const auto& c : columns)
    if (c.size() != rows) throw DomainError("write_csv: ragged columns in " + path.string());
  std::ofstream out(path);
  if (!out) throw DomainError("write_csv: cannot open " + path.string());
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  std::string line;
  for (std::size_t i = 0; i < rows; ++i) {
    line.clear();
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) line += ',';
      line += fmt::format("{:.15g}", columns[j][i]);
    }
    out << line << '\n';
  }
}

}  // namespace ebeam::runner
