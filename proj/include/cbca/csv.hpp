#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cbca {

// Minimal comma-separated table: no quoting, blank lines skipped, CR stripped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

// Throws InputError naming the file when the header differs from `expected`.
void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path);

// Strict numeric field parse; throws InputError with file/line context.
double parse_double(const std::string& field, const std::filesystem::path& path, std::size_t line);

}  // namespace cbca
