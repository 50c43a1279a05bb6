// Small CSV helpers shared by the sweep tables and the command-line tool.
// Files are comma-separated UTF-8 with a header row and LF line endings;
// floating-point values carry 17 significant digits.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qcs::csv {

/// Shortest-safe round-trip representation (17 significant digits).
std::string format(double value);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index by name; throws if absent.
  std::size_t column(std::string_view name) const;
};

/// Parses a numeric table. Errors name the offending line number.
Table parse(std::string_view text, std::string_view source = "<input>");
Table read(const std::filesystem::path& path);

/// Writes through a temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

std::string render(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

}  // namespace qcs::csv
