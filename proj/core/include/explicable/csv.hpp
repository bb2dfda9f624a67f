#ifndef EXPLICABLE_CSV_HPP_
#define EXPLICABLE_CSV_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Minimal delimited-text helpers shared by the file formats. Fields never
// contain the delimiter, so no quoting is supported.
namespace explicable::csv {

struct Line {
  std::size_t number;  // 1-based
  std::vector<std::string> fields;
};

std::vector<std::string> split(std::string_view line, char delim = ',');

/// Splits text into non-blank lines; trailing '\r' is stripped. Lines whose
/// first character is '#' are dropped when skip_comments is set.
std::vector<Line> parse(std::string_view text, char delim = ',', bool skip_comments = false);

double parse_double(const std::string& field, std::size_t line);
long long parse_int(const std::string& field, std::size_t line);
std::size_t parse_index(const std::string& field, std::size_t line);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

std::string join(const std::vector<std::string>& fields, char delim = ',');

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename so readers never see a torn file.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace explicable::csv

#endif  // EXPLICABLE_CSV_HPP_
