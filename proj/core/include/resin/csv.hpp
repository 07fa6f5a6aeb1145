#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace resin::csv {

// Error raised for malformed rows; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Shortest round-trip decimal form (std::to_chars). All CSV/JSON output in
// the project goes through this so reports are byte-reproducible.
std::string format_double(double v);

std::vector<std::string> split_fields(std::string_view line);

double parse_double(std::string_view s, std::size_t line);
std::int64_t parse_int(std::string_view s, std::size_t line);

// Reads a CSV file, checks the header matches exactly, and returns data rows
// (split fields) paired with their line numbers.
struct Row {
  std::vector<std::string> fields;
  std::size_t line;
};
std::vector<Row> read_rows(const std::string& path,
                           const std::string& expected_header);

// Reads only the header line (for files with variable-width headers).
std::string read_header(const std::string& path);
std::vector<Row> read_rows_any_header(const std::string& path);

}  // namespace resin::csv
