#include "resin/csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace resin::csv {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  double v;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("bad numeric field '" + std::string(s) + "'", line);
  return v;
}

std::int64_t parse_int(std::string_view s, std::size_t line) {
  std::int64_t v;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("bad integer field '" + std::string(s) + "'", line);
  return v;
}

namespace {

std::vector<Row> read_impl(const std::string& path,
                           const std::string* expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("missing header in " + path, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++lineno;
  if (expected_header && line != *expected_header)
    throw ParseError("expected header '" + *expected_header + "', got '" +
                         line + "' in " + path,
                     1);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back({split_fields(line), lineno});
  }
  return rows;
}

}  // namespace

std::vector<Row> read_rows(const std::string& path,
                           const std::string& expected_header) {
  return read_impl(path, &expected_header);
}

std::string read_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header in " + path, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<Row> read_rows_any_header(const std::string& path) {
  return read_impl(path, nullptr);
}

}  // namespace resin::csv
