#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdenet {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g, so values round-trip exactly. NaN is written as "nan".
std::string format_number(double v);

/// RFC-4180 field quoting: quoted only when it contains , " CR or LF.
std::string csv_field(std::string_view s);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> lines;  // 1-based source line of each row
};

/// Parses RFC-4180 text (quoted fields, embedded newlines, CRLF). Rows of a
/// different width than the header are an error naming the line.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Strict decimal/scientific parse of a whole field.
double parse_number(std::string_view field, long line, std::string_view column);

}  // namespace pdenet
