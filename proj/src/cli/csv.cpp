#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "spcm/error.hpp"
#include "spcm/io.hpp"

namespace spcm::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

DataSet parse_csv(std::string_view text, const std::string& source) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first = true;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto fields = split(line);
    std::vector<double> row(fields.size());
    std::size_t bad = fields.size();
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_number(fields[c], row[c])) {
        bad = c;
        break;
      }
    }
    if (first) {
      first = false;
      cols = fields.size();
      if (bad != fields.size()) continue;  // header
    }
    if (fields.size() != cols) {
      throw DataError(source + ": row " + std::to_string(rows) + " (line " + std::to_string(line_no) + ") has " +
                      std::to_string(fields.size()) + " fields, expected " + std::to_string(cols));
    }
    if (bad != fields.size()) {
      throw DataError(source + ": row " + std::to_string(rows) + " (line " + std::to_string(line_no) + "), column " +
                      std::to_string(bad) + ": '" + std::string(fields[bad]) + "' is not a number");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!std::isfinite(row[c])) {
        throw DataError(source + ": row " + std::to_string(rows) + " (line " + std::to_string(line_no) +
                        "), column " + std::to_string(c) + " is not finite");
      }
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw DataError(source + ": no data rows");
  return DataSet(rows, cols, values);
}

DataSet read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return parse_csv(buf.str(), path);
}

std::string format_csv(std::span<const double> row_major, std::size_t cols, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  if (!header.empty()) out += '\n';
  for (std::size_t k = 0; k < row_major.size(); ++k) {
    out += format_double(row_major[k]);
    out += (k + 1) % cols == 0 ? '\n' : ',';
  }
  return out;
}

std::string format_dataset(const DataSet& x, const std::vector<std::string>& header) {
  std::vector<double> rows(x.size() * x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t q = 0; q < x.dims(); ++q) rows[i * x.dims() + q] = x.coord(i, q);
  }
  return format_csv(rows, x.dims(), header);
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace spcm::io
