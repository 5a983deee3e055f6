#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spcm/core.hpp"

namespace spcm::io {

/// Shortest decimal that parses back to exactly `v`.
std::string format_double(double v);

/// Comma-separated numeric rows, optional single header row (detected when
/// the first row does not parse as numbers). Blank lines are skipped.
/// Throws DataError naming the row and column of the first bad field.
DataSet parse_csv(std::string_view text, const std::string& source = "<input>");

/// parse_csv on a file. Throws IoError when the file cannot be read.
DataSet read_csv(const std::string& path);

/// Row-major values, `cols` per row.
std::string format_csv(std::span<const double> row_major, std::size_t cols,
                       const std::vector<std::string>& header = {});

std::string format_dataset(const DataSet& x, const std::vector<std::string>& header = {});

/// Writes `content` to `path`. Throws IoError on failure.
void write_file(const std::string& path, std::string_view content);

}  // namespace spcm::io
