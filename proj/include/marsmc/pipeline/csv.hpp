#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "marsmc/model.hpp"

namespace marsmc::pipeline {

/// Comma-separated, header row required. A first column whose every data cell
/// is non-numeric (dates) is kept as labels and excluded from the values.
/// Throws DataError naming the line and column of the first bad cell.
SeriesData load_csv(const std::filesystem::path& path);
SeriesData parse_csv(std::istream& in, std::string_view source = "<stream>");

/// Writes values with 17 significant digits; labels (if any) as the first column.
void write_csv(const std::filesystem::path& path, const SeriesData& data);
void write_csv(std::ostream& out, const SeriesData& data);

}  // namespace marsmc::pipeline
