#include "marsmc/pipeline/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "marsmc/errors.hpp"

namespace marsmc::pipeline {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '"')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '"')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  std::string_view v = cell;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  if (v.empty()) return std::nullopt;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SeriesData parse_csv(std::istream& in, std::string_view source) {
  const std::string src(source);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw DataError(src + ": empty file (no header)");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw DataError(src + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()) + " (ragged row)");
    rows.push_back(std::move(cells));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw DataError(src + ": no observations");

  bool label_column = header.size() > 1;
  for (const auto& row : rows) {
    if (parse_number(row[0])) {
      label_column = false;
      break;
    }
  }
  const std::size_t first = label_column ? 1 : 0;
  SeriesData data;
  if (label_column) data.label_header = header[0];
  data.names.assign(header.begin() + static_cast<std::ptrdiff_t>(first), header.end());
  data.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - first));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (label_column) data.labels.push_back(rows[i][0]);
    for (std::size_t j = first; j < header.size(); ++j) {
      const std::string& cell = rows[i][j];
      const std::string where = src + ": line " + std::to_string(row_lines[i]) + ", column " +
                                std::to_string(j + 1) + " ('" + header[j] + "')";
      if (cell.empty()) throw DataError(where + ": missing value");
      const auto v = parse_number(cell);
      if (!v) throw DataError(where + ": cannot parse '" + cell + "' as a number");
      data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - first)) = *v;
    }
  }
  return data;
}

SeriesData load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const SeriesData& data) {
  const bool labels = !data.labels.empty();
  if (labels) out << (data.label_header.empty() ? "date" : data.label_header);
  for (int j = 0; j < data.n(); ++j) {
    if (labels || j > 0) out << ',';
    out << (j < static_cast<int>(data.names.size()) ? data.names[static_cast<std::size_t>(j)]
                                                    : "y" + std::to_string(j + 1));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    if (labels) out << data.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < data.values.cols(); ++j) {
      if (labels || j > 0) out << ',';
      out << format_double(data.values(i, j));
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const SeriesData& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(out, data);
}

}  // namespace marsmc::pipeline
