#include "cgflab/csv.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cgflab/errors.hpp"

namespace cgflab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    cells.push_back(trim(cell));
  }
  if (!line.empty() && line.back() == ',') {
    cells.push_back("");
  }
  return cells;
}

bool parse_number(const std::string& cell, double* out) {
  if (cell.empty()) {
    return false;
  }
  try {
    std::size_t used = 0;
    *out = std::stod(cell, &used);
    return used == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

[[noreturn]] void cell_error(const std::string& name, std::size_t row,
                             std::size_t col, const std::string& what) {
  std::ostringstream msg;
  msg << name << ": " << what << " at row " << row << ", column " << col;
  throw InputError(msg.str());
}

}  // namespace

CsvTable read_csv_stream(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (rows.empty() && !table.had_header) {
      bool all_numeric = true;
      double ignored = 0.0;
      for (const auto& c : cells) {
        if (!parse_number(c, &ignored)) {
          all_numeric = false;
          break;
        }
      }
      if (!all_numeric) {
        table.header = cells;
        table.had_header = true;
        width = cells.size();
        continue;
      }
    }
    if (width == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      std::ostringstream msg;
      msg << name << ": row " << line_no << " has " << cells.size()
          << " cells, expected " << width;
      throw InputError(msg.str());
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_number(cells[c], &v)) {
        cell_error(name, line_no, c + 1, "cannot parse '" + cells[c] + "'");
      }
      if (!std::isfinite(v)) {
        cell_error(name, line_no, c + 1, "non-finite value");
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw InputError(name + ": no data rows");
  }
  if (!table.had_header) {
    table.header.resize(width);
    for (std::size_t c = 0; c < width; ++c) {
      table.header[c] = "c" + std::to_string(c);
    }
  }
  table.data.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  return read_csv_stream(in, path);
}

CsvTable select_columns(const CsvTable& table, const std::vector<int>& columns) {
  if (columns.empty()) {
    return table;
  }
  CsvTable out;
  out.had_header = table.had_header;
  out.data.resize(table.data.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const int c = columns[k];
    if (c < 0 || c >= table.data.cols()) {
      throw InputError("column index " + std::to_string(c) +
                       " out of range for " + std::to_string(table.data.cols()) +
                       " columns");
    }
    out.data.col(static_cast<Eigen::Index>(k)) = table.data.col(c);
    out.header.push_back(table.header[static_cast<std::size_t>(c)]);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_number(row[c]);
    }
    out << "\n";
  }
}

void write_csv_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot open " + path + " for writing");
  }
  write_csv(out, header, rows);
}

}  // namespace cgflab
