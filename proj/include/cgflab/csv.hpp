#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace cgflab {

struct CsvTable {
  std::vector<std::string> header;  // synthesized c0, c1, ... when absent
  Eigen::MatrixXd data;
  bool had_header = false;
};

// Numeric CSV reader.  The first row is taken as a header when any of its
// cells fails to parse as a number; otherwise it is data.  Malformed or
// non-finite cells raise InputError naming row and column (1-based, as in
// the file).
CsvTable read_csv(const std::string& path);
CsvTable read_csv_stream(std::istream& in, const std::string& name);

// Keep only the given columns (by index into the table), in order.
CsvTable select_columns(const CsvTable& table, const std::vector<int>& columns);

// Fixed "%.12g" formatting so identical inputs produce identical bytes.
std::string format_number(double v);
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_csv_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows);

}  // namespace cgflab
