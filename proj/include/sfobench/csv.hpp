#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sfo {

// Shortest-faithful formatting: %.17g round-trips every double exactly.
std::string format_g17(double value);
// Compact formatting for SVG coordinates and human reports.
std::string format_g6(double value);

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& columns);

  void begin_row();
  void cell(double value);
  void cell(long long value);
  void cell(const std::string& value);
  void cell_empty();
  void end_row();

 private:
  std::ostream& os_;
  bool first_ = true;
  void sep();
};

// Minimal reader for the files this tool writes: header line + comma cells,
// no quoting. Empty cells come back as empty strings.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& is);

}  // namespace sfo
