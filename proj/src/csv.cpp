#include "sfobench/csv.hpp"

#include <cstdio>
#include <istream>

namespace sfo {

std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_g6(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& columns)
    : os_(os) {
  bool first = true;
  for (const std::string& c : columns) {
    if (!first) os_ << ',';
    os_ << c;
    first = false;
  }
  os_ << '\n';
}

void CsvWriter::begin_row() { first_ = true; }

void CsvWriter::sep() {
  if (!first_) os_ << ',';
  first_ = false;
}

void CsvWriter::cell(double value) {
  sep();
  os_ << format_g17(value);
}

void CsvWriter::cell(long long value) {
  sep();
  os_ << value;
}

void CsvWriter::cell(const std::string& value) {
  sep();
  os_ << value;
}

void CsvWriter::cell_empty() { sep(); }

void CsvWriter::end_row() { os_ << '\n'; }

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (std::getline(is, line)) t.columns = split_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_line(line));
  }
  return t;
}

}  // namespace sfo
