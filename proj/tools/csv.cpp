#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace cli {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("csv row width mismatch in " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
  if (!out_) throw std::runtime_error("write failed for " + path_.string());
}

std::size_t NumericCsv::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::runtime_error("missing column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string chomp(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

NumericCsv read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  NumericCsv t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  t.header = split(chomp(line));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong number of cells");
    std::vector<double> row;
    for (const std::string& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || *end != '\0')
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    line = chomp(line);
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    kv[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return kv;
}

}  // namespace cli
