#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace cli {

// 12 significant digits, the precision of the reference tables.
std::string num(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_;
};

struct NumericCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a header column; throws when absent.
  std::size_t column(const std::string& name) const;
};

// Throws std::runtime_error on unreadable files or non-numeric cells.
NumericCsv read_numeric_csv(const std::filesystem::path& path);

// Two-column key,value file as written for fit.csv and params.csv.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

}  // namespace cli
