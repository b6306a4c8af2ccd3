#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // dots instead of a polyline
};

// Linear axes only. Non-finite points break the polyline.
void write_svg(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
               const std::string& ylabel, const std::vector<Series>& series);

}  // namespace cli
