#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"

namespace cli {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 150, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (lo == hi) {
      const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void write_svg(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
               const std::string& ylabel, const std::vector<Series>& series) {
  Range xr, yr;
  for (const Series& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.settle();
  yr.settle();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0, fy = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    o << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(kTop + ph + 18) << "\" text-anchor=\"middle\">"
      << num(fx) << "</text>\n";
    o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(fy) + 4) << "\" text-anchor=\"end\">" << num(fy)
      << "</text>\n";
  }
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 16) << "\" text-anchor=\"middle\">"
    << escape(xlabel) << "</text>\n";
  o << "<text transform=\"translate(16," << fmt(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.markers) {
      for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          o << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"2.5\" fill=\""
            << color << "\"/>\n";
    } else {
      std::string pts;
      auto flush = [&] {
        if (!pts.empty())
          o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
            << "\"/>\n";
        pts.clear();
      };
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        pts += (pts.empty() ? "" : " ") + fmt(px(s.x[i])) + "," + fmt(py(s.y[i]));
      }
      flush();
    }
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    o << "<rect x=\"" << fmt(kLeft + pw + 12) << "\" y=\"" << fmt(ly - 9) << "\" width=\"12\" height=\"3\" fill=\""
      << color << "\"/>\n";
    o << "<text x=\"" << fmt(kLeft + pw + 30) << "\" y=\"" << fmt(ly - 4) << "\">" << escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << o.str();
}

}  // namespace cli
