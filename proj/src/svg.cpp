#include "sfobench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfobench/csv.hpp"

namespace sfo {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string LogLogChart::render() const {
  bool any = false;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  for (const Series& s : series)
    for (auto [x, y] : s.points) {
      if (!(x > 0) || !(y > 0) || !std::isfinite(x) || !std::isfinite(y))
        continue;
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = y;
        any = true;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  if (!any) throw std::invalid_argument("chart has no plottable points");
  for (const VerticalMark& m : vmarks)
    if (m.x > 0) {
      xmin = std::min(xmin, m.x);
      xmax = std::max(xmax, m.x);
    }

  double lx0 = std::log2(xmin), lx1 = std::log2(xmax);
  double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
  if (lx1 - lx0 < 1e-9) { lx0 -= 0.5; lx1 += 0.5; }
  if (ly1 - ly0 < 1e-9) { ly0 -= 0.5; ly1 += 0.5; }
  const double xpad = 0.04 * (lx1 - lx0), ypad = 0.06 * (ly1 - ly0);
  lx0 -= xpad; lx1 += xpad; ly0 -= ypad; ly1 += ypad;

  const double left = 78, right = width - 28, top = 46, bottom = height - 58;
  auto px = [&](double x) {
    return left + (std::log2(x) - lx0) / (lx1 - lx0) * (right - left);
  };
  auto py = [&](double y) {
    return bottom - (std::log10(y) - ly0) / (ly1 - ly0) * (bottom - top);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
     << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(0.5 * (left + right)) << "\" y=\"24\" "
        "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << escape(title) << "</text>\n";

  // x ticks at powers of two
  const int ex0 = static_cast<int>(std::ceil(lx0));
  const int ex1 = static_cast<int>(std::floor(lx1));
  const int xstride = std::max(1, (ex1 - ex0) / 12 + ((ex1 - ex0) % 12 ? 1 : 0));
  for (int e = ex0; e <= ex1; e += xstride) {
    const double x = std::ldexp(1.0, e);
    const double gx = px(x);
    os << "<line x1=\"" << fmt(gx) << "\" y1=\"" << fmt(top) << "\" x2=\""
       << fmt(gx) << "\" y2=\"" << fmt(bottom)
       << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << fmt(gx) << "\" y=\"" << fmt(bottom + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << format_g6(x) << "</text>\n";
  }
  // y ticks at powers of ten
  const int ey0 = static_cast<int>(std::ceil(ly0));
  const int ey1 = static_cast<int>(std::floor(ly1));
  for (int e = ey0; e <= ey1; ++e) {
    const double y = std::pow(10.0, e);
    const double gy = py(y);
    os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(gy) << "\" x2=\""
       << fmt(right) << "\" y2=\"" << fmt(gy)
       << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(gy + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">1e" << e << "</text>\n";
  }
  os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
     << fmt(right - left) << "\" height=\"" << fmt(bottom - top)
     << "\" fill=\"none\" stroke=\"#303030\" stroke-width=\"1\"/>\n";
  os << "<text x=\"" << fmt(0.5 * (left + right)) << "\" y=\""
     << fmt(height - 14.0)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">"
     << escape(x_label) << "</text>\n";
  os << "<text x=\"20\" y=\"" << fmt(0.5 * (top + bottom))
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 20 "
     << fmt(0.5 * (top + bottom)) << ")\">" << escape(y_label) << "</text>\n";

  for (const VerticalMark& m : vmarks) {
    if (!(m.x > 0)) continue;
    const double gx = px(m.x);
    os << "<line x1=\"" << fmt(gx) << "\" y1=\"" << fmt(top) << "\" x2=\""
       << fmt(gx) << "\" y2=\"" << fmt(bottom) << "\" stroke=\"" << m.color
       << "\" stroke-width=\"1.2\" stroke-dasharray=\"3,3\"/>\n";
    os << "<text x=\"" << fmt(gx + 4) << "\" y=\"" << fmt(top + 14)
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << m.color
       << "\">" << escape(m.label) << "</text>\n";
  }

  for (const Series& s : series) {
    std::vector<std::pair<double, double>> pts;
    for (auto [x, y] : s.points)
      if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y))
        pts.emplace_back(px(x), py(y));
    if (pts.empty()) continue;
    if (s.draw_line && pts.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color
         << "\" stroke-width=\"1.8\"";
      if (s.dashed) os << " stroke-dasharray=\"7,4\"";
      os << " points=\"";
      for (auto [gx, gy] : pts) os << fmt(gx) << ',' << fmt(gy) << ' ';
      os << "\"/>\n";
    }
    if (s.marker == Marker::Circle) {
      for (auto [gx, gy] : pts)
        os << "<circle cx=\"" << fmt(gx) << "\" cy=\"" << fmt(gy)
           << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    } else if (s.marker == Marker::Cross) {
      for (auto [gx, gy] : pts) {
        os << "<line x1=\"" << fmt(gx - 3.5) << "\" y1=\"" << fmt(gy - 3.5)
           << "\" x2=\"" << fmt(gx + 3.5) << "\" y2=\"" << fmt(gy + 3.5)
           << "\" stroke=\"" << s.color << "\" stroke-width=\"1.6\"/>\n";
        os << "<line x1=\"" << fmt(gx - 3.5) << "\" y1=\"" << fmt(gy + 3.5)
           << "\" x2=\"" << fmt(gx + 3.5) << "\" y2=\"" << fmt(gy - 3.5)
           << "\" stroke=\"" << s.color << "\" stroke-width=\"1.6\"/>\n";
      }
    }
  }

  // legend, top right
  double ly = top + 10;
  for (const Series& s : series) {
    if (s.label.empty()) continue;
    const double lx = right - 190;
    os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\""
       << fmt(lx + 26) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"";
    if (s.dashed) os << " stroke-dasharray=\"7,4\"";
    os << "/>\n";
    os << "<text x=\"" << fmt(lx + 32) << "\" y=\"" << fmt(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.label)
       << "</text>\n";
    ly += 17;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sfo
