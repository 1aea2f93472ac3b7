#include "spin/svg.hpp"

#include <cmath>
#include <cstdio>

namespace spin {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

SvgCanvas::SvgCanvas(int width, int height) : width_(width), height_(height) {}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width) {
  body_ += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" +
           px(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + px(stroke_width) + "\"/>\n";
}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill) {
  body_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) + "\" height=\"" +
           px(h) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill) {
  body_ += "<circle cx=\"" + px(cx) + "\" cy=\"" + px(cy) + "\" r=\"" + px(r) + "\" fill=\"" +
           fill + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& stroke, double stroke_width) {
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
           px(stroke_width) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) body_ += " ";
    body_ += px(pts[i].first) + "," + px(pts[i].second);
  }
  body_ += "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, int font_size,
                     const std::string& anchor) {
  body_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"" +
           std::to_string(font_size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
           "\">" + escape(s) + "</text>\n";
}

std::string SvgCanvas::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) +
         "\" height=\"" + std::to_string(height_) + "\" viewBox=\"0 0 " + std::to_string(width_) +
         " " + std::to_string(height_) + "\">\n<rect x=\"0\" y=\"0\" width=\"" +
         std::to_string(width_) + "\" height=\"" + std::to_string(height_) +
         "\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

std::pair<double, double> nice_axis_range(double lo, double hi) {
  if (!(hi >= lo)) {
    const double t = lo;
    lo = hi;
    hi = t;
  }
  double span = hi - lo;
  if (span <= 0.0) span = (std::fabs(lo) > 0.0) ? std::fabs(lo) * 0.1 : 1.0;
  return {lo - 0.05 * span, hi + 0.05 * span};
}

double scale_to_px(double v, double lo, double hi, double px_lo, double px_hi) {
  if (hi == lo) return 0.5 * (px_lo + px_hi);
  return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
}

}  // namespace spin
