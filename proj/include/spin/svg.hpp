#ifndef SPIN_SVG_HPP_
#define SPIN_SVG_HPP_

#include <string>
#include <utility>
#include <vector>

namespace spin {

// Minimal self-contained SVG chart canvas: fixed viewport, linear scales,
// no external assets.  Coordinates are emitted with fixed precision so the
// output is byte-deterministic.
class SvgCanvas {
 public:
  SvgCanvas(int width, int height);

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0);
  void rect(double x, double y, double w, double h, const std::string& fill);
  void circle(double cx, double cy, double r, const std::string& fill);
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double stroke_width = 1.5);
  void text(double x, double y, const std::string& s, int font_size = 11,
            const std::string& anchor = "start");

  std::string str() const;  // complete <svg> document

  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_, height_;
  std::string body_;
};

// Padded axis range covering [lo, hi]; degenerate spans widen symmetrically.
std::pair<double, double> nice_axis_range(double lo, double hi);

// Maps a value into pixel space.
double scale_to_px(double v, double lo, double hi, double px_lo, double px_hi);

}  // namespace spin

#endif
