#pragma once

namespace twinbeam {

/// Half-open rectangle [x0, x1) x [y0, y1) in superpixel indices.
struct RegionRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool empty() const { return width() <= 0 || height() <= 0; }

  bool contains(int x, int y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  bool contains_point(double x, double y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  bool overlaps(const RegionRect& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }

  bool operator==(const RegionRect&) const = default;
};

}  // namespace twinbeam
