#include "sequela/api/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "sequela/error.hpp"

namespace sequela::api {

namespace {

bool on_segment(const Point& p, const Point& a, const Point& b) {
  const double cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
  const double scale = std::max({std::abs(b.first - a.first), std::abs(b.second - a.second), 1.0});
  if (std::abs(cross) > 1e-12 * scale * scale) return false;
  return p.first >= std::min(a.first, b.first) && p.first <= std::max(a.first, b.first) &&
         p.second >= std::min(a.second, b.second) && p.second <= std::max(a.second, b.second);
}

}  // namespace

bool point_in_polygon(const Point& p, const std::vector<Point>& poly) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if (on_segment(p, a, b)) return true;
    if ((a.second > p.second) != (b.second > p.second)) {
      const double x = a.first + (p.second - a.second) * (b.first - a.first) / (b.second - a.second);
      if (p.first < x) inside = !inside;
    }
  }
  return inside;
}

std::vector<std::string> lasso_select(const projection::Layout& layout, const std::vector<Point>& polygon) {
  if (polygon.size() < 3) {
    throw DegeneratePolygon("polygon needs at least 3 vertices, got " + std::to_string(polygon.size()));
  }
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < layout.coords.rows(); ++i) {
    if (point_in_polygon({layout.coords(i, 0), layout.coords(i, 1)}, polygon)) {
      out.push_back(layout.row_ids[static_cast<std::size_t>(i)]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sequela::api
