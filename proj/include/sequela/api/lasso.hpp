#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sequela/projection/projection.hpp"

namespace sequela::api {

using Point = std::pair<double, double>;

/// Even-odd rule; points on an edge or vertex count as inside.
bool point_in_polygon(const Point& p, const std::vector<Point>& polygon);

/// Ids of layout points inside the polygon, sorted. Throws
/// DegeneratePolygon for fewer than 3 vertices.
std::vector<std::string> lasso_select(const projection::Layout& layout, const std::vector<Point>& polygon);

}  // namespace sequela::api
