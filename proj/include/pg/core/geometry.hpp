#pragma once

#include "pg/core/image.hpp"
#include "pg/core/types.hpp"

#include <vector>

namespace pg::geom {

struct Point2 {
    double x = 0;
    double y = 0;
};

using PointList = std::vector<Point2>;

Point2 centroid(const PointList& pts);

// Andrew monotone chain; returns hull in counter-clockwise order.
PointList convex_hull(PointList pts);

// Scanline fill of a simple polygon (even-odd rule) into a binary plane.
// A pixel belongs to the polygon when its center lies inside.
void fill_polygon(const PointList& poly, img::PlaneU8& plane, std::uint8_t value);

bool point_in_polygon(const PointList& poly, double x, double y);

}  // namespace pg::geom
