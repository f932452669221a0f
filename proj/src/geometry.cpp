#include "pg/core/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace pg::geom {

Point2 centroid(const PointList& pts) {
    Point2 c;
    for (const auto& p : pts) {
        c.x += p.x;
        c.y += p.y;
    }
    if (!pts.empty()) {
        c.x /= static_cast<double>(pts.size());
        c.y /= static_cast<double>(pts.size());
    }
    return c;
}

namespace {
double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}
}  // namespace

PointList convex_hull(PointList pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point2& a, const Point2& b) {
                              return a.x == b.x && a.y == b.y;
                          }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    PointList hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

bool point_in_polygon(const PointList& poly, double x, double y) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = poly[i];
        const Point2& b = poly[j];
        if ((a.y > y) != (b.y > y)) {
            double t = (y - a.y) / (b.y - a.y);
            if (x < a.x + t * (b.x - a.x)) inside = !inside;
        }
    }
    return inside;
}

void fill_polygon(const PointList& poly, img::PlaneU8& plane, std::uint8_t value) {
    if (poly.size() < 3) return;
    double ymin = poly[0].y, ymax = poly[0].y;
    for (const auto& p : poly) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    Index y0 = std::max<Index>(0, static_cast<Index>(std::floor(ymin)));
    Index y1 = std::min<Index>(plane.height - 1, static_cast<Index>(std::ceil(ymax)));
    std::vector<double> xs;
    for (Index y = y0; y <= y1; ++y) {
        double cy = static_cast<double>(y) + 0.5;
        xs.clear();
        const std::size_t n = poly.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point2& a = poly[i];
            const Point2& b = poly[j];
            if ((a.y > cy) != (b.y > cy)) {
                double t = (cy - a.y) / (b.y - a.y);
                xs.push_back(a.x + t * (b.x - a.x));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
            Index xa = std::max<Index>(0, static_cast<Index>(std::ceil(xs[i] - 0.5)));
            Index xb = std::min<Index>(plane.width - 1,
                                       static_cast<Index>(std::floor(xs[i + 1] - 0.5)));
            for (Index x = xa; x <= xb; ++x) plane.at(x, y) = value;
        }
    }
}

}  // namespace pg::geom
