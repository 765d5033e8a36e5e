#pragma once

#include <algorithm>
#include <cmath>

namespace msgfem {

/// Axis-aligned rectangle, the only geometry the structured kernel knows.
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 0.0;
    double height = 0.0;

    double x1() const { return x0 + width; }
    double y1() const { return y0 + height; }
    double area() const { return width * height; }
    double cx() const { return x0 + 0.5 * width; }
    double cy() const { return y0 + 0.5 * height; }
    double diam() const { return std::hypot(width, height); }

    bool contains(double x, double y, double tol = 0.0) const {
        return x >= x0 - tol && x <= x1() + tol && y >= y0 - tol && y <= y1() + tol;
    }

    bool contains(const Rect& r, double tol = 0.0) const {
        return r.x0 >= x0 - tol && r.x1() <= x1() + tol && r.y0 >= y0 - tol &&
               r.y1() <= y1() + tol;
    }

    Rect intersect(const Rect& r) const {
        const double ax = std::max(x0, r.x0);
        const double ay = std::max(y0, r.y0);
        const double bx = std::min(x1(), r.x1());
        const double by = std::min(y1(), r.y1());
        return Rect{ax, ay, std::max(0.0, bx - ax), std::max(0.0, by - ay)};
    }

    /// Concentric rectangle scaled by `factor` about the center.
    Rect scaled(double factor) const {
        return Rect{cx() - 0.5 * factor * width, cy() - 0.5 * factor * height,
                    factor * width, factor * height};
    }

    /// Distance from a point to this rectangle (0 inside).
    double distance(double x, double y) const {
        const double dx = std::max({x0 - x, 0.0, x - x1()});
        const double dy = std::max({y0 - y, 0.0, y - y1()});
        return std::hypot(dx, dy);
    }

    /// Distance from an interior point to the boundary (0 outside).
    double interior_distance(double x, double y) const {
        if (!contains(x, y)) return 0.0;
        return std::min(std::min(x - x0, x1() - x), std::min(y - y0, y1() - y));
    }

    bool operator==(const Rect&) const = default;
};

struct Disk {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        return dx * dx + dy * dy <= r * r;
    }

    bool inside(const Rect& rect) const {
        return cx - r >= rect.x0 && cx + r <= rect.x1() && cy - r >= rect.y0 &&
               cy + r <= rect.y1();
    }

    bool overlaps(const Disk& o) const {
        const double dx = cx - o.cx, dy = cy - o.cy;
        const double rr = r + o.r;
        return dx * dx + dy * dy < rr * rr;
    }

    /// True when the circle crosses the rectangle's boundary curve.
    bool intersects_boundary(const Rect& rect) const {
        const double d_out = rect.distance(cx, cy);
        if (d_out > 0.0) return d_out < r;        // center outside: reaches in?
        return rect.interior_distance(cx, cy) < r; // center inside: reaches out?
    }

    bool operator==(const Disk&) const = default;
};

} // namespace msgfem
