#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lowalt/errors.hpp"

namespace lowalt {

using Vec2 = Eigen::Vector2d;

// Axis-aligned rectangle, anchored at its lower-left corner.
struct Rect {
  double x{0.0};
  double y{0.0};
  double w{0.0};
  double h{0.0};

  double x_max() const { return x + w; }
  double y_max() const { return y + h; }
  Vec2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }

  // Closed rectangle: the boundary counts as inside.
  bool contains(const Vec2& p) const {
    return p.x() >= x && p.x() <= x_max() && p.y() >= y && p.y() <= y_max();
  }

  bool intersects(const Rect& o) const {
    return x <= o.x_max() && o.x <= x_max() && y <= o.y_max() && o.y <= y_max();
  }

  Rect inflated(double margin) const {
    return {x - margin, y - margin, w + 2.0 * margin, h + 2.0 * margin};
  }
};

// Rectangular operating area [0,X] x [0,Y].
struct AreaSpec {
  double x_size{500.0};
  double y_size{500.0};

  bool contains(const Vec2& p) const {
    return p.x() >= 0.0 && p.x() <= x_size && p.y() >= 0.0 && p.y() <= y_size;
  }
};

inline constexpr double kNoZone = std::numeric_limits<double>::infinity();

// Euclidean distance from a point to a closed rectangle: zero anywhere inside,
// distance to the clamped nearest point otherwise.
inline double dist_point_rect(const Vec2& p, const Rect& r) {
  if (r.w < 0.0 || r.h < 0.0) throw DegenerateGeometry("rect with negative extent");
  const double cx = std::clamp(p.x(), r.x, r.x_max());
  const double cy = std::clamp(p.y(), r.y, r.y_max());
  return std::hypot(p.x() - cx, p.y() - cy);
}

// Distance from an interior point to the nearest edge of the operating area.
inline double dist_to_area_boundary(const Vec2& p, const AreaSpec& a) {
  if (!a.contains(p)) throw OutsideArea("point outside operating area");
  return std::min(std::min(p.x(), a.x_size - p.x()),
                  std::min(p.y(), a.y_size - p.y()));
}

// Minimum distance over a zone list; +inf when the list is empty so callers
// can treat "no zone" as "infinitely far".
inline double min_dist_to_zones(const Vec2& p, const std::vector<Rect>& zones) {
  double best = kNoZone;
  for (const Rect& z : zones) best = std::min(best, dist_point_rect(p, z));
  return best;
}

inline bool inside_any(const Vec2& p, const std::vector<Rect>& zones) {
  for (const Rect& z : zones)
    if (z.contains(p)) return true;
  return false;
}

// Whether segment [a,b] intersects rect r (closed). Slab clipping.
inline bool segment_intersects_rect(const Vec2& a, const Vec2& b, const Rect& r) {
  if (r.contains(a) || r.contains(b)) return true;
  const Vec2 d = b - a;
  double t0 = 0.0, t1 = 1.0;
  for (int axis = 0; axis < 2; ++axis) {
    const double lo = (axis == 0) ? r.x : r.y;
    const double hi = (axis == 0) ? r.x_max() : r.y_max();
    const double p = a[axis], v = d[axis];
    if (std::abs(v) < 1e-300) {
      if (p < lo || p > hi) return false;
    } else {
      double ta = (lo - p) / v;
      double tb = (hi - p) / v;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
  }
  return true;
}

}  // namespace lowalt
