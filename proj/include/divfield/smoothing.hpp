#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "divfield/errors.hpp"
#include "divfield/lattice.hpp"

namespace divfield {

struct ContinuousPoint {
  double x = 0.0;
  double y = 0.0;
};

struct SmoothedSample {
  double h = 0.0;  // horizontal component
  double v = 0.0;  // vertical component
};

/// Indicator of (-0.5, 0.5); 0 on the boundary.
inline double box_kernel(double t) { return std::abs(t) < 0.5 ? 1.0 : 0.0; }

/// box * box = max(0, 1 - |t|).
inline double tri_kernel(double t) {
  const double a = 1.0 - std::abs(t);
  return a > 0.0 ? a : 0.0;
}

/// Lattice field convolved with the indicator of the unit square centred at
/// the origin. An East edge at (i, j) contributes tri(x - i - 0.5) box(y - j)
/// to the horizontal component; North edges likewise with the axes swapped.
template <EdgeField F>
SmoothedSample smooth_eval(const F& field, ContinuousPoint p) {
  const auto cx = static_cast<std::int64_t>(std::floor(p.x));
  const auto cy = static_cast<std::int64_t>(std::floor(p.y));
  SmoothedSample out;
  for (std::int64_t j = cy - 2; j <= cy + 2; ++j) {
    for (std::int64_t i = cx - 2; i <= cx + 2; ++i) {
      const double xi = static_cast<double>(i);
      const double yj = static_cast<double>(j);
      const double wh = tri_kernel(p.x - xi - 0.5) * box_kernel(p.y - yj);
      if (wh != 0.0) out.h += wh * static_cast<double>(field.value({{i, j}, Direction::East}));
      const double wv = box_kernel(p.x - xi) * tri_kernel(p.y - yj - 0.5);
      if (wv != 0.0) out.v += wv * static_cast<double>(field.value({{i, j}, Direction::North}));
    }
  }
  return out;
}

inline bool on_half_integer(double t) {
  const double shifted = t - 0.5;
  return shifted == std::floor(shifted);
}

/// Divergence of the smoothed field: constant on each open unit square,
/// equal to the lattice divergence at the square's centre vertex.
template <EdgeField F>
double smooth_div(const F& field, ContinuousPoint p) {
  if (on_half_integer(p.x) || on_half_integer(p.y)) {
    throw PreconditionError("smoothed divergence is undefined on the half-integer grid lines");
  }
  const Vertex nearest{static_cast<std::int64_t>(std::floor(p.x + 0.5)),
                       static_cast<std::int64_t>(std::floor(p.y + 0.5))};
  return static_cast<double>(divergence(field, nearest));
}

/// Whether [t - h, t + h] avoids every multiple of 1/2.
inline bool stencil_clear(double t, double h) {
  return std::floor(2.0 * (t + h)) < std::ceil(2.0 * (t - h));
}

/// Central-difference divergence of the smoothed field. Both components are
/// affine between kink lines, so this is exact up to roundoff.
template <EdgeField F>
double fd_divergence(const F& field, ContinuousPoint p, double h) {
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  if (!stencil_clear(p.x, h) || !stencil_clear(p.y, h)) {
    throw PreconditionError("finite-difference stencil crosses a kink line");
  }
  const double dh = smooth_eval(field, {p.x + h, p.y}).h - smooth_eval(field, {p.x - h, p.y}).h;
  const double dv = smooth_eval(field, {p.x, p.y + h}).v - smooth_eval(field, {p.x, p.y - h}).v;
  return (dh + dv) / (2.0 * h);
}

struct RasterSample {
  ContinuousPoint point;
  SmoothedSample value;
  std::optional<double> div;  // empty on grid lines
};

/// Samples on the regular grid x0 + i/res, y0 + j/res covering [x0,x1]x[y0,y1].
template <EdgeField F>
std::vector<RasterSample> raster(const F& field, double x0, double y0, double x1, double y1, int res) {
  if (res < 1) throw UsageError("raster resolution must be at least 1");
  if (x1 < x0 || y1 < y0) throw UsageError("raster rectangle is empty");
  const auto nx = static_cast<std::int64_t>(std::floor((x1 - x0) * res)) + 1;
  const auto ny = static_cast<std::int64_t>(std::floor((y1 - y0) * res)) + 1;
  if (nx * ny > 1'000'000) throw CapacityError("raster exceeds 10^6 samples");
  std::vector<RasterSample> out;
  out.reserve(static_cast<std::size_t>(nx * ny));
  for (std::int64_t j = 0; j < ny; ++j) {
    for (std::int64_t i = 0; i < nx; ++i) {
      const ContinuousPoint p{x0 + static_cast<double>(i) / res, y0 + static_cast<double>(j) / res};
      RasterSample s{p, smooth_eval(field, p), std::nullopt};
      if (!on_half_integer(p.x) && !on_half_integer(p.y)) s.div = smooth_div(field, p);
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace divfield
