#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "divfield/ensemble.hpp"
#include "divfield/errors.hpp"
#include "divfield/fragment.hpp"
#include "divfield/smoothing.hpp"

namespace divfield {

enum class RenderTarget { Fragment, Periodic, Divergence, Smoothed };

inline RenderTarget parse_render_target(const std::string& s) {
  if (s == "fragment") return RenderTarget::Fragment;
  if (s == "periodic") return RenderTarget::Periodic;
  if (s == "divergence") return RenderTarget::Divergence;
  if (s == "smoothed") return RenderTarget::Smoothed;
  throw UsageError("unknown render target '" + s + "'");
}

struct RenderSpec {
  RenderTarget target = RenderTarget::Fragment;
  int level = 2;
  std::optional<Shift> shift;     // default (0, 0)
  std::optional<VertexRect> rect; // default: one fundamental block
  std::string out_path;
  double arrow_scale = 1.0;
  std::string positive_color = "#6baed6";
  std::string root_color = "#de2d26";
  std::string zero_color = "#f7f7f7";
};

inline constexpr std::int64_t kMaxRenderCells = 1'000'000;

namespace detail {

class SvgCanvas {
 public:
  SvgCanvas(const VertexRect& rect, double cell) : rect_(rect), cell_(cell) {
    os_ << std::fixed << std::setprecision(2);
  }

  double px(double x) const { return kMargin + (x - static_cast<double>(rect_.x0)) * cell_; }
  double py(double y) const { return kMargin + (static_cast<double>(rect_.y1) - y) * cell_; }
  double cell() const { return cell_; }
  std::ostringstream& body() { return os_; }

  void arrow(Vertex from, Vertex to, std::int64_t label) {
    // Stop short of the head vertex so the marker stays visible.
    const double fx = px(static_cast<double>(from.x)), fy = py(static_cast<double>(from.y));
    const double tx = px(static_cast<double>(to.x)), ty = py(static_cast<double>(to.y));
    const double ex = fx + 0.78 * (tx - fx), ey = fy + 0.78 * (ty - fy);
    os_ << "<line class=\"arrow\" x1=\"" << fx << "\" y1=\"" << fy << "\" x2=\"" << ex << "\" y2=\"" << ey
        << "\" marker-end=\"url(#head)\"/>\n";
    const double lx = (fx + tx) / 2 + (fy == ty ? 0.0 : 0.12 * cell_);
    const double ly = (fy + ty) / 2 - (fy == ty ? 0.1 * cell_ : 0.0);
    os_ << "<text class=\"label\" x=\"" << lx << "\" y=\"" << ly << "\">" << label << "</text>\n";
  }

  void dot(Vertex v) {
    os_ << "<circle class=\"vertex\" cx=\"" << px(static_cast<double>(v.x)) << "\" cy=\""
        << py(static_cast<double>(v.y)) << "\" r=\"" << 0.07 * cell_ << "\"/>\n";
  }

  void root(Vertex v, std::int64_t div) {
    os_ << "<circle class=\"root\" cx=\"" << px(static_cast<double>(v.x)) << "\" cy=\""
        << py(static_cast<double>(v.y)) << "\" r=\"" << 0.16 * cell_ << "\"/>\n";
    os_ << "<text class=\"root-label\" x=\"" << px(static_cast<double>(v.x)) + 0.2 * cell_ << "\" y=\""
        << py(static_cast<double>(v.y)) + 0.3 * cell_ << "\">" << div << "</text>\n";
  }

  std::string finish(const RenderSpec& spec) const {
    const double w = 2 * kMargin + static_cast<double>(rect_.x1 - rect_.x0) * cell_;
    const double h = 2 * kMargin + static_cast<double>(rect_.y1 - rect_.y0) * cell_;
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
        << w << ' ' << h << "\">\n"
        << "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"8\" refY=\"5\" markerWidth=\"6\" "
           "markerHeight=\"6\" orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs>\n"
        << "<style>.arrow{stroke:#222;stroke-width:" << 0.04 * cell_
        << "}.label{font:" << 0.28 * cell_ << "px sans-serif;fill:#333}.vertex{fill:#555}"
        << ".root{fill:" << spec.root_color << "}.root-label{font:bold " << 0.3 * cell_ << "px sans-serif;fill:"
        << spec.root_color << "}.div-pos{fill:" << spec.positive_color << "}.div-root{fill:" << spec.root_color
        << "}.div-zero{fill:" << spec.zero_color << "}.div-other{fill:#fdae6b}</style>\n"
        << os_.str() << "</svg>\n";
    return out.str();
  }

 private:
  static constexpr double kMargin = 20.0;
  VertexRect rect_;
  double cell_;
  std::ostringstream os_;
};

template <EdgeField F>
void draw_flow(SvgCanvas& canvas, const F& field, const VertexRect& rect) {
  for (std::int64_t y = rect.y0; y <= rect.y1; ++y) {
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) canvas.dot({x, y});
  }
  for (std::int64_t y = rect.y0; y <= rect.y1; ++y) {
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) {
      for (Direction d : {Direction::East, Direction::North}) {
        const OrientedEdge e{{x, y}, d};
        if (!rect.contains(e.head())) continue;
        const std::int64_t v = field.value(e);
        if (v > 0) canvas.arrow(e.tail, e.head(), v);
        if (v < 0) canvas.arrow(e.head(), e.tail, -v);
      }
    }
  }
  for (std::int64_t y = rect.y0; y <= rect.y1; ++y) {
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) {
      const std::int64_t div = divergence(field, {x, y});
      if (div < 0) canvas.root({x, y}, div);
    }
  }
}

template <EdgeField F>
void draw_divergence(SvgCanvas& canvas, const F& field, const VertexRect& rect) {
  std::int64_t deepest = 1;
  for (std::int64_t y = rect.y0; y <= rect.y1; ++y) {
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) deepest = std::max(deepest, -divergence(field, {x, y}));
  }
  const double c = canvas.cell();
  for (std::int64_t y = rect.y0; y <= rect.y1; ++y) {
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) {
      const std::int64_t div = divergence(field, {x, y});
      const char* cls = div == 1 ? "div-pos" : (div < 0 ? "div-root" : (div == 0 ? "div-zero" : "div-other"));
      auto& os = canvas.body();
      os << "<rect class=\"" << cls << "\" x=\"" << canvas.px(static_cast<double>(x) - 0.5) << "\" y=\""
         << canvas.py(static_cast<double>(y) + 0.5) << "\" width=\"" << c << "\" height=\"" << c << '"';
      if (div < 0) {
        os << " fill-opacity=\""
           << 0.35 + 0.65 * static_cast<double>(-div) / static_cast<double>(deepest) << '"';
      }
      os << "><title>" << div << "</title></rect>\n";
    }
  }
}

template <EdgeField F>
void draw_smoothed(SvgCanvas& canvas, const F& field, const VertexRect& rect, double scale) {
  draw_divergence(canvas, field, rect);
  // Quiver at a point off the kink lines inside each unit square.
  double longest = 0.0;
  std::vector<std::pair<ContinuousPoint, SmoothedSample>> samples;
  for (std::int64_t y = rect.y0; y <= rect.y1; ++y) {
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) {
      const ContinuousPoint p{static_cast<double>(x) + 0.25, static_cast<double>(y) + 0.25};
      const auto s = smooth_eval(field, p);
      longest = std::max(longest, std::hypot(s.h, s.v));
      samples.emplace_back(p, s);
    }
  }
  if (longest == 0.0) return;
  for (const auto& [p, s] : samples) {
    if (s.h == 0.0 && s.v == 0.0) continue;
    const double len = 0.45 * scale / longest;
    canvas.body() << "<line class=\"arrow\" x1=\"" << canvas.px(p.x) << "\" y1=\"" << canvas.py(p.y)
                  << "\" x2=\"" << canvas.px(p.x + s.h * len) << "\" y2=\"" << canvas.py(p.y + s.v * len)
                  << "\" marker-end=\"url(#head)\"/>\n";
  }
}

}  // namespace detail

/// Deterministic SVG for the requested view.
inline std::string render_svg_string(const RenderSpec& spec) {
  check_level(spec.level);
  const double cell = 40.0 * spec.arrow_scale;
  if (!(cell > 0.0)) throw UsageError("arrow scale must be positive");

  if (spec.target == RenderTarget::Fragment) {
    const auto frag = build_fragment(spec.level);
    const VertexRect rect = spec.rect.value_or(VertexRect{0, 0, frag->side() - 1, frag->side() - 1});
    if (rect.empty()) throw UsageError("render rectangle is empty");
    if (rect.cells() > kMaxRenderCells) throw CapacityError("render rectangle exceeds 10^6 cells");
    // The fragment on its own: no periodic continuation outside the grid.
    SparseField field;
    for (const auto& [id, value] : frag->tree_flow()) field.set(id.positive(), value);
    detail::SvgCanvas canvas(rect, cell);
    detail::draw_flow(canvas, field, rect);
    return canvas.finish(spec);
  }

  const RecursiveFragment frag(spec.level);
  const PeriodicField<RecursiveFragment> field(frag, spec.shift.value_or(Shift{}));
  const VertexRect rect = spec.rect.value_or(VertexRect{0, 0, frag.side() - 1, frag.side() - 1});
  if (rect.empty()) throw UsageError("render rectangle is empty");
  if (rect.cells() > kMaxRenderCells) throw CapacityError("render rectangle exceeds 10^6 cells");
  detail::SvgCanvas canvas(rect, cell);
  switch (spec.target) {
    case RenderTarget::Periodic: detail::draw_flow(canvas, field, rect); break;
    case RenderTarget::Divergence: detail::draw_divergence(canvas, field, rect); break;
    case RenderTarget::Smoothed: detail::draw_smoothed(canvas, field, rect, spec.arrow_scale); break;
    case RenderTarget::Fragment: break;
  }
  return canvas.finish(spec);
}

inline void render_svg(const RenderSpec& spec) {
  const std::string svg = render_svg_string(spec);
  std::ofstream out(spec.out_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + spec.out_path);
  out << svg;
  if (!out) throw IoError("failed writing " + spec.out_path);
}

}  // namespace divfield
