#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <thread>
#include <vector>

#include "divfield/errors.hpp"
#include "divfield/fragment.hpp"
#include "divfield/lattice.hpp"
#include "divfield/rational.hpp"

namespace divfield {

inline constexpr int kMaxEnumerationLevel = 12;
inline constexpr std::size_t kMaxWindowEdges = 16;

struct Shift {
  std::int64_t a = 0;
  std::int64_t b = 0;
  friend constexpr auto operator<=>(const Shift&, const Shift&) = default;
};

constexpr std::int64_t floor_mod(std::int64_t v, std::int64_t m) {
  const std::int64_t r = v % m;
  return r < 0 ? r + m : r;
}

/// A fragment tiled over Z^2 with blocks anchored at (a + i s, b + j s).
/// Edges between blocks carry 0. Holds a reference to the source, which must
/// outlive the field.
template <FragmentSource Src>
class PeriodicField {
 public:
  PeriodicField(const Src& src, Shift shift) : src_(&src), shift_(shift) {
    const std::int64_t s = src.side();
    if (shift.a < 0 || shift.b < 0 || shift.a >= s || shift.b >= s) {
      throw BoundsError("shift outside [0, " + std::to_string(s) + ")^2");
    }
  }

  const Src& source() const { return *src_; }
  Shift shift() const { return shift_; }

  std::int64_t value(const OrientedEdge& e) const {
    const auto c = canonical(e);
    return c.sign * positive_value(c.id);
  }

  std::int64_t positive_value(const EdgeId& id) const {
    const std::int64_t s = src_->side();
    const std::int64_t lx = floor_mod(id.vertex.x - shift_.a, s);
    const std::int64_t ly = floor_mod(id.vertex.y - shift_.b, s);
    if (id.axis == Axis::H) return lx == s - 1 ? 0 : src_->east(lx, ly);
    return ly == s - 1 ? 0 : src_->north(lx, ly);
  }

 private:
  const Src* src_;
  Shift shift_;
};

template <FragmentSource Src>
std::int64_t field_value(const Src& frag, Shift shift, const OrientedEdge& e) {
  return PeriodicField<Src>(frag, shift).value(e);
}

/// Finite law on the integers with exact rational weights.
class ExactDist {
 public:
  ExactDist() = default;
  explicit ExactDist(std::map<std::int64_t, Rational> atoms) : atoms_(std::move(atoms)) {}

  /// Law of counts[v] / total; zero counts are dropped.
  template <class Count>
  static ExactDist from_counts(const std::map<std::int64_t, Count>& counts, i128 total) {
    std::map<std::int64_t, Rational> atoms;
    for (const auto& [value, count] : counts) {
      if (count != 0) atoms.emplace(value, Rational(static_cast<i128>(count), total));
    }
    return ExactDist(std::move(atoms));
  }

  const std::map<std::int64_t, Rational>& atoms() const { return atoms_; }

  Rational probability(std::int64_t value) const {
    const auto it = atoms_.find(value);
    return it == atoms_.end() ? Rational{} : it->second;
  }

  Rational total() const {
    Rational t;
    for (const auto& [v, p] : atoms_) t += p;
    return t;
  }

  std::int64_t max_abs_value() const {
    std::int64_t m = 0;
    for (const auto& [v, p] : atoms_) m = std::max(m, v < 0 ? -v : v);
    return m;
  }

  friend bool operator==(const ExactDist&, const ExactDist&) = default;

 private:
  std::map<std::int64_t, Rational> atoms_;
};

/// Exact joint law of the field on a finite list of oriented edges.
struct WindowLaw {
  std::vector<OrientedEdge> edges;
  std::map<std::vector<std::int64_t>, Rational> atoms;

  Rational total() const {
    Rational t;
    for (const auto& [v, p] : atoms) t += p;
    return t;
  }

  /// Law of the i-th coordinate.
  ExactDist marginal(std::size_t i) const {
    std::map<std::int64_t, Rational> m;
    for (const auto& [values, p] : atoms) m[values.at(i)] += p;
    return ExactDist(std::move(m));
  }

  friend bool operator==(const WindowLaw&, const WindowLaw&) = default;
};

/// Law of the divergence at any vertex: +1 off the root class, -(s^2 - 1) on
/// it. Closed form, valid for every level.
inline ExactDist div_law(int n) {
  check_level(n);
  const i128 s = fragment_side(n);
  const i128 cells = s * s;
  if (n == 1) return ExactDist({{0, Rational(1)}});
  return ExactDist({{1, Rational(cells - 1, cells)}, {-root_outflow(n), Rational(1, cells)}});
}

/// Divergence law at vertex x obtained by running over all s^2 shifts.
template <FragmentSource Src>
ExactDist div_law_by_shifts(const Src& frag, Vertex x) {
  const std::int64_t s = frag.side();
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t b = 0; b < s; ++b) {
    for (std::int64_t a = 0; a < s; ++a) ++counts[divergence(PeriodicField<Src>(frag, {a, b}), x)];
  }
  return ExactDist::from_counts(counts, static_cast<i128>(s) * s);
}

/// Law of the positively oriented edge of the given axis, read off the
/// fundamental domain: one count per block position.
template <FragmentSource Src>
ExactDist edge_law(const Src& frag, Axis axis) {
  const std::int64_t s = frag.side();
  const PeriodicField<Src> field(frag, {0, 0});
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t y = 0; y < s; ++y) {
    for (std::int64_t x = 0; x < s; ++x) ++counts[field.positive_value({{x, y}, axis})];
  }
  return ExactDist::from_counts(counts, static_cast<i128>(s) * s);
}

inline ExactDist edge_law(int n, Axis axis) {
  check_level(n, 1, kMaxEnumerationLevel);
  return edge_law(*build_fragment(n), axis);
}

/// Law of the field on a fixed oriented edge, running over all shifts.
template <FragmentSource Src>
ExactDist edge_law_by_shifts(const Src& frag, const OrientedEdge& e) {
  const std::int64_t s = frag.side();
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t b = 0; b < s; ++b) {
    for (std::int64_t a = 0; a < s; ++a) ++counts[PeriodicField<Src>(frag, {a, b}).value(e)];
  }
  return ExactDist::from_counts(counts, static_cast<i128>(s) * s);
}

namespace detail {

inline void check_window(const std::vector<OrientedEdge>& edges) {
  if (edges.size() > kMaxWindowEdges) {
    throw CapacityError("window of " + std::to_string(edges.size()) + " edges exceeds limit of " +
                        std::to_string(kMaxWindowEdges));
  }
}

// Counts value tuples over shift rows [b_begin, b_end).
template <FragmentSource Src>
std::map<std::vector<std::int64_t>, std::int64_t> count_window_rows(const Src& frag,
                                                                    const std::vector<OrientedEdge>& edges,
                                                                    std::int64_t b_begin, std::int64_t b_end) {
  const std::int64_t s = frag.side();
  std::map<std::vector<std::int64_t>, std::int64_t> counts;
  std::vector<std::int64_t> values(edges.size());
  for (std::int64_t b = b_begin; b < b_end; ++b) {
    for (std::int64_t a = 0; a < s; ++a) {
      const PeriodicField<Src> field(frag, {a, b});
      for (std::size_t i = 0; i < edges.size(); ++i) values[i] = field.value(edges[i]);
      ++counts[values];
    }
  }
  return counts;
}

}  // namespace detail

/// Joint law of the field on `edges` over the s^2 equiprobable shifts.
/// With workers > 1 the shift rows are split across threads; the merged
/// result does not depend on the split.
template <FragmentSource Src>
WindowLaw window_law(const Src& frag, const std::vector<OrientedEdge>& edges, unsigned workers = 1) {
  detail::check_window(edges);
  const std::int64_t s = frag.side();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::min<std::int64_t>(s, 64)));

  std::vector<std::map<std::vector<std::int64_t>, std::int64_t>> partial(workers);
  if (workers == 1) {
    partial[0] = detail::count_window_rows(frag, edges, 0, s);
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) {
      const std::int64_t lo = s * w / workers;
      const std::int64_t hi = s * (w + 1) / workers;
      threads.emplace_back([&, w, lo, hi] { partial[w] = detail::count_window_rows(frag, edges, lo, hi); });
    }
  }
  std::map<std::vector<std::int64_t>, std::int64_t> counts;
  for (const auto& part : partial) {
    for (const auto& [values, count] : part) counts[values] += count;
  }
  WindowLaw law;
  law.edges = edges;
  const i128 total = static_cast<i128>(s) * s;
  for (const auto& [values, count] : counts) law.atoms.emplace(values, Rational(count, total));
  return law;
}

inline WindowLaw window_law(int n, const std::vector<OrientedEdge>& edges, unsigned workers = 1) {
  check_level(n, 1, kMaxEnumerationLevel);
  detail::check_window(edges);
  return window_law(*build_fragment(n), edges, workers);
}

/// Same law computed by translating the window across the fundamental domain
/// of the unshifted tiling.
template <FragmentSource Src>
WindowLaw window_law_by_positions(const Src& frag, const std::vector<OrientedEdge>& edges) {
  detail::check_window(edges);
  const std::int64_t s = frag.side();
  const PeriodicField<Src> field(frag, {0, 0});
  std::map<std::vector<std::int64_t>, std::int64_t> counts;
  std::vector<std::int64_t> values(edges.size());
  for (std::int64_t ty = 0; ty < s; ++ty) {
    for (std::int64_t tx = 0; tx < s; ++tx) {
      for (std::size_t i = 0; i < edges.size(); ++i) values[i] = field.value(edges[i].translated({tx, ty}));
      ++counts[values];
    }
  }
  WindowLaw law;
  law.edges = edges;
  const i128 total = static_cast<i128>(s) * s;
  for (const auto& [values, count] : counts) law.atoms.emplace(values, Rational(count, total));
  return law;
}

/// Inclusive rectangle of vertices.
struct VertexRect {
  std::int64_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool empty() const { return x1 < x0 || y1 < y0; }
  std::int64_t cells() const { return empty() ? 0 : (x1 - x0 + 1) * (y1 - y0 + 1); }
  bool contains(Vertex v) const { return v.x >= x0 && v.x <= x1 && v.y >= y0 && v.y <= y1; }
};

/// Edge values of one sample of v_n around a rectangle.
struct SampledPatch {
  int level = 0;
  Shift shift;
  VertexRect rect;
  // Every edge touching a vertex of rect, so divergence is available on all of rect.
  SparseField field;
  std::vector<std::pair<EdgeId, std::int64_t>> edges;  // including zeros, in row order
};

/// Uniform index in [0, m) from a 64-bit generator by rejection.
inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t m) {
  const std::uint64_t threshold = (0 - m) % m;  // 2^64 mod m
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= threshold) return r % m;
  }
}

/// Draws a shift uniformly among the s^2 choices and materializes every edge
/// touching rect. Reproducible for a given seed.
inline SampledPatch sample_patch(int n, std::uint64_t seed, const VertexRect& rect) {
  check_level(n);
  if (rect.empty()) throw UsageError("sample rectangle is empty");
  if (rect.cells() > 1'000'000) throw CapacityError("sample rectangle exceeds 10^6 vertices");
  const RecursiveFragment frag(n);
  const auto s = static_cast<std::uint64_t>(frag.side());
  std::mt19937_64 gen(seed);
  const std::uint64_t k = uniform_index(gen, s * s);
  const Shift shift{static_cast<std::int64_t>(k % s), static_cast<std::int64_t>(k / s)};
  const PeriodicField<RecursiveFragment> periodic(frag, shift);

  SampledPatch patch;
  patch.level = n;
  patch.shift = shift;
  patch.rect = rect;
  for (std::int64_t y = rect.y0 - 1; y <= rect.y1; ++y) {
    for (std::int64_t x = rect.x0 - 1; x <= rect.x1; ++x) {
      for (Axis axis : {Axis::H, Axis::V}) {
        const EdgeId id{{x, y}, axis};
        const Vertex head = id.positive().head();
        if (!rect.contains(id.vertex) && !rect.contains(head)) continue;
        const std::int64_t v = periodic.positive_value(id);
        patch.edges.emplace_back(id, v);
        patch.field.set(id.positive(), v);
      }
    }
  }
  return patch;
}

}  // namespace divfield
