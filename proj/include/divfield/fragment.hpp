#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "divfield/errors.hpp"
#include "divfield/lattice.hpp"

namespace divfield {

// Largest edge value is 4^n - 2^(n+1); past n = 31 it no longer fits in int64.
inline constexpr int kMaxLevel = 31;
// Materialized fragments need O(4^n) memory; larger levels go through
// RecursiveFragment.
inline constexpr int kMaxMaterializedLevel = 13;

inline void check_level(int n, int min_level = 1, int max_level = kMaxLevel) {
  if (n < min_level || n > max_level) {
    throw BoundsError("level " + std::to_string(n) + " outside [" + std::to_string(min_level) +
                      ", " + std::to_string(max_level) +
                      "]; levels above 31 overflow 64-bit edge values");
  }
}

/// Side length 2^n - 1 of the level-n fragment.
constexpr std::int64_t fragment_side(int n) { return (std::int64_t{1} << n) - 1; }

/// |divergence| at the root, (2^n - 1)^2 - 1 = 4^n - 2^(n+1).
constexpr std::int64_t root_outflow(int n) {
  const std::int64_t s = fragment_side(n);
  return s * s - 1;
}

/// Bottom-middle vertex of the level-n grid.
constexpr Vertex fragment_root(int n) { return {(fragment_side(n) - 1) / 2, 0}; }

/// Source of per-edge fragment flows in local coordinates [0, side)^2.
/// east(x, y) is the flow (x,y)->(x+1,y) and north(x, y) the flow
/// (x,y)->(x,y+1); both are 0 off the tree and outside the grid.
template <class S>
concept FragmentSource = requires(const S& s, std::int64_t x, std::int64_t y) {
  { s.level() } -> std::convertible_to<int>;
  { s.side() } -> std::convertible_to<std::int64_t>;
  { s.east(x, y) } -> std::convertible_to<std::int64_t>;
  { s.north(x, y) } -> std::convertible_to<std::int64_t>;
};

/// Sparse edge map used for patches of a fragment.
using Patch = std::map<EdgeId, std::int64_t>;

/// Level-n spanning tree of the (2^n-1)^2 grid together with its unique flow
/// of divergence +1 at every non-root vertex.
class Fragment {
 public:
  static constexpr std::uint8_t kNoParent = 0xff;

  int level() const { return level_; }
  std::int64_t side() const { return side_; }
  Vertex root() const { return root_; }

  bool contains(Vertex v) const { return v.x >= 0 && v.y >= 0 && v.x < side_ && v.y < side_; }

  std::int64_t east(std::int64_t x, std::int64_t y) const {
    if (x < 0 || y < 0 || x + 1 >= side_ || y >= side_) return 0;
    return east_[index(x, y)];
  }
  std::int64_t north(std::int64_t x, std::int64_t y) const {
    if (x < 0 || y < 0 || x >= side_ || y + 1 >= side_) return 0;
    return north_[index(x, y)];
  }

  /// Direction byte from v to its parent; kNoParent at the root.
  std::uint8_t parent_direction(Vertex v) const { return parent_[index(v.x, v.y)]; }

  /// Nonzero flows keyed by East/North representative, in lexicographic order.
  Patch tree_flow() const {
    Patch out;
    for (std::int64_t y = 0; y < side_; ++y) {
      for (std::int64_t x = 0; x < side_; ++x) {
        if (const auto e = east(x, y); e != 0) out.emplace(EdgeId{{x, y}, Axis::H}, e);
        if (const auto n = north(x, y); n != 0) out.emplace(EdgeId{{x, y}, Axis::V}, n);
      }
    }
    return out;
  }

  /// Builds the trivial level-1 fragment.
  static Fragment trivial() {
    Fragment f;
    f.level_ = 1;
    f.side_ = 1;
    f.root_ = {0, 0};
    f.parent_.assign(1, kNoParent);
    f.east_.assign(1, 0);
    f.north_.assign(1, 0);
    return f;
  }

  /// Assembles level n+1 from four copies of `prev` around a central cross.
  static Fragment next_level(const Fragment& prev);

 private:
  Fragment() = default;

  std::size_t index(std::int64_t x, std::int64_t y) const {
    return static_cast<std::size_t>(y * side_ + x);
  }

  void compute_flows();

  int level_ = 0;
  std::int64_t side_ = 0;
  Vertex root_;
  std::vector<std::uint8_t> parent_;
  std::vector<std::int64_t> east_;
  std::vector<std::int64_t> north_;
};

/// Invariants of a materialized fragment, gathered in one pass.
struct FragmentCheck {
  int level = 0;
  std::int64_t vertices = 0;
  std::int64_t tree_edges = 0;
  bool spanning_tree = false;     // s^2 - 1 edges, no cycle, one component
  std::int64_t root_divergence = 0;
  std::int64_t bad_vertices = 0;  // non-root vertices with divergence != 1
  std::int64_t max_flow = 0;
  std::int64_t max_flow_edges = 0;
  bool max_on_root_edge = false;

  bool passed() const {
    const bool max_ok = level == 1 ? max_flow == 0 : (max_flow == root_outflow(level) && max_flow_edges == 1 &&
                                                       max_on_root_edge);
    return spanning_tree && bad_vertices == 0 && root_divergence == -root_outflow(level) && max_ok;
  }
};

inline FragmentCheck check_fragment(const Fragment& f) {
  const std::int64_t s = f.side();
  FragmentCheck out;
  out.level = f.level();
  out.vertices = s * s;

  std::vector<std::int64_t> parent(static_cast<std::size_t>(s * s));
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<std::int64_t>(i);
  const auto find = [&parent](std::int64_t v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      auto& p = parent[static_cast<std::size_t>(v)];
      p = parent[static_cast<std::size_t>(p)];
      v = p;
    }
    return v;
  };
  bool acyclic = true;
  std::int64_t components = s * s;
  const Vertex root = f.root();
  for (std::int64_t y = 0; y < s; ++y) {
    for (std::int64_t x = 0; x < s; ++x) {
      const std::int64_t div = f.east(x, y) + f.north(x, y) - f.east(x - 1, y) - f.north(x, y - 1);
      if (Vertex{x, y} == root) {
        out.root_divergence = div;
      } else if (div != 1) {
        ++out.bad_vertices;
      }
      for (Axis axis : {Axis::H, Axis::V}) {
        const std::int64_t v = axis == Axis::H ? f.east(x, y) : f.north(x, y);
        if (v == 0) continue;
        ++out.tree_edges;
        const std::int64_t mag = v < 0 ? -v : v;
        const Vertex head = axis == Axis::H ? Vertex{x + 1, y} : Vertex{x, y + 1};
        if (mag > out.max_flow) {
          out.max_flow = mag;
          out.max_flow_edges = 0;
          out.max_on_root_edge = true;
        }
        if (mag == out.max_flow) {
          ++out.max_flow_edges;
          out.max_on_root_edge = out.max_on_root_edge && (Vertex{x, y} == root || head == root);
        }
        const std::int64_t a = find(y * s + x);
        const std::int64_t b = find(head.y * s + head.x);
        if (a == b) {
          acyclic = false;
        } else {
          parent[static_cast<std::size_t>(a)] = b;
          --components;
        }
      }
    }
  }
  out.spanning_tree = acyclic && components == 1 && out.tree_edges == s * s - 1;
  return out;
}

enum class Quadrant : std::uint8_t { BL, BR, TL, TR };

inline const char* quadrant_name(Quadrant q) {
  static constexpr std::array<const char*, 4> names = {"BL", "BR", "TL", "TR"};
  return names[static_cast<int>(q)];
}

/// Placement of one level-(n-1) copy inside the level-n fragment.
struct CopyDescriptor {
  Quadrant quadrant = Quadrant::BL;
  Vertex offset;
  bool flipped = false;
  OrientedEdge connector;  // copy root -> cross row
};

/// Four copy placements making up level n (n >= 2). Bottom copies are
/// flipped so all four copy roots touch the cross row y = s, s = 2^(n-1)-1.
inline std::array<CopyDescriptor, 4> copy_descriptors(int n) {
  check_level(n, 2);
  const std::int64_t s = fragment_side(n - 1);
  const std::int64_t c = (s - 1) / 2;
  std::array<CopyDescriptor, 4> out;
  const std::array<Quadrant, 4> order = {Quadrant::BL, Quadrant::BR, Quadrant::TL, Quadrant::TR};
  for (std::size_t i = 0; i < 4; ++i) {
    const Quadrant q = order[i];
    const bool right = q == Quadrant::BR || q == Quadrant::TR;
    const bool bottom = q == Quadrant::BL || q == Quadrant::BR;
    const Vertex offset{right ? s + 1 : 0, bottom ? 0 : s + 1};
    const Vertex copy_root = bottom ? Vertex{offset.x + c, s - 1} : Vertex{offset.x + c, s + 1};
    out[i] = {q, offset, bottom, {copy_root, bottom ? Direction::North : Direction::South}};
  }
  return out;
}

inline Fragment Fragment::next_level(const Fragment& prev) {
  check_level(prev.level_ + 1, 2, kMaxMaterializedLevel);
  const std::int64_t s = prev.side_;
  Fragment f;
  f.level_ = prev.level_ + 1;
  f.side_ = 2 * s + 1;
  f.root_ = fragment_root(f.level_);
  const auto cells = static_cast<std::size_t>(f.side_ * f.side_);
  f.parent_.assign(cells, kNoParent);

  const auto dir_byte = [](Direction d) { return static_cast<std::uint8_t>(d); };
  for (const auto& copy : copy_descriptors(f.level_)) {
    for (std::int64_t y = 0; y < s; ++y) {
      for (std::int64_t x = 0; x < s; ++x) {
        std::uint8_t d = prev.parent_[prev.index(x, y)];
        std::int64_t ty = y;
        if (copy.flipped) {
          ty = s - 1 - y;
          if (d == dir_byte(Direction::North)) {
            d = dir_byte(Direction::South);
          } else if (d == dir_byte(Direction::South)) {
            d = dir_byte(Direction::North);
          }
        }
        f.parent_[f.index(copy.offset.x + x, copy.offset.y + ty)] = d;
      }
    }
    f.parent_[f.index(copy.connector.tail.x, copy.connector.tail.y)] = dir_byte(copy.connector.dir);
  }
  // Cross: the row drains toward the centre, the column drains down to the root.
  for (std::int64_t x = 0; x < f.side_; ++x) {
    if (x != s) f.parent_[f.index(x, s)] = dir_byte(x < s ? Direction::East : Direction::West);
  }
  for (std::int64_t y = 1; y < f.side_; ++y) {
    f.parent_[f.index(s, y)] = dir_byte(Direction::South);
  }
  f.parent_[f.index(s, 0)] = kNoParent;
  f.compute_flows();
  return f;
}

// Flow on a tree with unit sources is the subtree size, pushed toward the
// root. One breadth-first order from the root, then sizes accumulated in
// reverse.
inline void Fragment::compute_flows() {
  const auto cells = static_cast<std::size_t>(side_ * side_);
  east_.assign(cells, 0);
  north_.assign(cells, 0);
  std::vector<std::size_t> order;
  order.reserve(cells);
  order.push_back(index(root_.x, root_.y));
  for (std::size_t head = 0; head < order.size(); ++head) {
    const std::int64_t x = static_cast<std::int64_t>(order[head]) % side_;
    const std::int64_t y = static_cast<std::int64_t>(order[head]) / side_;
    for (Direction d : kAllDirections) {
      const Vertex u = Vertex{x, y} + unit_step(d);
      if (!contains(u)) continue;
      // u is a child iff its parent pointer leads back to (x, y).
      if (parent_[index(u.x, u.y)] == static_cast<std::uint8_t>(opposite(d))) {
        order.push_back(index(u.x, u.y));
      }
    }
  }
  std::vector<std::int64_t> subtree(cells, 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::uint8_t d = parent_[*it];
    if (d == kNoParent) continue;
    const std::int64_t x = static_cast<std::int64_t>(*it) % side_;
    const std::int64_t y = static_cast<std::int64_t>(*it) / side_;
    const Vertex p = Vertex{x, y} + unit_step(static_cast<Direction>(d));
    subtree[index(p.x, p.y)] += subtree[*it];
    switch (static_cast<Direction>(d)) {
      case Direction::East: east_[index(x, y)] = subtree[*it]; break;
      case Direction::West: east_[index(p.x, p.y)] = -subtree[*it]; break;
      case Direction::North: north_[index(x, y)] = subtree[*it]; break;
      case Direction::South: north_[index(p.x, p.y)] = -subtree[*it]; break;
    }
  }
}

/// Memoized level-by-level construction. Thread safe; returned fragments are
/// immutable and shared.
class FragmentCache {
 public:
  std::shared_ptr<const Fragment> get(int n) {
    check_level(n, 1, kMaxMaterializedLevel);
    std::lock_guard lock(mutex_);
    if (levels_.empty()) levels_.push_back(std::make_shared<const Fragment>(Fragment::trivial()));
    while (static_cast<int>(levels_.size()) < n) {
      levels_.push_back(std::make_shared<const Fragment>(Fragment::next_level(*levels_.back())));
    }
    return levels_[static_cast<std::size_t>(n - 1)];
  }

  static FragmentCache& global() {
    static FragmentCache cache;
    return cache;
  }

 private:
  std::mutex mutex_;
  std::vector<std::shared_ptr<const Fragment>> levels_;
};

/// Level-n fragment, built through the shared cache.
inline std::shared_ptr<const Fragment> build_fragment(int n) {
  check_level(n);
  if (n > kMaxMaterializedLevel) {
    throw CapacityError("materializing level " + std::to_string(n) + " needs O(4^n) memory; limit is " +
                        std::to_string(kMaxMaterializedLevel) + " (use RecursiveFragment)");
  }
  return FragmentCache::global().get(n);
}

/// Signed flow through e. Both endpoints must lie in the grid.
template <FragmentSource F>
std::int64_t flow(const F& frag, const OrientedEdge& e) {
  const auto inside = [&](Vertex v) {
    return v.x >= 0 && v.y >= 0 && v.x < frag.side() && v.y < frag.side();
  };
  if (!inside(e.tail) || !inside(e.head())) {
    std::ostringstream msg;
    msg << "edge " << e << " leaves the " << frag.side() << "x" << frag.side() << " grid";
    throw BoundsError(msg.str());
  }
  const auto c = canonical(e);
  const Vertex v = c.id.vertex;
  return c.sign * (c.id.axis == Axis::H ? frag.east(v.x, v.y) : frag.north(v.x, v.y));
}

/// Mirror a patch top-to-bottom within a grid of the given height. Vertical
/// edges come back reversed, so their stored values change sign.
inline Patch vertical_flip(const Patch& patch, std::int64_t height) {
  Patch out;
  for (const auto& [id, value] : patch) {
    if (id.axis == Axis::H) {
      out[EdgeId{{id.vertex.x, height - 1 - id.vertex.y}, Axis::H}] = value;
    } else {
      out[EdgeId{{id.vertex.x, height - 2 - id.vertex.y}, Axis::V}] = -value;
    }
  }
  return out;
}

/// Closed-form fragment flow computed by descending the recursion: O(n) per
/// edge, no storage, valid for every level up to kMaxLevel.
class RecursiveFragment {
 public:
  explicit RecursiveFragment(int n) : level_(n), side_(fragment_side(n)) { check_level(n); }

  int level() const { return level_; }
  std::int64_t side() const { return side_; }
  Vertex root() const { return fragment_root(level_); }

  std::int64_t east(std::int64_t x, std::int64_t y) const { return edge(x, y, Axis::H); }
  std::int64_t north(std::int64_t x, std::int64_t y) const { return edge(x, y, Axis::V); }

 private:
  std::int64_t edge(std::int64_t x, std::int64_t y, Axis axis) const {
    std::int64_t sign = 1;
    for (int level = level_; level > 1; --level) {
      const std::int64_t s = fragment_side(level - 1);
      const std::int64_t big = 2 * s + 1;
      const std::int64_t hx = axis == Axis::H ? x + 1 : x;
      const std::int64_t hy = axis == Axis::V ? y + 1 : y;
      if (x < 0 || y < 0 || hx >= big || hy >= big) return 0;
      const std::int64_t c = (s - 1) / 2;

      const auto block = [s](std::int64_t t) { return t < s ? 0 : (t > s ? 1 : -1); };
      const int bx = block(x), by = block(y);
      if (bx >= 0 && by >= 0 && bx == block(hx) && by == block(hy)) {
        x -= bx * (s + 1);
        y -= by * (s + 1);
        if (by == 0) {  // bottom copies are stored upside down
          if (axis == Axis::H) {
            y = s - 1 - y;
          } else {
            y = s - 2 - y;
            sign = -sign;
          }
        }
        continue;
      }

      const std::int64_t copies = 2 * s * s;
      if (axis == Axis::H) {
        if (y != s) return 0;
        if (x < s) return sign * ((x + 1) + (x >= c ? copies : 0));
        return -sign * ((2 * s - x) + (x + 1 <= s + 1 + c ? copies : 0));
      }
      if (x == s) {
        if (y < s) return -sign * (big * big - y - 1);
        return -sign * (2 * s - y);
      }
      if (x == c || x == s + 1 + c) {
        if (y == s - 1) return sign * s * s;
        if (y == s) return -sign * s * s;
      }
      return 0;
    }
    return 0;
  }

  int level_;
  std::int64_t side_;
};

struct ConsistencyMismatch {
  Quadrant quadrant = Quadrant::BL;
  EdgeId edge;  // in level-n coordinates
  std::int64_t expected = 0;
  std::int64_t actual = 0;
};

struct ConsistencyReport {
  int level = 0;
  std::size_t edges_checked = 0;
  std::size_t tree_edges_checked = 0;
  std::vector<ConsistencyMismatch> mismatches;

  bool passed() const { return mismatches.empty(); }
};

/// Checks that each copy region of level n carries exactly the level-(n-1)
/// flow after the copy's flip, edge for edge.
inline ConsistencyReport verify_consistency(int n) {
  check_level(n, 2, kMaxMaterializedLevel);
  const auto big = build_fragment(n);
  const auto small = build_fragment(n - 1);
  const std::int64_t s = small->side();
  const Patch base = small->tree_flow();
  const Patch flipped = vertical_flip(base, s);

  ConsistencyReport report;
  report.level = n;
  for (const auto& copy : copy_descriptors(n)) {
    const Patch& expected = copy.flipped ? flipped : base;
    for (std::int64_t y = 0; y < s; ++y) {
      for (std::int64_t x = 0; x < s; ++x) {
        for (Axis axis : {Axis::H, Axis::V}) {
          if ((axis == Axis::H && x + 1 >= s) || (axis == Axis::V && y + 1 >= s)) continue;
          const EdgeId local{{x, y}, axis};
          const auto it = expected.find(local);
          const std::int64_t want = it == expected.end() ? 0 : it->second;
          const Vertex at = copy.offset + local.vertex;
          const std::int64_t got = axis == Axis::H ? big->east(at.x, at.y) : big->north(at.x, at.y);
          ++report.edges_checked;
          if (want != 0) ++report.tree_edges_checked;
          if (want != got) report.mismatches.push_back({copy.quadrant, {at, axis}, want, got});
        }
      }
    }
  }
  return report;
}

}  // namespace divfield
