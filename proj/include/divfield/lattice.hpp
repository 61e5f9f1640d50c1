#pragma once

#include <array>
#include <compare>
#include <concepts>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>

namespace divfield {

struct Vertex {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr Vertex operator+(Vertex a, Vertex b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vertex operator-(Vertex a, Vertex b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;
};

inline std::ostream& operator<<(std::ostream& os, Vertex v) {
  return os << '(' << v.x << ',' << v.y << ')';
}

enum class Direction : std::uint8_t { East = 0, North = 1, West = 2, South = 3 };

inline constexpr std::array<Direction, 4> kAllDirections = {Direction::East, Direction::North,
                                                            Direction::West, Direction::South};

constexpr Vertex unit_step(Direction d) {
  switch (d) {
    case Direction::East: return {1, 0};
    case Direction::North: return {0, 1};
    case Direction::West: return {-1, 0};
    case Direction::South: return {0, -1};
  }
  return {0, 0};
}

constexpr Direction opposite(Direction d) {
  return static_cast<Direction>((static_cast<std::uint8_t>(d) + 2) % 4);
}

inline char direction_letter(Direction d) { return "ENWS"[static_cast<int>(d)]; }

struct OrientedEdge {
  Vertex tail;
  Direction dir = Direction::East;

  constexpr Vertex head() const { return tail + unit_step(dir); }

  /// The same edge translated by t.
  constexpr OrientedEdge translated(Vertex t) const { return {tail + t, dir}; }

  friend constexpr auto operator<=>(const OrientedEdge&, const OrientedEdge&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const OrientedEdge& e) {
  return os << e.tail << "->" << e.head();
}

constexpr OrientedEdge reverse_edge(const OrientedEdge& e) { return {e.head(), opposite(e.dir)}; }

enum class Axis : std::uint8_t { H = 0, V = 1 };

inline char axis_letter(Axis a) { return a == Axis::H ? 'h' : 'v'; }

/// Storage key of an undirected edge: the lower-left endpoint plus its axis.
struct EdgeId {
  Vertex vertex;
  Axis axis = Axis::H;

  constexpr OrientedEdge positive() const {
    return {vertex, axis == Axis::H ? Direction::East : Direction::North};
  }
  friend constexpr auto operator<=>(const EdgeId&, const EdgeId&) = default;
};

struct CanonicalEdge {
  EdgeId id;
  int sign = 1;
  friend constexpr bool operator==(const CanonicalEdge&, const CanonicalEdge&) = default;
};

constexpr CanonicalEdge canonical(const OrientedEdge& e) {
  switch (e.dir) {
    case Direction::East: return {{e.tail, Axis::H}, +1};
    case Direction::North: return {{e.tail, Axis::V}, +1};
    case Direction::West: return {{e.head(), Axis::H}, -1};
    case Direction::South: return {{e.head(), Axis::V}, -1};
  }
  return {};
}

/// Anything that assigns an integer to every oriented edge of Z^2.
template <class F>
concept EdgeField = requires(const F& f, const OrientedEdge& e) {
  { f.value(e) } -> std::convertible_to<std::int64_t>;
};

/// Sum of the field over the four edges leaving v.
template <EdgeField F>
std::int64_t divergence(const F& f, Vertex v) {
  std::int64_t total = 0;
  for (Direction d : kAllDirections) total += f.value(OrientedEdge{v, d});
  return total;
}

/// Identically zero field.
struct ZeroField {
  std::int64_t value(const OrientedEdge&) const { return 0; }
};

/// Finitely supported field stored on East/North representatives.
class SparseField {
 public:
  SparseField() = default;

  /// Sets the value of e (and therefore -value on its reversal).
  void set(const OrientedEdge& e, std::int64_t value) {
    const auto c = canonical(e);
    if (value == 0) {
      values_.erase(c.id);
    } else {
      values_[c.id] = c.sign * value;
    }
  }

  std::int64_t value(const OrientedEdge& e) const {
    const auto c = canonical(e);
    const auto it = values_.find(c.id);
    return it == values_.end() ? 0 : c.sign * it->second;
  }

  const std::map<EdgeId, std::int64_t>& entries() const { return values_; }

 private:
  std::map<EdgeId, std::int64_t> values_;
};

}  // namespace divfield
