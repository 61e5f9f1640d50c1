#include <random>

#include <gtest/gtest.h>

#include "divfield/lattice.hpp"

namespace divfield {
namespace {

TEST(ReverseEdge, Examples) {
  EXPECT_EQ(reverse_edge({{0, 0}, Direction::East}), (OrientedEdge{{1, 0}, Direction::West}));
  EXPECT_EQ(reverse_edge({{2, 3}, Direction::North}), (OrientedEdge{{2, 4}, Direction::South}));
  const OrientedEdge e{{5, 5}, Direction::West};
  EXPECT_EQ(reverse_edge(reverse_edge(e)), e);
}

TEST(Canonical, Examples) {
  EXPECT_EQ(canonical({{0, 0}, Direction::East}), (CanonicalEdge{{{0, 0}, Axis::H}, +1}));
  EXPECT_EQ(canonical({{1, 0}, Direction::West}), (CanonicalEdge{{{0, 0}, Axis::H}, -1}));
  EXPECT_EQ(canonical({{2, 2}, Direction::South}), (CanonicalEdge{{{2, 1}, Axis::V}, -1}));
}

TEST(Canonical, ReversalSharesIdWithOppositeSign) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<std::int64_t> coord(-1000, 1000);
  for (int i = 0; i < 1000; ++i) {
    const OrientedEdge e{{coord(gen), coord(gen)}, kAllDirections[gen() % 4]};
    const auto a = canonical(e);
    const auto b = canonical(reverse_edge(e));
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.sign, -b.sign);
    EXPECT_EQ(std::abs(e.head().x - e.tail.x) + std::abs(e.head().y - e.tail.y), 1);
    EXPECT_EQ(reverse_edge(reverse_edge(e)), e);
  }
}

TEST(Divergence, SingleEdgeField) {
  SparseField f;
  f.set({{0, 0}, Direction::East}, 1);
  EXPECT_EQ(divergence(f, {0, 0}), 1);
  EXPECT_EQ(divergence(f, {1, 0}), -1);
  EXPECT_EQ(divergence(f, {0, 1}), 0);
}

TEST(Divergence, ZeroField) {
  EXPECT_EQ(divergence(ZeroField{}, {3, -4}), 0);
  EXPECT_EQ(divergence(SparseField{}, {0, 0}), 0);
}

TEST(Divergence, MatchesForwardDifferenceForm) {
  // f(v,v+e1) + f(v,v+e2) - f(v-e1,v) - f(v-e2,v)
  std::mt19937_64 gen(3);
  SparseField f;
  for (int i = 0; i < 60; ++i) {
    f.set({{static_cast<std::int64_t>(gen() % 6), static_cast<std::int64_t>(gen() % 6)}, kAllDirections[gen() % 4]},
          static_cast<std::int64_t>(gen() % 21) - 10);
  }
  for (std::int64_t y = -1; y < 7; ++y) {
    for (std::int64_t x = -1; x < 7; ++x) {
      const std::int64_t expected = f.value({{x, y}, Direction::East}) + f.value({{x, y}, Direction::North}) -
                                    f.value({{x - 1, y}, Direction::East}) - f.value({{x, y - 1}, Direction::North});
      EXPECT_EQ(divergence(f, {x, y}), expected);
    }
  }
}

TEST(SparseField, AntisymmetryAndTelescoping) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    SparseField f;
    const int entries = 1 + static_cast<int>(gen() % 30);
    for (int i = 0; i < entries; ++i) {
      f.set({{static_cast<std::int64_t>(gen() % 8) - 4, static_cast<std::int64_t>(gen() % 8) - 4},
             kAllDirections[gen() % 4]},
            static_cast<std::int64_t>(gen() % 41) - 20);
    }
    std::int64_t total = 0;
    for (std::int64_t y = -6; y <= 6; ++y) {
      for (std::int64_t x = -6; x <= 6; ++x) {
        total += divergence(f, {x, y});
        for (Direction d : kAllDirections) {
          const OrientedEdge e{{x, y}, d};
          EXPECT_EQ(f.value(reverse_edge(e)), -f.value(e));
        }
      }
    }
    EXPECT_EQ(total, 0);
  }
}

TEST(SparseField, SettingZeroErases) {
  SparseField f;
  f.set({{1, 1}, Direction::South}, 4);
  EXPECT_EQ(f.value({{1, 0}, Direction::North}), -4);
  f.set({{1, 0}, Direction::North}, 0);
  EXPECT_TRUE(f.entries().empty());
}

}  // namespace
}  // namespace divfield
