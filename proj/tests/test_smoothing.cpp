#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "divfield/ensemble.hpp"
#include "divfield/smoothing.hpp"

namespace divfield {
namespace {

SparseField intro_field() {
  SparseField f;
  f.set({{0, 0}, Direction::East}, 1);
  return f;
}

TEST(SmoothEval, IntroProfile) {
  const auto f = intro_field();
  EXPECT_DOUBLE_EQ(smooth_eval(f, {0.5, 0.0}).h, 1.0);
  for (double x = -1.0; x <= 2.0; x += 0.0625) {
    for (double y : {-0.49, -0.2, 0.0, 0.3, 0.49}) {
      const double expected = std::abs(x - 0.5) < 1.0 ? 1.0 - std::abs(x - 0.5) : 0.0;
      EXPECT_NEAR(smooth_eval(f, {x, y}).h, expected, 1e-12) << x << "," << y;
      EXPECT_EQ(smooth_eval(f, {x, y}).v, 0.0);
    }
  }
  // |y| >= 0.5: outside the support.
  EXPECT_EQ(smooth_eval(f, {0.5, 0.5}).h, 0.0);
  EXPECT_EQ(smooth_eval(f, {0.5, -0.7}).h, 0.0);
}

TEST(SmoothEval, FarPointAndZeroField) {
  const auto f = intro_field();
  const auto s = smooth_eval(f, {2.0, 0.0});
  EXPECT_EQ(s.h, 0.0);
  EXPECT_EQ(s.v, 0.0);
  const auto z = smooth_eval(ZeroField{}, {0.3, -4.2});
  EXPECT_EQ(z.h, 0.0);
  EXPECT_EQ(z.v, 0.0);
}

TEST(SmoothEval, VerticalEdgeIsTheTransposedProfile) {
  SparseField f;
  f.set({{0, 0}, Direction::North}, 5);
  EXPECT_DOUBLE_EQ(smooth_eval(f, {0.1, 0.5}).v, 5.0);
  EXPECT_DOUBLE_EQ(smooth_eval(f, {0.1, 1.0}).v, 2.5);
  EXPECT_EQ(smooth_eval(f, {0.1, 1.0}).h, 0.0);
}

TEST(SmoothDiv, IntroSquares) {
  const auto f = intro_field();
  EXPECT_EQ(smooth_div(f, {0.1, -0.2}), 1.0);
  EXPECT_EQ(smooth_div(f, {1.3, 0.4}), -1.0);
  EXPECT_EQ(smooth_div(f, {3.1, 0.4}), 0.0);
}

TEST(SmoothDiv, GridLineIsSingular) {
  const auto f = intro_field();
  EXPECT_THROW(smooth_div(f, {0.5, 0.1}), PreconditionError);
  EXPECT_THROW(smooth_div(f, {0.2, -1.5}), PreconditionError);
}

TEST(SmoothDiv, LevelTwoTilingOffRoot) {
  const auto frag = build_fragment(2);
  const PeriodicField<Fragment> field(*frag, {0, 0});
  EXPECT_EQ(smooth_div(field, {0.2, 0.3}), 1.0);   // nearest (0,0)
  EXPECT_EQ(smooth_div(field, {1.1, 0.2}), -8.0);  // nearest (1,0), the root
}

TEST(SmoothDiv, MatchesLatticeDivergenceAtRandomPoints) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  for (int n : {2, 3, 5}) {
    const RecursiveFragment frag(n);
    const Shift shift{static_cast<std::int64_t>(gen() % frag.side()), static_cast<std::int64_t>(gen() % frag.side())};
    const PeriodicField<RecursiveFragment> field(frag, shift);
    for (int i = 0; i < 2000; ++i) {
      const ContinuousPoint p{coord(gen), coord(gen)};
      const Vertex v{std::llround(p.x), std::llround(p.y)};
      EXPECT_NEAR(smooth_div(field, p), static_cast<double>(divergence(field, v)), 1e-9);
    }
  }
}

TEST(FdDivergence, IntroField) {
  EXPECT_NEAR(fd_divergence(intro_field(), {0.2, 0.1}, 0.01), 1.0, 1e-9);
  EXPECT_NEAR(fd_divergence(ZeroField{}, {0.2, 0.1}, 0.01), 0.0, 1e-12);
}

TEST(FdDivergence, LevelTwoRoot) {
  const auto frag = build_fragment(2);
  const PeriodicField<Fragment> field(*frag, {0, 0});
  EXPECT_NEAR(fd_divergence(field, {1.1, 0.2}, 0.005), -8.0, 1e-8);
}

TEST(FdDivergence, StencilPreconditions) {
  const auto f = intro_field();
  EXPECT_THROW(fd_divergence(f, {0.45, 0.1}, 0.1), PreconditionError);
  EXPECT_THROW(fd_divergence(f, {0.2, 0.02}, 0.05), PreconditionError);
  EXPECT_THROW(fd_divergence(f, {0.2, 0.1}, 0.0), PreconditionError);
  EXPECT_THROW(fd_divergence(f, {0.5, 0.1}, 0.01), PreconditionError);
}

TEST(FdDivergence, AgreesWithSmoothDivOnAdmissibleStencils) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  const RecursiveFragment frag(4);
  const PeriodicField<RecursiveFragment> field(frag, {3, 11});
  int tested = 0;
  while (tested < 2000) {
    const ContinuousPoint p{coord(gen), coord(gen)};
    const double h = 1e-3;
    if (!stencil_clear(p.x, h) || !stencil_clear(p.y, h)) continue;
    EXPECT_NEAR(fd_divergence(field, p, h), smooth_div(field, p), 1e-8);
    ++tested;
  }
}

// H is continuous in x and V in y; those are the directions the divergence
// differentiates along.
TEST(SmoothEval, ContinuousAcrossKinksAlongDifferentiatedAxis) {
  const RecursiveFragment frag(3);
  const PeriodicField<RecursiveFragment> field(frag, {2, 5});
  const double h = 1e-6;
  for (double k = -4.5; k <= 4.5; k += 0.5) {
    for (double other : {-2.3, 0.2, 1.7}) {
      const double jump_h = smooth_eval(field, {k + h, other}).h - smooth_eval(field, {k - h, other}).h;
      const double jump_v = smooth_eval(field, {other, k + h}).v - smooth_eval(field, {other, k - h}).v;
      const double scale = 4.0 * h * static_cast<double>(root_outflow(3));
      EXPECT_LE(std::abs(jump_h), scale) << k;
      EXPECT_LE(std::abs(jump_v), scale) << k;
    }
  }
}

TEST(Raster, MarksGridLineDivergenceMissing) {
  const auto samples = raster(intro_field(), -1.0, -1.0, 2.0, 1.0, 4);
  EXPECT_EQ(samples.size(), 13u * 9u);
  for (const auto& s : samples) {
    EXPECT_EQ(s.div.has_value(), !on_half_integer(s.point.x) && !on_half_integer(s.point.y));
  }
  EXPECT_THROW(raster(intro_field(), 0, 0, 2000, 2000, 1), CapacityError);
  EXPECT_THROW(raster(intro_field(), 0, 0, 1, 1, 0), UsageError);
}

}  // namespace
}  // namespace divfield
