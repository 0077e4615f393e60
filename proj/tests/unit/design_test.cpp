#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "imp/design.h"
#include "imp/error.h"
#include "test_support.h"

namespace imp {
namespace {

using testing::make_design;

// Counts cells of an n x n grid over [0, extent)^2 whose centers lie in both boxes.
double pixel_overlap(const BBox& a, const BBox& b, double extent, int n) {
  const double cell = extent / n;
  std::size_t count = 0;
  for (int j = 0; j < n; ++j) {
    const double cy = (j + 0.5) * cell;
    for (int i = 0; i < n; ++i) {
      const double cx = (i + 0.5) * cell;
      auto in = [&](const BBox& r) { return cx >= r.x && cx < r.right() && cy >= r.y && cy < r.bottom(); };
      if (in(a) && in(b)) ++count;
    }
  }
  return count * cell * cell;
}

TEST(OverlapArea, Examples) {
  EXPECT_DOUBLE_EQ(overlap_area({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(overlap_area({0, 0, 1, 1}, {5, 5, 1, 1}), 0.0);
  const double oracle = pixel_overlap({0, 0, 2, 2}, {1, 1, 3, 3}, 5.0, 1000);
  EXPECT_NEAR(oracle, 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(overlap_area({0, 0, 2, 2}, {1, 1, 3, 3}), oracle);
}

TEST(OverlapArea, TouchingEdgesIsZero) {
  EXPECT_EQ(overlap_area({0, 0, 1, 1}, {1, 0, 1, 1}), 0.0);
}

TEST(OverlapArea, SymmetricAndBoundedProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-10, 10), size(0.01, 8);
  for (int i = 0; i < 2000; ++i) {
    const BBox a{pos(rng), pos(rng), size(rng), size(rng)};
    const BBox b{pos(rng), pos(rng), size(rng), size(rng)};
    const double ab = overlap_area(a, b);
    EXPECT_EQ(ab, overlap_area(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, std::min(a.area(), b.area()) * (1 + 1e-12));
  }
}

VectorDesign canvas10() { return make_design(10, 10, {{"a", ElementKind::kShape, {1, 1, 1, 1}}}); }

// Smallest L-infinity integer shift that puts the box inside the canvas.
BBox brute_force_clamp(const BBox& b, double cw, double ch) {
  BBox best = b;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int dy = -20; dy <= 20; ++dy) {
    for (int dx = -20; dx <= 20; ++dx) {
      const BBox c{b.x + dx, b.y + dy, b.w, b.h};
      if (c.x < 0 || c.y < 0 || c.right() > cw || c.bottom() > ch) continue;
      const double cost = std::max(std::abs(dx), std::abs(dy)) + 1e-3 * (std::abs(dx) + std::abs(dy));
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
  }
  return best;
}

TEST(ClampToCanvas, Examples) {
  const VectorDesign d = canvas10();
  EXPECT_EQ(clamp_to_canvas({-2, 0, 4, 4}, d), (BBox{0, 0, 4, 4}));
  EXPECT_EQ(clamp_to_canvas({3, 3, 4, 4}, d), (BBox{3, 3, 4, 4}));
  const BBox oracle = brute_force_clamp({8, 9, 4, 4}, 10, 10);
  EXPECT_EQ(oracle, (BBox{6, 6, 4, 4}));
  EXPECT_EQ(clamp_to_canvas({8, 9, 4, 4}, d), oracle);
}

TEST(ClampToCanvas, MatchesBruteForceOnIntegerBoxes) {
  const VectorDesign d = canvas10();
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> pos(-8, 15), size(1, 10);
  for (int i = 0; i < 500; ++i) {
    const BBox b{double(pos(rng)), double(pos(rng)), double(size(rng)), double(size(rng))};
    EXPECT_EQ(clamp_to_canvas(b, d), brute_force_clamp(b, 10, 10));
  }
}

TEST(ClampToCanvas, Oversized) {
  try {
    clamp_to_canvas({0, 0, 11, 2}, canvas10());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOversizedElement);
  }
}

TEST(ClampToCanvas, IdempotentProperty) {
  const VectorDesign d = canvas10();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-20, 20), size(0.1, 10);
  for (int i = 0; i < 1000; ++i) {
    const BBox once = clamp_to_canvas({pos(rng), pos(rng), size(rng), size(rng)}, d);
    EXPECT_EQ(clamp_to_canvas(once, d), once);
    EXPECT_GE(once.x, 0.0);
    EXPECT_GE(once.y, 0.0);
    EXPECT_LE(once.right(), 10.0);
    EXPECT_LE(once.bottom(), 10.0);
  }
}

TEST(RasterizeMask, FullCanvas) {
  const VectorDesign d = make_design(10, 10, {{"a", ElementKind::kImage, {0, 0, 10, 10}}});
  const BinaryMask m = rasterize_mask(d.elements[0], 4, 4, d);
  EXPECT_EQ(m.popcount(), 16u);
}

TEST(RasterizeMask, LeftHalf) {
  const VectorDesign d = make_design(10, 10, {{"a", ElementKind::kImage, {0, 0, 5, 10}}});
  const BinaryMask m = rasterize_mask(d.elements[0], 4, 4, d);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) EXPECT_EQ(m.at(x, y), x < 2 ? 1 : 0) << x << "," << y;
  }
}

TEST(RasterizeMask, MatchesCellCenterEnumeration) {
  const VectorDesign d = make_design(10, 10, {{"a", ElementKind::kImage, {2, 2, 3, 3}}});
  const BinaryMask m = rasterize_mask(d.elements[0], 10, 10, d);
  std::size_t ones = 0;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool inside = cx >= 2 && cx < 5 && cy >= 2 && cy < 5;
      EXPECT_EQ(m.at(x, y), inside ? 1 : 0);
      ones += inside;
    }
  }
  EXPECT_EQ(ones, 9u);
  EXPECT_EQ(m.popcount(), 9u);
  EXPECT_EQ(m.at(2, 2), 1);
  EXPECT_EQ(m.at(4, 4), 1);
  EXPECT_EQ(m.at(5, 5), 0);
}

TEST(RasterizeMask, RandomBoxesMatchEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-3, 12), size(0.2, 9);
  for (int t = 0; t < 300; ++t) {
    const VectorDesign d = make_design(10, 7, {{"a", ElementKind::kShape, {pos(rng), pos(rng), size(rng), size(rng)}}});
    const int gw = 13, gh = 9;
    const BinaryMask m = rasterize_mask(d.elements[0], gw, gh, d);
    const BBox& b = d.elements[0].bbox;
    for (int y = 0; y < gh; ++y) {
      for (int x = 0; x < gw; ++x) {
        const double cx = (x + 0.5) * 10.0 / gw, cy = (y + 0.5) * 7.0 / gh;
        const bool inside = cx >= b.x && cx < b.right() && cy >= b.y && cy < b.bottom();
        ASSERT_EQ(m.at(x, y), inside ? 1 : 0) << t;
      }
    }
  }
}

TEST(RasterizeMask, CoverageConvergesWithResolution) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(-2, 8), size(0.5, 6);
  for (int t = 0; t < 50; ++t) {
    const VectorDesign d = make_design(10, 10, {{"a", ElementKind::kShape, {pos(rng), pos(rng), size(rng), size(rng)}}});
    const BBox& b = d.elements[0].bbox;
    const double exact = overlap_area(b, d.canvas_box()) / d.canvas_area();
    if (exact <= 0) continue;
    const double coarse = rasterize_mask(d.elements[0], 16, 16, d).popcount() / 256.0;
    const double fine = rasterize_mask(d.elements[0], 256, 256, d).popcount() / 65536.0;
    EXPECT_NEAR(fine, exact, std::abs(coarse - exact) + 0.05);
    EXPECT_NEAR(fine, exact, 0.05);
  }
}

TEST(Validate, RejectsBrokenInvariants) {
  auto expect_invalid = [](VectorDesign d) {
    try {
      validate(d);
      FAIL() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidDesign);
    }
  };
  VectorDesign ok = make_design(10, 10, {{"a", ElementKind::kShape, {1, 1, 2, 2}},
                                         {"b", ElementKind::kTitle, {3, 3, 2, 2}}});
  EXPECT_NO_THROW(validate(ok));

  VectorDesign d = ok;
  d.elements[1].id = "a";
  expect_invalid(d);
  d = ok;
  d.elements[1].z = d.elements[0].z;
  expect_invalid(d);
  d = ok;
  d.elements[0].bbox.w = 0;
  expect_invalid(d);
  d = ok;
  d.elements[0].bbox = {20, 20, 1, 1};
  expect_invalid(d);
  d = ok;
  d.canvas_w = 0;
  expect_invalid(d);
  d = ok;
  d.elements.clear();
  expect_invalid(d);
  d = ok;
  d.elements[0].bbox.x = std::numeric_limits<double>::quiet_NaN();
  expect_invalid(d);
  d = ok;
  d.elements.resize(kMaxElements + 1, d.elements[0]);
  for (std::size_t i = 0; i < d.elements.size(); ++i) {
    d.elements[i].id = "e" + std::to_string(i);
    d.elements[i].z = static_cast<int>(i);
  }
  expect_invalid(d);
  d.elements.resize(kMaxElements);
  EXPECT_NO_THROW(validate(d));
}

TEST(Validate, AcceptsOverlappingElements) {
  VectorDesign d = make_design(10, 10, {{"bg", ElementKind::kImage, {0, 0, 10, 10}},
                                        {"t", ElementKind::kTitle, {2, 2, 4, 1}}});
  EXPECT_NO_THROW(validate(d));
}

TEST(Enums, RoundTripAndRejectUnknown) {
  for (DesignClass c : kAllDesignClasses) EXPECT_EQ(parse_design_class(to_string(c)), c);
  for (int k = 0; k < static_cast<int>(kElementKindCount); ++k) {
    const auto kind = static_cast<ElementKind>(k);
    EXPECT_EQ(parse_element_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_element_kind("Video"), Error);
  EXPECT_THROW(parse_design_class("Poster"), Error);
  EXPECT_EQ(kAllDesignClasses.size(), 6u);
}

}  // namespace
}  // namespace imp
