#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "curate/errors.hpp"
#include "curate/scoring.hpp"
#include "generators.hpp"

using namespace curate;
using namespace curate::testing;

namespace {

TextPolygon square(double x, double y, double side, double confidence) {
  return {{{x, y}, {x + side, y}, {x + side, y + side}, {x, y + side}}, confidence};
}

ScoreSet scores(double a, double l, double o) { return {a, l, o}; }

}  // namespace

TEST(Luminance, UniformImages) {
  EXPECT_EQ(luminance_score(RgbImage(4, 4, {255, 255, 255})), 255.0);
  EXPECT_EQ(luminance_score(RgbImage(4, 4, {0, 0, 0})), 0.0);
  EXPECT_EQ(luminance_score(RgbImage(3, 1, {17, 17, 17})), 17.0);
}

TEST(Luminance, TwoPixels) {
  const std::vector<Rgb> px{{255, 0, 0}, {0, 255, 0}};
  EXPECT_NEAR(luminance_score(px), 118.2945, 1e-12);
}

TEST(Luminance, MatchesOracleAndIgnoresOrder) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    RgbImage img = random_image(rng, 8, 8);
    const double got = luminance_score(img);
    EXPECT_NEAR(got, naive_luminance(img), 1e-9 * std::max(1.0, got));
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 255.0);
    auto px = img.pixels();
    std::shuffle(px.begin(), px.end(), rng);
    EXPECT_EQ(luminance_score(img), got);
  }
  EXPECT_THROW(luminance_score(std::span<const Rgb>{}), DomainError);
}

TEST(PolygonArea, Examples) {
  const std::vector<Point> sq{{0, 0}, {368, 0}, {368, 368}, {0, 368}};
  EXPECT_EQ(polygon_area(sq), 135424.0);
  std::vector<Point> rev(sq.rbegin(), sq.rend());
  EXPECT_EQ(polygon_area(rev), 135424.0);
  EXPECT_EQ(polygon_area(std::vector<Point>{{0, 0}, {1, 1}, {2, 2}}), 0.0);
  EXPECT_THROW(polygon_area(std::vector<Point>{{0, 0}, {1, 1}}), DomainError);
}

TEST(PolygonArea, RightTrianglesExact) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const double b = uniform_int(rng, 1, 700), h = uniform_int(rng, 1, 700);
    EXPECT_EQ(polygon_area(std::vector<Point>{{10, 10}, {10 + b, 10}, {10, 10 + h}}), b * h / 2);
  }
}

TEST(OcrScore, Examples) {
  const FilterConfig cfg;
  EXPECT_EQ(ocr_score({}, cfg), 0.0);
  EXPECT_EQ(ocr_score(std::vector{square(0, 0, 736, 1.0)}, cfg), 1.0);
  EXPECT_DOUBLE_EQ(ocr_score(std::vector{square(0, 0, 368, 0.8)}, cfg), 0.2);
  EXPECT_EQ(ocr_score(std::vector{square(0, 0, 368, 0.69)}, cfg), 0.0);
  EXPECT_GT(ocr_score(std::vector{square(0, 0, 368, 0.7)}, cfg), 0.0);
}

TEST(OcrScore, OverlapsDoubleCountAndAreNotClamped) {
  const FilterConfig cfg;
  EXPECT_EQ(ocr_score(std::vector{square(0, 0, 736, 1.0), square(0, 0, 736, 1.0)}, cfg), 2.0);
}

TEST(OcrScore, DegeneratePolygonPolicy) {
  FilterConfig cfg;
  std::vector<TextPolygon> polys{square(0, 0, 100, 0.9), TextPolygon{{{0, 0}, {1, 1}}, 0.9}};
  EXPECT_THROW(ocr_score(polys, cfg), DomainError);
  cfg.strict_polygons = false;
  EXPECT_DOUBLE_EQ(ocr_score(polys, cfg), 10000.0 * 0.9 / 541696.0);
}

TEST(OcrScore, MonotoneInConfidenceAndArea) {
  Rng rng(8);
  const FilterConfig cfg;
  for (int i = 0; i < 200; ++i) {
    std::vector<TextPolygon> polys;
    for (int j = 0; j < 4; ++j) polys.push_back({random_convex_quad(rng, 736), uniform(rng, 0.7, 1.0)});
    const double base = ocr_score(polys, cfg);
    auto more = polys;
    more[0].confidence = std::min(1.0, more[0].confidence + 0.05);
    EXPECT_GE(ocr_score(more, cfg), base);
    auto fewer = polys;
    fewer.pop_back();
    EXPECT_LE(ocr_score(fewer, cfg), base);
  }
}

TEST(KeepDecision, Examples) {
  const FilterConfig cfg;
  EXPECT_EQ(keep_decision(scores(5.03, 120.0, 0.01), cfg), FilterOutcome::accepted());
  EXPECT_EQ(keep_decision(scores(4.73, 120.0, 0.0), cfg), FilterOutcome::rejected({Reason::aesthetic}));
  EXPECT_EQ(keep_decision(scores(6.0, 210.0, 0.0), cfg), FilterOutcome::rejected({Reason::luminance_high}));
  EXPECT_EQ(keep_decision(scores(6.0, 120.0, 0.3), cfg), FilterOutcome::rejected({Reason::ocr_intermediate}));
  EXPECT_EQ(keep_decision(scores(1.0, 5.0, 0.3), cfg),
            FilterOutcome::rejected({Reason::aesthetic, Reason::luminance_low, Reason::ocr_intermediate}));
}

TEST(KeepDecision, BoundaryInclusivity) {
  const FilterConfig cfg;
  EXPECT_TRUE(keep_decision(scores(5, 12.75, 0), cfg).is_accepted());
  EXPECT_TRUE(keep_decision(scores(5, 204.0, 0), cfg).is_accepted());
  EXPECT_TRUE(keep_decision(scores(5, 100, 0.6), cfg).is_accepted());
  EXPECT_FALSE(keep_decision(scores(5, 100, 0.1), cfg).is_accepted());
}

TEST(KeepDecision, MissingScoreNamesMetric) {
  ScoreSet s{5.0, std::nullopt, 0.0};
  try {
    keep_decision(s, FilterConfig{});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("luminance"), std::string::npos);
  }
}

TEST(KeepDecision, PermissiveThresholdsAcceptEverything) {
  FilterConfig cfg;
  cfg.aesthetic_min = -std::numeric_limits<double>::infinity();
  cfg.luminance_low = 0;
  cfg.luminance_high = 255;
  cfg.ocr_low_cut = 0;
  cfg.ocr_high_cut = 0;
  EXPECT_TRUE(cfg.violations().empty());
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(keep_decision(scores(uniform(rng, -10, 10), uniform(rng, 0, 255), uniform(rng, 0, 2)), cfg).is_accepted());
  }
}

TEST(FilterConfig, Violations) {
  EXPECT_TRUE(FilterConfig{}.violations().empty());
  FilterConfig cfg;
  cfg.luminance_low = 204;
  cfg.luminance_high = 12.75;
  ASSERT_FALSE(cfg.violations().empty());
  EXPECT_NE(cfg.violations()[0].find("luminance"), std::string::npos);
}
