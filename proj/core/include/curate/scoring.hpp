#pragma once

// Per-image quality scores and the combined keep/reject predicate.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curate/image.hpp"
#include "curate/manifest.hpp"

namespace curate {

// Rec. 709 luma weights, stored as integer parts per 10^4 so that channel
// sums stay exact and a uniform image scores exactly its channel value.
struct LuminanceWeights {
  static constexpr std::int64_t kScale = 10000;
  static constexpr std::int64_t kRed = 2126;
  static constexpr std::int64_t kGreen = 7152;
  static constexpr std::int64_t kBlue = 722;

  static constexpr double r = static_cast<double>(kRed) / kScale;
  static constexpr double g = static_cast<double>(kGreen) / kScale;
  static constexpr double b = static_cast<double>(kBlue) / kScale;
};

// Mean weighted luminance in [0, 255]. Independent of pixel order.
// Throws DomainError on an empty pixel set.
double luminance_score(std::span<const Rgb> pixels);
double luminance_score(const RgbImage& image);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct TextPolygon {
  std::vector<Point> vertices;  // detector frame, S x S
  double confidence = 0.0;      // [0, 1]
};

// Absolute shoelace area. Throws DomainError below three vertices.
double polygon_area(std::span<const Point> vertices);

struct FilterConfig {
  double aesthetic_min = 4.73;   // keep strictly above
  double luminance_low = 12.75;  // inclusive
  double luminance_high = 204.0; // inclusive
  double ocr_low_cut = 0.1;      // keep strictly below ...
  double ocr_high_cut = 0.6;     // ... or at/above this
  std::uint32_t detector_side = 736;
  double confidence_min = 0.7;   // polygons below contribute nothing
  bool strict_polygons = true;   // false: skip degenerate polygons instead of throwing

  std::vector<std::string> violations() const;
};

// Sum over confident polygons of area * confidence, divided by S^2.
// Overlaps are double-counted and the result is not clamped.
double ocr_score(std::span<const TextPolygon> polygons, const FilterConfig& cfg);

// accepted iff aesthetic > min, luminance in [low, high], and ocr outside
// [low_cut, high_cut). Every violated rule is listed on rejection.
// Throws DomainError naming the first missing metric.
FilterOutcome keep_decision(const ScoreSet& scores, const FilterConfig& cfg);

}  // namespace curate
