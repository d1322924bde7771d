#include "curate/scoring.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "curate/errors.hpp"

namespace curate {

double luminance_score(std::span<const Rgb> pixels) {
  if (pixels.empty()) throw DomainError("luminance of an empty pixel set");
  // Integer channel sums: exact, and therefore independent of pixel order.
  std::uint64_t red = 0;
  std::uint64_t green = 0;
  std::uint64_t blue = 0;
  for (const Rgb& p : pixels) {
    red += p.r;
    green += p.g;
    blue += p.b;
  }
  using W = LuminanceWeights;
  const auto weighted = static_cast<double>(W::kRed * static_cast<std::int64_t>(red)) +
                        static_cast<double>(W::kGreen * static_cast<std::int64_t>(green)) +
                        static_cast<double>(W::kBlue * static_cast<std::int64_t>(blue));
  return weighted / (static_cast<double>(W::kScale) * static_cast<double>(pixels.size()));
}

double luminance_score(const RgbImage& image) { return luminance_score(image.pixels()); }

double polygon_area(std::span<const Point> vertices) {
  if (vertices.size() < 3) throw DomainError("polygon needs at least 3 vertices");
  // Shoelace about the first vertex to keep magnitudes small.
  const Point o = vertices.front();
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < vertices.size(); ++i) {
    const double ax = vertices[i].x - o.x;
    const double ay = vertices[i].y - o.y;
    const double bx = vertices[i + 1].x - o.x;
    const double by = vertices[i + 1].y - o.y;
    twice += ax * by - bx * ay;
  }
  return std::fabs(twice) / 2.0;
}

std::vector<std::string> FilterConfig::violations() const {
  std::vector<std::string> out;
  if (!std::isfinite(aesthetic_min) && aesthetic_min != -std::numeric_limits<double>::infinity()) {
    out.push_back("filter.aesthetic_min must be a number");
  }
  if (!(luminance_low < luminance_high)) out.push_back("filter.luminance_range requires low < high");
  if (!(0.0 <= ocr_low_cut && ocr_low_cut <= ocr_high_cut)) {
    out.push_back("filter.ocr cuts require 0 <= ocr_low_cut <= ocr_high_cut");
  }
  if (detector_side == 0) out.push_back("filter.detector_side must be > 0");
  if (!(confidence_min >= 0.0 && confidence_min <= 1.0)) out.push_back("filter.confidence_min must be in [0, 1]");
  return out;
}

double ocr_score(std::span<const TextPolygon> polygons, const FilterConfig& cfg) {
  if (cfg.detector_side == 0) throw DomainError("detector side must be positive");
  double weighted = 0.0;
  for (const TextPolygon& p : polygons) {
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) throw DomainError("polygon confidence outside [0, 1]");
    if (p.vertices.size() < 3) {
      if (cfg.strict_polygons) throw DomainError("text polygon with fewer than 3 vertices");
      continue;
    }
    if (p.confidence < cfg.confidence_min) continue;
    weighted += polygon_area(p.vertices) * p.confidence;
  }
  const double side = cfg.detector_side;
  return weighted / (side * side);
}

FilterOutcome keep_decision(const ScoreSet& scores, const FilterConfig& cfg) {
  if (!scores.aesthetic) throw DomainError("missing score: aesthetic");
  if (!scores.luminance) throw DomainError("missing score: luminance");
  if (!scores.ocr) throw DomainError("missing score: ocr");

  std::vector<Reason> reasons;
  if (!(*scores.aesthetic > cfg.aesthetic_min)) reasons.push_back(Reason::aesthetic);
  if (*scores.luminance < cfg.luminance_low) reasons.push_back(Reason::luminance_low);
  if (*scores.luminance > cfg.luminance_high) reasons.push_back(Reason::luminance_high);
  const double ocr = *scores.ocr;
  if (!(ocr < cfg.ocr_low_cut || ocr >= cfg.ocr_high_cut)) reasons.push_back(Reason::ocr_intermediate);
  return reasons.empty() ? FilterOutcome::accepted() : FilterOutcome::rejected(std::move(reasons));
}

}  // namespace curate
