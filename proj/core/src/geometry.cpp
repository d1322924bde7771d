#include "curate/geometry.hpp"

#include <algorithm>
#include <string>

#include "curate/errors.hpp"

namespace curate {

std::vector<std::string> GeometryConfig::violations() const {
  std::vector<std::string> out;
  if (!(aspect_threshold > 0.0 && aspect_threshold <= 1.0)) out.push_back("geometry.aspect_threshold must be in (0, 1]");
  if (crop_target == 0) out.push_back("geometry.crop_target must be > 0");
  if (min_side < crop_target) out.push_back("geometry.min_side must be >= geometry.crop_target");
  return out;
}

double min_aspect_ratio(std::uint32_t width, std::uint32_t height) {
  if (width == 0 || height == 0) throw DomainError("aspect ratio of a zero-sized image");
  const double w = width;
  const double h = height;
  return std::min(w / h, h / w);
}

PrefilterResult passes_prefilter(std::uint32_t width, std::uint32_t height, const GeometryConfig& cfg) {
  PrefilterResult result;
  if (width < cfg.min_side || height < cfg.min_side) result.reasons.push_back(Reason::min_size);
  if (width > 0 && height > 0 && min_aspect_ratio(width, height) < cfg.aspect_threshold) {
    result.reasons.push_back(Reason::aspect_ratio);
  }
  result.passed = result.reasons.empty();
  return result;
}

CropRect center_crop_rect(std::uint32_t width, std::uint32_t height, std::uint32_t target) {
  if (width < target || height < target) {
    throw DomainError("image " + std::to_string(width) + "x" + std::to_string(height) + " is smaller than crop " +
                      std::to_string(target));
  }
  return {(width - target) / 2, (height - target) / 2, target, target};
}

RgbImage apply_crop(const RgbImage& image, const CropRect& rect) {
  if (std::uint64_t{rect.x} + rect.w > image.width() || std::uint64_t{rect.y} + rect.h > image.height()) {
    throw DomainError("crop rect exceeds image bounds");
  }
  RgbImage out(rect.w, rect.h);
  for (std::uint32_t y = 0; y < rect.h; ++y) {
    for (std::uint32_t x = 0; x < rect.w; ++x) out.at(x, y) = image.at(rect.x + x, rect.y + y);
  }
  return out;
}

}  // namespace curate
