#pragma once

// Size / aspect-ratio gating and center-crop geometry.

#include <cstdint>
#include <string>
#include <vector>

#include "curate/image.hpp"
#include "curate/manifest.hpp"

namespace curate {

struct CropRect {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t w = 0;
  std::uint32_t h = 0;

  bool operator==(const CropRect&) const = default;
};

struct GeometryConfig {
  std::uint32_t min_side = 1024;
  double aspect_threshold = 0.6666;
  std::uint32_t crop_target = 1024;

  std::vector<std::string> violations() const;
};

// min(w/h, h/w). Throws DomainError on a zero dimension.
double min_aspect_ratio(std::uint32_t width, std::uint32_t height);

struct PrefilterResult {
  bool passed = false;
  std::vector<Reason> reasons;  // min_size and/or aspect_ratio
};

// Zero dimensions fail on min_size; the aspect rule is then not evaluated.
PrefilterResult passes_prefilter(std::uint32_t width, std::uint32_t height, const GeometryConfig& cfg);

// target x target rect; leftover odd pixels go right/bottom.
// Throws DomainError when the image is smaller than target.
CropRect center_crop_rect(std::uint32_t width, std::uint32_t height, std::uint32_t target);

// Copies the pixels inside `rect`. Throws DomainError if rect exceeds the image.
RgbImage apply_crop(const RgbImage& image, const CropRect& rect);

}  // namespace curate
