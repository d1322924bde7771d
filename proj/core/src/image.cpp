#include "curate/image.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "curate/errors.hpp"

namespace curate {

RgbImage::RgbImage(std::uint32_t width, std::uint32_t height, Rgb fill)
    : width_(width), height_(height), pixels_(std::size_t{width} * height, fill) {}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (tok.empty()) throw DataError("truncated PPM header");
  return tok;
}

std::uint32_t header_number(std::istream& in) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(tok, &used);
    if (used != tok.size()) throw DataError("bad PPM header value '" + tok + "'");
    return static_cast<std::uint32_t>(v);
  } catch (const std::logic_error&) {
    throw DataError("bad PPM header value '" + tok + "'");
  }
}

}  // namespace

RgbImage read_ppm(std::istream& in) {
  const std::string magic = header_token(in);
  if (magic != "P6" && magic != "P3") throw DataError("unsupported image format (expected PPM P6/P3)");
  const std::uint32_t w = header_number(in);
  const std::uint32_t h = header_number(in);
  const std::uint32_t maxval = header_number(in);
  if (maxval != 255) throw DataError("only 8-bit PPM (maxval 255) is supported");

  RgbImage image(w, h);
  auto px = image.pixels();
  if (magic == "P6") {
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size() * 3));
    if (in.gcount() != static_cast<std::streamsize>(px.size() * 3)) throw DataError("truncated PPM pixel data");
  } else {
    for (Rgb& p : px) {
      std::uint32_t c[3];
      for (auto& v : c) {
        v = header_number(in);
        if (v > 255) throw DataError("PPM sample out of range");
      }
      p = {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]), static_cast<std::uint8_t>(c[2])};
    }
  }
  return image;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  return read_ppm(in);
}

void write_ppm(const RgbImage& image, std::ostream& out) {
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  auto px = image.pixels();
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size() * 3));
}

}  // namespace curate
