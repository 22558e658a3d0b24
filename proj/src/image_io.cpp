#include "sigsal/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "sigsal/errors.hpp"

namespace sigsal {
namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') ++pos;
  if (start == pos) fail(ErrorCode::kFormat, "truncated PGM header");
  return bytes.substr(start, pos - start);
}

std::size_t parse_positive(const std::string& tok, const char* what) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    fail(ErrorCode::kFormat, std::string("bad PGM ") + what + ": " + tok);
  const auto v = std::stoull(tok);
  if (v == 0) fail(ErrorCode::kFormat, std::string("PGM ") + what + " must be positive");
  return v;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

unsigned char quantize_unit(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::floor(c * 255.0 + 0.5));
}

Tensor read_gray_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") fail(ErrorCode::kFormat, path.string() + " is not a binary PGM (P5)");
  const std::size_t width = parse_positive(next_token(bytes, pos), "width");
  const std::size_t height = parse_positive(next_token(bytes, pos), "height");
  const std::size_t maxval = parse_positive(next_token(bytes, pos), "maxval");
  if (maxval != 255) fail(ErrorCode::kUnsupportedFormat, "PGM maxval " + std::to_string(maxval) + " (need 255)");
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    fail(ErrorCode::kFormat, "truncated PGM header");
  ++pos;
  if (bytes.size() - pos < width * height) fail(ErrorCode::kFormat, "truncated PGM raster");

  Tensor img({height, width});
  for (std::size_t i = 0; i < width * height; ++i)
    img[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  return img;
}

void write_gray_image(const Tensor& img, const std::filesystem::path& path) {
  if (img.rank() != 2) fail(ErrorCode::kInvalidShape, "PGM output needs a rank-2 tensor");
  std::string bytes = "P5\n" + std::to_string(img.dim(1)) + " " + std::to_string(img.dim(0)) + "\n255\n";
  bytes.reserve(bytes.size() + img.size());
  for (double v : img.data()) bytes.push_back(static_cast<char>(quantize_unit(v)));
  write_bytes(path, bytes);
}

void write_rgb_image(const Tensor& rgb, const std::filesystem::path& path) {
  if (rgb.rank() != 3 || rgb.dim(2) != 3) fail(ErrorCode::kInvalidShape, "PPM output needs shape [h,w,3]");
  std::string bytes = "P6\n" + std::to_string(rgb.dim(1)) + " " + std::to_string(rgb.dim(0)) + "\n255\n";
  bytes.reserve(bytes.size() + rgb.size());
  for (double v : rgb.data()) bytes.push_back(static_cast<char>(quantize_unit(v)));
  write_bytes(path, bytes);
}

}  // namespace sigsal
