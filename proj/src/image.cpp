// Copyright 2026 The taskreso Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "taskreso/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include <jpeglib.h>
#include <jerror.h>
#include <png.h>

#include "taskreso/errors.hpp"

namespace taskreso {

Image::Image(std::uint32_t width, std::uint32_t height, std::array<std::uint8_t, 3> fill)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) throw InvalidArg("image dimensions must be positive");
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill[0];
    pixels_[i + 1] = fill[1];
    pixels_[i + 2] = fill[2];
  }
}

Image::Image(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) throw InvalidArg("image dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw InvalidArg("pixel buffer size " + std::to_string(pixels_.size()) +
                     " does not match " + std::to_string(width) + "x" +
                     std::to_string(height) + "x3");
  }
}

namespace {

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    std::string msg = png.message;
    png_image_free(&png);
    throw DecodeError("png: " + msg);
  }
  // Read with alpha so it can be discarded rather than composited.
  png.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, rgba.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw DecodeError("png: " + msg);
  }
  const std::uint32_t w = png.width;
  const std::uint32_t h = png.height;
  png_image_free(&png);
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0, n = static_cast<std::size_t>(w) * h; i < n; ++i) {
    rgb[i * 3] = rgba[i * 4];
    rgb[i * 3 + 1] = rgba[i * 4 + 1];
    rgb[i * 3 + 2] = rgba[i * 4 + 2];
  }
  return Image(w, h, std::move(rgb));
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  bool truncated = false;
  char message[JMSG_LENGTH_MAX] = {};
};

void jpeg_on_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_on_message(j_common_ptr cinfo, int level) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  // libjpeg pads a truncated stream with gray and only warns; treat as corrupt.
  if (level < 0 && cinfo->err->msg_code == JWRN_JPEG_EOF) err->truncated = true;
}

Image decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_on_error;
  err.pub.emit_message = jpeg_on_message;
  std::vector<std::uint8_t> rgb;
  std::uint32_t w = 0;
  std::uint32_t h = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = cinfo.output_width;
  h = cinfo.output_height;
  rgb.resize(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (err.truncated) throw DecodeError("jpeg: premature end of data");
  return Image(w, h, std::move(rgb));
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return decode_jpeg(bytes);
  }
  throw DecodeError("unsupported format (expected PNG or JPEG)");
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  try {
    return decode_image(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = img.width();
  png.height = img.height();
  png.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, img.pixels().data(), 0, nullptr)) {
    throw IoError(std::string("png encode: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, img.pixels().data(), 0,
                                 nullptr)) {
    throw IoError(std::string("png encode: ") + png.message);
  }
  out.resize(size);
  return out;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Image resize(const Image& img, std::uint32_t width, std::uint32_t height) {
  if (width == 0 || height == 0) throw InvalidArg("resize target must be positive");
  if (width == img.width() && height == img.height()) return img;

  struct Tap {
    std::uint32_t i0, i1;
    double frac;
  };
  auto taps = [](std::uint32_t src, std::uint32_t dst) {
    std::vector<Tap> out(dst);
    const double scale = static_cast<double>(src) / dst;
    const auto last = static_cast<std::int64_t>(src) - 1;
    for (std::uint32_t i = 0; i < dst; ++i) {
      const double s = (i + 0.5) * scale - 0.5;
      const double fl = std::floor(s);
      const auto base = static_cast<std::int64_t>(fl);
      out[i] = {static_cast<std::uint32_t>(std::clamp<std::int64_t>(base, 0, last)),
                static_cast<std::uint32_t>(std::clamp<std::int64_t>(base + 1, 0, last)),
                s - fl};
    }
    return out;
  };
  const auto tx = taps(img.width(), width);
  const auto ty = taps(img.height(), height);

  Image out(width, height);
  for (std::uint32_t y = 0; y < height; ++y) {
    const Tap& vy = ty[y];
    for (std::uint32_t x = 0; x < width; ++x) {
      const Tap& vx = tx[x];
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(vx.i0, vy.i0, c) * (1.0 - vx.frac) + img.at(vx.i1, vy.i0, c) * vx.frac;
        const double bot = img.at(vx.i0, vy.i1, c) * (1.0 - vx.frac) + img.at(vx.i1, vy.i1, c) * vx.frac;
        const double v = top * (1.0 - vy.frac) + bot * vy.frac;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

namespace {

constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;
constexpr double kDelta = 6.0 / 29.0;

using Mat3 = std::array<std::array<double, 3>, 3>;

constexpr Mat3 kRgbToXyz = {{{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}}};

Mat3 inverse(const Mat3& m) {
  Mat3 inv{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    }
  const double det = m[0][0] * inv[0][0] + m[0][1] * inv[1][0] + m[0][2] * inv[2][0];
  for (auto& row : inv)
    for (auto& v : row) v /= det;
  return inv;
}

const Mat3& xyz_to_rgb() {
  static const Mat3 m = inverse(kRgbToXyz);
  return m;
}

std::array<double, 3> apply(const Mat3& m, double a, double b, double c) {
  return {m[0][0] * a + m[0][1] * b + m[0][2] * c, m[1][0] * a + m[1][1] * b + m[1][2] * c,
          m[2][0] * a + m[2][1] * b + m[2][2] * c};
}

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  return c <= 0.0031308 ? c * 12.92 : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

}  // namespace

std::array<double, 3> rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = srgb_to_linear(r8 / 255.0);
  const double g = srgb_to_linear(g8 / 255.0);
  const double b = srgb_to_linear(b8 / 255.0);
  const auto [x, y, z] = apply(kRgbToXyz, r, g, b);
  const double fx = lab_f(x / kWhiteX);
  const double fy = lab_f(y / kWhiteY);
  const double fz = lab_f(z / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<double, 3> lab_to_rgb(double l, double a, double b) {
  const double fy = (l + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - b / 200.0;
  const double x = kWhiteX * lab_f_inv(fx);
  const double y = kWhiteY * lab_f_inv(fy);
  const double z = kWhiteZ * lab_f_inv(fz);
  const auto [r, g, bl] = apply(xyz_to_rgb(), x, y, z);
  return {255.0 * linear_to_srgb(r), 255.0 * linear_to_srgb(g), 255.0 * linear_to_srgb(bl)};
}

LabFeatureSet rgb_to_lab(const Image& img) {
  LabFeatureSet out;
  out.n = static_cast<std::size_t>(img.width()) * img.height();
  out.data.resize(out.n * LabFeatureSet::dim);
  const auto px = img.pixels();
  for (std::size_t i = 0; i < out.n; ++i) {
    const auto lab = rgb_to_lab(px[i * 3], px[i * 3 + 1], px[i * 3 + 2]);
    std::copy(lab.begin(), lab.end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * 3));
  }
  return out;
}

std::vector<std::vector<double>> patch_histograms(const LabelMap& map, std::uint32_t k,
                                                  std::uint32_t patch) {
  if (k == 0) throw InvalidArg("patch_histograms: k must be positive");
  if (patch == 0) throw InvalidArg("patch_histograms: patch size must be positive");
  if (map.width == 0 || map.height == 0 ||
      map.labels.size() != static_cast<std::size_t>(map.width) * map.height) {
    throw InvalidArg("patch_histograms: label map shape mismatch");
  }
  const std::uint32_t tiles_x = (map.width + patch - 1) / patch;
  const std::uint32_t tiles_y = (map.height + patch - 1) / patch;
  const double cell = 1.0 / (static_cast<double>(patch) * patch);

  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (std::uint32_t ty = 0; ty < tiles_y; ++ty) {
    for (std::uint32_t tx = 0; tx < tiles_x; ++tx) {
      std::vector<std::size_t> counts(k, 0);
      for (std::uint32_t dy = 0; dy < patch; ++dy) {
        const std::uint32_t y = std::min(ty * patch + dy, map.height - 1);
        for (std::uint32_t dx = 0; dx < patch; ++dx) {
          const std::uint32_t x = std::min(tx * patch + dx, map.width - 1);
          const std::uint32_t label = map.labels[static_cast<std::size_t>(y) * map.width + x];
          if (label >= k) throw InvalidArg("patch_histograms: label " + std::to_string(label) +
                                           " >= k=" + std::to_string(k));
          ++counts[label];
        }
      }
      std::vector<double> hist(k);
      for (std::uint32_t j = 0; j < k; ++j) hist[j] = static_cast<double>(counts[j]) * cell;
      out.push_back(std::move(hist));
    }
  }
  return out;
}

}  // namespace taskreso
