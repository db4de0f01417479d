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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace taskreso {

/// 8-bit RGB raster, row-major, interleaved.
class Image {
 public:
  Image() = default;
  /// Filled with `fill`; throws InvalidArg on a zero dimension.
  Image(std::uint32_t width, std::uint32_t height,
        std::array<std::uint8_t, 3> fill = {0, 0, 0});
  /// Takes ownership of `pixels`; size must equal width * height * 3.
  Image(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> pixels);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  std::uint8_t at(std::uint32_t x, std::uint32_t y, int c) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }
  std::uint8_t& at(std::uint32_t x, std::uint32_t y, int c) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }

  bool operator==(const Image&) const = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// n rows of 3 reals (L, a, b), row-major.
struct LabFeatureSet {
  std::size_t n = 0;
  static constexpr std::size_t dim = 3;
  std::vector<double> data;
};

/// Decodes PNG or JPEG (sniffed from magic bytes). Alpha is dropped and
/// grayscale expanded to RGB. Throws IoError or DecodeError.
Image load_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);

/// 8-bit RGB PNG encoding; used for HTTP payloads and fixtures.
std::vector<std::uint8_t> encode_png(const Image& img);
void save_png(const Image& img, const std::filesystem::path& path);

/// Bilinear resample, half-pixel centers, edge-clamped.
Image resize(const Image& img, std::uint32_t width, std::uint32_t height);

/// sRGB -> CIELab (D65).
LabFeatureSet rgb_to_lab(const Image& img);
std::array<double, 3> rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);
/// Inverse of rgb_to_lab, unclamped and unrounded (sRGB in [0, 255] units).
std::array<double, 3> lab_to_rgb(double l, double a, double b);

/// Per-pixel cluster labels on a width x height grid.
struct LabelMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint32_t> labels;
};

/// One normalized k-bin label histogram per non-overlapping patch x patch
/// tile, row-major tile order. Grids not divisible by `patch` are padded by
/// edge replication.
std::vector<std::vector<double>> patch_histograms(const LabelMap& map, std::uint32_t k,
                                                  std::uint32_t patch);

}  // namespace taskreso
