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

#include <doctest.h>

#include <cstdio>
#include <cstdlib>

#include <jpeglib.h>
#include <png.h>

#include <cmath>
#include <fstream>

#include "taskreso/errors.hpp"
#include "taskreso/image.hpp"
#include "test_support.hpp"

using namespace taskreso;
using testsupport::ScratchDir;

namespace {

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality = 95) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &buf, &size);
  cinfo.image_width = img.width();
  cinfo.image_height = img.height();
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<std::uint8_t> row;
  while (cinfo.next_scanline < cinfo.image_height) {
    auto px = img.pixels().subspan(static_cast<std::size_t>(cinfo.next_scanline) * img.width() * 3,
                                   img.width() * 3);
    row.assign(px.begin(), px.end());
    JSAMPROW r = row.data();
    jpeg_write_scanlines(&cinfo, &r, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out(buf, buf + size);
  free(buf);
  return out;
}

// Independent sRGB (D65) -> CIELAB reference.
std::array<double, 3> lab_oracle(double r, double g, double b) {
  auto lin = [](double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double R = lin(r), G = lin(g), B = lin(b);
  const double X = (0.4124 * R + 0.3576 * G + 0.1805 * B) / 0.95047;
  const double Y = (0.2126 * R + 0.7152 * G + 0.0722 * B) / 1.0;
  const double Z = (0.0193 * R + 0.1192 * G + 0.9505 * B) / 1.08883;
  auto f = [](double t) {
    return t > 216.0 / 24389.0 ? std::cbrt(t) : (24389.0 / 27.0 * t + 16.0) / 116.0;
  };
  return {116.0 * f(Y) - 16.0, 500.0 * (f(X) - f(Y)), 200.0 * (f(Y) - f(Z))};
}

}  // namespace

TEST_CASE("png decode of a 2x2 black image") {
  const Image black(2, 2);
  const auto bytes = encode_png(black);
  const Image got = decode_image(bytes);
  CHECK(got.width() == 2);
  CHECK(got.height() == 2);
  for (auto p : got.pixels()) CHECK(p == 0);
}

TEST_CASE("png round trip through a file") {
  ScratchDir dir("png");
  const Image img = testsupport::noise_image(17, 9, 3);
  save_png(img, dir / "a.png");
  CHECK(load_image(dir / "a.png") == img);
}

TEST_CASE("png with alpha keeps the color channels") {
  // Hand-built 1x1 RGBA PNG through libpng's simplified API.
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = 1;
  pi.height = 1;
  pi.format = PNG_FORMAT_RGBA;
  const std::uint8_t px[4] = {10, 200, 30, 255};
  png_alloc_size_t size = 0;
  REQUIRE(png_image_write_get_memory_size(pi, size, 0, px, 0, nullptr));
  std::vector<std::uint8_t> buf(size);
  REQUIRE(png_image_write_to_memory(&pi, buf.data(), &size, 0, px, 0, nullptr));
  buf.resize(size);
  const Image got = decode_image(buf);
  CHECK(got.at(0, 0, 0) == 10);
  CHECK(got.at(0, 0, 1) == 200);
  CHECK(got.at(0, 0, 2) == 30);
}

TEST_CASE("1x1 jpeg decodes to one triple") {
  const Image one = testsupport::constant_image(1, 1, {90, 140, 200});
  const Image got = decode_image(encode_jpeg(one));
  REQUIRE(got.width() == 1);
  REQUIRE(got.height() == 1);
  // Lossy, so only approximately the source color.
  CHECK(std::abs(int(got.at(0, 0, 0)) - 90) <= 8);
  CHECK(std::abs(int(got.at(0, 0, 1)) - 140) <= 8);
  CHECK(std::abs(int(got.at(0, 0, 2)) - 200) <= 8);
}

TEST_CASE("truncated files raise DecodeError") {
  const Image img = testsupport::noise_image(32, 32, 9);
  auto png = encode_png(img);
  png.resize(png.size() / 2);
  CHECK_THROWS_AS(decode_image(png), DecodeError);
  auto jpg = encode_jpeg(img);
  jpg.resize(jpg.size() / 2);
  CHECK_THROWS_AS(decode_image(jpg), DecodeError);
  const std::vector<std::uint8_t> junk = {'n', 'o', 't', 'a', 'n', 'i', 'm', 'g'};
  CHECK_THROWS_AS(decode_image(junk), DecodeError);
  CHECK_THROWS_AS(decode_image(std::vector<std::uint8_t>{}), DecodeError);
}

TEST_CASE("missing file raises IoError") {
  CHECK_THROWS_AS(load_image("/nonexistent/dir/x.png"), IoError);
}

TEST_CASE("resize to the same size is a copy") {
  const Image img = testsupport::noise_image(13, 7, 1);
  CHECK(resize(img, 13, 7) == img);
}

TEST_CASE("resize preserves constant color") {
  const Image img = testsupport::constant_image(5, 3, {12, 99, 201});
  for (auto [w, h] : {std::pair{1u, 1u}, {9u, 4u}, {112u, 112u}, {2u, 7u}}) {
    const Image out = resize(img, w, h);
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        CHECK(out.at(x, y, 0) == 12);
        CHECK(out.at(x, y, 1) == 99);
        CHECK(out.at(x, y, 2) == 201);
      }
  }
}

TEST_CASE("bilinear upsample follows the half-pixel mapping") {
  // Oracle: src = (dst + 0.5) * in/out - 0.5, clamped to [0, in-1], then lerp.
  std::vector<std::uint8_t> px = {0, 0, 0, 255, 255, 255};
  const Image img(2, 1, std::move(px));
  const Image out = resize(img, 4, 1);
  for (std::uint32_t x = 0; x < 4; ++x) {
    double s = (x + 0.5) * 2.0 / 4.0 - 0.5;
    s = std::clamp(s, 0.0, 1.0);
    const auto expect = static_cast<int>(std::lround(255.0 * s));
    CHECK(out.at(x, 0, 0) == expect);
  }
  CHECK(out.at(0, 0, 0) == 0);
  CHECK(out.at(1, 0, 0) == 64);
  CHECK(out.at(2, 0, 0) == 191);
  CHECK(out.at(3, 0, 0) == 255);
}

TEST_CASE("rgb to lab reference points") {
  auto white = rgb_to_lab(255, 255, 255);
  CHECK(white[0] == doctest::Approx(100.0).epsilon(1e-3));
  CHECK(std::abs(white[1]) < 1e-2);
  CHECK(std::abs(white[2]) < 1e-2);
  auto black = rgb_to_lab(0, 0, 0);
  CHECK(black[0] == 0.0);
  CHECK(black[1] == 0.0);
  CHECK(black[2] == 0.0);
  auto red = rgb_to_lab(255, 0, 0);
  CHECK(red[0] == doctest::Approx(53.24).epsilon(2e-4));
  CHECK(red[1] == doctest::Approx(80.09).epsilon(2e-4));
  CHECK(red[2] == doctest::Approx(67.20).epsilon(2e-4));
}

TEST_CASE("rgb to lab agrees with an independent formula across the cube") {
  for (int r = 0; r < 256; r += 51)
    for (int g = 0; g < 256; g += 51)
      for (int b = 0; b < 256; b += 51) {
        const auto got = rgb_to_lab(r, g, b);
        const auto want = lab_oracle(r, g, b);
        // The oracle uses 4-digit matrix coefficients.
        for (int c = 0; c < 3; ++c) CHECK(std::abs(got[c] - want[c]) < 0.05);
        const auto back = lab_to_rgb(got[0], got[1], got[2]);
        CHECK(std::abs(back[0] - r) < 1e-6);
        CHECK(std::abs(back[1] - g) < 1e-6);
        CHECK(std::abs(back[2] - b) < 1e-6);
      }
}

TEST_CASE("image lab features are row-major triples") {
  const Image img = testsupport::noise_image(4, 3, 5);
  const auto f = rgb_to_lab(img);
  REQUIRE(f.n == 12);
  REQUIRE(f.data.size() == 36);
  const auto p = rgb_to_lab(img.at(2, 1, 0), img.at(2, 1, 1), img.at(2, 1, 2));
  const std::size_t i = 1 * 4 + 2;
  for (int c = 0; c < 3; ++c) CHECK(f.data[i * 3 + c] == p[c]);
}

TEST_CASE("patch histograms") {
  SUBCASE("uniform map is one-hot") {
    LabelMap m{5, 5, std::vector<std::uint32_t>(25, 2)};
    for (std::uint32_t patch : {1u, 2u, 3u, 5u, 8u}) {
      for (const auto& h : patch_histograms(m, 4, patch)) {
        CHECK(h == std::vector<double>{0, 0, 1, 0});
      }
    }
  }
  SUBCASE("2x2 diagonal map") {
    LabelMap m{2, 2, {0, 1, 1, 0}};
    const auto hs = patch_histograms(m, 2, 2);
    REQUIRE(hs.size() == 1);
    CHECK(hs[0] == std::vector<double>{0.5, 0.5});
  }
  SUBCASE("4x4 checkerboard gives four balanced patches") {
    LabelMap m{4, 4, {}};
    for (std::uint32_t y = 0; y < 4; ++y)
      for (std::uint32_t x = 0; x < 4; ++x) m.labels.push_back((x + y) % 2);
    const auto hs = patch_histograms(m, 2, 2);
    REQUIRE(hs.size() == 4);
    for (const auto& h : hs) CHECK(h == std::vector<double>{0.5, 0.5});
  }
  SUBCASE("ragged edges are padded by replication") {
    // 3x1 map [0,0,1], patch 2: second patch covers x=2 and padded x=3 (copy of x=2).
    LabelMap m{3, 1, {0, 0, 1}};
    const auto hs = patch_histograms(m, 2, 2);
    REQUIRE(hs.size() == 2);
    CHECK(hs[0] == std::vector<double>{1.0, 0.0});
    CHECK(hs[1] == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("bad arguments") {
    LabelMap m{2, 2, {0, 1, 1, 3}};
    CHECK_THROWS_AS(patch_histograms(m, 2, 2), InvalidArg);
    CHECK_THROWS_AS(patch_histograms(m, 0, 2), InvalidArg);
    CHECK_THROWS_AS(patch_histograms(m, 4, 0), InvalidArg);
  }
}

TEST_CASE("image constructor validates sizes") {
  CHECK_THROWS_AS(Image(0, 3), InvalidArg);
  CHECK_THROWS_AS(Image(2, 2, std::vector<std::uint8_t>(11)), InvalidArg);
}
