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

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "taskreso/errors.hpp"
#include "taskreso/peinterp.hpp"
#include "taskreso/rng.hpp"
#include "test_support.hpp"

using namespace taskreso;
using testsupport::ScratchDir;

namespace {

EmbeddingGrid random_grid(std::uint32_t p, std::uint32_t d, std::uint32_t n_prefix,
                          std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingGrid g{p, d, n_prefix, {}, {}};
  for (std::size_t i = 0; i < std::size_t(n_prefix) * d; ++i)
    g.prefix.push_back(static_cast<float>(rng.normal()));
  for (std::size_t i = 0; i < std::size_t(p) * p * d; ++i)
    g.grid.push_back(static_cast<float>(rng.normal()));
  return g;
}

// Keys cubic kernel with a = -0.5.
double keys(double x) {
  x = std::abs(x);
  const double a = -0.5;
  if (x <= 1) return (a + 2) * x * x * x - (a + 3) * x * x + 1;
  if (x < 2) return a * x * x * x - 5 * a * x * x + 8 * a * x - 4 * a;
  return 0;
}

// Direct 2D evaluation: sum over the 4x4 neighbourhood with clamped taps.
double bicubic_oracle(const EmbeddingGrid& g, std::uint32_t dim, std::uint32_t target,
                      std::uint32_t row, std::uint32_t col) {
  const double scale = double(g.p) / target;
  const double sy = (row + 0.5) * scale - 0.5;
  const double sx = (col + 0.5) * scale - 0.5;
  const int y0 = int(std::floor(sy)), x0 = int(std::floor(sx));
  double acc = 0;
  for (int j = -1; j <= 2; ++j)
    for (int i = -1; i <= 2; ++i) {
      const int yy = std::clamp(y0 + j, 0, int(g.p) - 1);
      const int xx = std::clamp(x0 + i, 0, int(g.p) - 1);
      acc += keys(sy - (y0 + j)) * keys(sx - (x0 + i)) * g.at(yy, xx, dim);
    }
  return acc;
}

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}
void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}
void put_f32(std::vector<std::uint8_t>& b, float f) { put_u32(b, std::bit_cast<std::uint32_t>(f)); }

}  // namespace

TEST_CASE("patch count") {
  CHECK(patch_count(336) == 24);
  CHECK(patch_count(448) == 32);
  CHECK(patch_count(224) == 16);
  CHECK(patch_count(560) == 40);
  CHECK(patch_count(672) == 48);
  CHECK(patch_count(384, 16) == 24);
  CHECK_THROWS_AS(patch_count(340), NotDivisible);
  CHECK_THROWS_AS(patch_count(0), InvalidArg);
}

TEST_CASE("catmull-rom weights") {
  for (double f : {0.0, 0.1, 0.25, 0.5, 0.75, 0.999}) {
    const auto w = catmull_rom_weights(f);
    CHECK(w[0] + w[1] + w[2] + w[3] == 1.0);
    CHECK(w[0] == doctest::Approx(keys(1 + f)).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(keys(f)).epsilon(1e-12));
    CHECK(w[2] == doctest::Approx(keys(1 - f)).epsilon(1e-12));
  }
  const auto w0 = catmull_rom_weights(0.0);
  CHECK(w0[1] == 1.0);
  CHECK(w0[0] == 0.0);
}

TEST_CASE("identity at equal size") {
  const auto g = random_grid(7, 5, 1, 3);
  CHECK(interpolate_grid(g, 7) == g);
}

TEST_CASE("constant grids stay constant") {
  EmbeddingGrid g{24, 3, 1, {9.f, 9.f, 9.f}, {}};
  for (std::size_t i = 0; i < 24 * 24; ++i) g.grid.insert(g.grid.end(), {0.25f, -3.5f, 1e3f});
  for (std::uint32_t t : {1u, 5u, 16u, 32u, 48u}) {
    const auto out = interpolate_grid(g, t);
    for (std::uint32_t r = 0; r < t; ++r)
      for (std::uint32_t c = 0; c < t; ++c) {
        CHECK(std::abs(out.at(r, c, 0) - 0.25f) <= 1e-6);
        CHECK(std::abs(out.at(r, c, 1) + 3.5f) <= 1e-6);
        CHECK(std::abs(out.at(r, c, 2) - 1e3f) <= 1e-6 * 1e3);
      }
  }
}

TEST_CASE("ramp 24 -> 32 reproduces the affine map on interior columns") {
  EmbeddingGrid g{24, 2, 0, {}, {}};
  for (std::uint32_t r = 0; r < 24; ++r)
    for (std::uint32_t c = 0; c < 24; ++c) g.grid.insert(g.grid.end(), {float(c), float(r)});
  const auto out = interpolate_grid(g, 32);
  int interior = 0;
  for (std::uint32_t x = 0; x < 32; ++x) {
    const double sx = (x + 0.5) * 24.0 / 32.0 - 0.5;
    // All four taps inside the grid.
    if (std::floor(sx) - 1 < 0 || std::floor(sx) + 2 > 23) continue;
    ++interior;
    for (std::uint32_t y = 0; y < 32; ++y) CHECK(std::abs(out.at(y, x, 0) - sx) < 1e-4);
  }
  CHECK(interior >= 28);
  // Full-grid agreement with a direct 2D kernel sum, edges included.
  for (std::uint32_t y = 0; y < 32; ++y)
    for (std::uint32_t x = 0; x < 32; ++x)
      for (std::uint32_t d = 0; d < 2; ++d)
        CHECK(std::abs(out.at(y, x, d) - bicubic_oracle(g, d, 32, y, x)) < 1e-5);
}

TEST_CASE("random grids match the direct kernel sum") {
  const auto g = random_grid(9, 3, 2, 8);
  for (std::uint32_t t : {4u, 13u, 20u}) {
    const auto out = interpolate_grid(g, t);
    CHECK(out.prefix == g.prefix);
    for (std::uint32_t y = 0; y < t; ++y)
      for (std::uint32_t x = 0; x < t; ++x)
        for (std::uint32_t d = 0; d < 3; ++d)
          CHECK(std::abs(out.at(y, x, d) - bicubic_oracle(g, d, t, y, x)) < 1e-5);
  }
}

TEST_CASE("interpolation is linear") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint32_t p = 2 + rng.below(12), t = 1 + rng.below(20);
    const auto a = random_grid(p, 4, 1, 100 + trial);
    const auto b = random_grid(p, 4, 1, 200 + trial);
    const float alpha = float(rng.uniform() * 4 - 2), beta = float(rng.uniform() * 4 - 2);
    EmbeddingGrid mix = a;
    for (std::size_t i = 0; i < mix.grid.size(); ++i) mix.grid[i] = alpha * a.grid[i] + beta * b.grid[i];
    const auto ia = interpolate_grid(a, t), ib = interpolate_grid(b, t), im = interpolate_grid(mix, t);
    for (std::size_t i = 0; i < im.grid.size(); ++i)
      CHECK(std::abs(im.grid[i] - (alpha * ia.grid[i] + beta * ib.grid[i])) < 1e-5);
  }
}

TEST_CASE("overshoot stays within a quarter of the range") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_grid(6, 2, 0, seed);
    const auto out = interpolate_grid(g, 17);
    for (std::uint32_t d = 0; d < 2; ++d) {
      float lo = INFINITY, hi = -INFINITY, olo = INFINITY, ohi = -INFINITY;
      for (std::uint32_t r = 0; r < 6; ++r)
        for (std::uint32_t c = 0; c < 6; ++c) lo = std::min(lo, g.at(r, c, d)), hi = std::max(hi, g.at(r, c, d));
      for (std::uint32_t r = 0; r < 17; ++r)
        for (std::uint32_t c = 0; c < 17; ++c)
          olo = std::min(olo, out.at(r, c, d)), ohi = std::max(ohi, out.at(r, c, d));
      CHECK(olo >= lo - 0.25f * (hi - lo));
      CHECK(ohi <= hi + 0.25f * (hi - lo));
    }
  }
}

TEST_CASE("thread count does not change the result") {
  const auto g = random_grid(24, 16, 1, 77);
  const auto one = interpolate_grid(g, 32, 1);
  CHECK(interpolate_grid(g, 32, 4) == one);
  CHECK(interpolate_grid(g, 32, 0) == one);
}

TEST_CASE("invalid grids") {
  const auto g = random_grid(4, 2, 0, 1);
  CHECK_THROWS_AS(interpolate_grid(g, 0), InvalidArg);
  EmbeddingGrid bad = g;
  bad.grid.pop_back();
  CHECK_THROWS_AS(interpolate_grid(bad, 3), InvalidArg);
  bad = g;
  bad.grid[0] = NAN;
  CHECK_THROWS_AS(interpolate_grid(bad, 3), InvalidArg);
}

TEST_CASE("pegrid layout matches a hand-built file") {
  EmbeddingGrid g{2, 1, 1, {0.5f}, {1.f, 2.f, 3.f, -4.f}};
  std::vector<std::uint8_t> want = {'P', 'E', 'G', '1'};
  put_u16(want, 1);
  put_u16(want, 0);
  put_u32(want, 2);
  put_u32(want, 1);
  put_u32(want, 1);
  for (float f : {0.5f, 1.f, 2.f, 3.f, -4.f}) put_f32(want, f);
  CHECK(encode_pegrid(g) == want);
  CHECK(decode_pegrid(want) == g);
}

TEST_CASE("pegrid file round trip is bit exact") {
  ScratchDir dir("peg");
  auto g = random_grid(24, 8, 1, 12);
  g.grid[3] = -0.0f;
  g.grid[4] = 1e-40f;  // subnormal
  write_pegrid(g, dir / "a.peg");
  const auto back = read_pegrid(dir / "a.peg");
  REQUIRE(back.grid.size() == g.grid.size());
  CHECK(std::memcmp(back.grid.data(), g.grid.data(), g.grid.size() * 4) == 0);
  CHECK(back == g);
  CHECK_THROWS_AS(read_pegrid(dir / "missing.peg"), IoError);
}

TEST_CASE("pegrid decode errors") {
  const auto good = encode_pegrid(random_grid(3, 2, 1, 4));
  auto expect_format = [](std::vector<std::uint8_t> bytes, const std::string& needle) {
    try {
      decode_pegrid(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  SUBCASE("wrong magic") {
    auto b = good;
    b[0] = 'X';
    expect_format(b, "\"PEG1\"");
  }
  SUBCASE("truncated payload") {
    auto b = good;
    b.resize(b.size() - 3);
    expect_format(b, "offset");
  }
  SUBCASE("truncated header") { expect_format({'P', 'E', 'G', '1', 1}, "header"); }
  SUBCASE("bad version") {
    auto b = good;
    b[4] = 2;
    expect_format(b, "version");
  }
  SUBCASE("trailing bytes") {
    auto b = good;
    b.push_back(0);
    expect_format(b, "trailing");
  }
  SUBCASE("zero dimension") {
    auto b = good;
    b[8] = b[9] = b[10] = b[11] = 0;
    expect_format(b, "p");
  }
}
