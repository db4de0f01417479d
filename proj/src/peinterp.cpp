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

#include "taskreso/peinterp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "taskreso/errors.hpp"
#include "taskreso/parallel.hpp"

namespace taskreso {

void EmbeddingGrid::validate() const {
  if (p == 0 || d == 0) throw InvalidArg("embedding grid needs p >= 1 and d >= 1");
  if (grid.size() != static_cast<std::size_t>(p) * p * d) {
    throw InvalidArg("grid holds " + std::to_string(grid.size()) + " values, expected p*p*d");
  }
  if (prefix.size() != static_cast<std::size_t>(n_prefix) * d) {
    throw InvalidArg("prefix holds " + std::to_string(prefix.size()) +
                     " values, expected n_prefix*d");
  }
  auto finite = [](float v) { return std::isfinite(v); };
  if (!std::all_of(grid.begin(), grid.end(), finite) ||
      !std::all_of(prefix.begin(), prefix.end(), finite)) {
    throw InvalidArg("embedding grid contains non-finite values");
  }
}

std::uint32_t patch_count(std::uint32_t resolution, std::uint32_t patch_size) {
  if (resolution == 0 || patch_size == 0) throw InvalidArg("resolution and patch size must be positive");
  if (resolution % patch_size != 0) {
    throw NotDivisible("resolution " + std::to_string(resolution) +
                       " is not a multiple of patch size " + std::to_string(patch_size));
  }
  return resolution / patch_size;
}

std::array<double, 4> catmull_rom_weights(double t) {
  constexpr double a = -0.5;
  auto near = [](double x) { return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0; };
  auto far = [](double x) { return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a; };
  const double w0 = far(1.0 + t);
  const double w1 = near(t);
  const double w2 = near(1.0 - t);
  return {w0, w1, w2, 1.0 - (w0 + w1 + w2)};
}

namespace {

struct Taps {
  std::array<std::uint32_t, 4> index;
  std::array<double, 4> weight;
};

std::vector<Taps> make_taps(std::uint32_t src, std::uint32_t dst) {
  std::vector<Taps> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  const auto last = static_cast<std::int64_t>(src) - 1;
  for (std::uint32_t i = 0; i < dst; ++i) {
    const double s = (i + 0.5) * scale - 0.5;
    const double fl = std::floor(s);
    const auto base = static_cast<std::int64_t>(fl);
    taps[i].weight = catmull_rom_weights(s - fl);
    for (int k = 0; k < 4; ++k) {
      taps[i].index[k] = static_cast<std::uint32_t>(std::clamp<std::int64_t>(base - 1 + k, 0, last));
    }
  }
  return taps;
}

}  // namespace

EmbeddingGrid interpolate_grid(const EmbeddingGrid& src, std::uint32_t target_p,
                               unsigned threads) {
  src.validate();
  if (target_p == 0) throw InvalidArg("target_p must be >= 1");
  if (target_p == src.p) return src;

  EmbeddingGrid out;
  out.p = target_p;
  out.d = src.d;
  out.n_prefix = src.n_prefix;
  out.prefix = src.prefix;
  out.grid.resize(static_cast<std::size_t>(target_p) * target_p * src.d);

  const auto taps = make_taps(src.p, target_p);
  parallel_for(src.d, threads, [&](std::size_t dim) {
    const auto k = static_cast<std::uint32_t>(dim);
    // Horizontal pass: src.p rows x target_p columns.
    std::vector<double> tmp(static_cast<std::size_t>(src.p) * target_p);
    for (std::uint32_t r = 0; r < src.p; ++r) {
      for (std::uint32_t c = 0; c < target_p; ++c) {
        const Taps& t = taps[c];
        double v = 0.0;
        for (int j = 0; j < 4; ++j) v += t.weight[j] * src.at(r, t.index[j], k);
        tmp[static_cast<std::size_t>(r) * target_p + c] = v;
      }
    }
    for (std::uint32_t r = 0; r < target_p; ++r) {
      const Taps& t = taps[r];
      for (std::uint32_t c = 0; c < target_p; ++c) {
        double v = 0.0;
        for (int j = 0; j < 4; ++j) v += t.weight[j] * tmp[static_cast<std::size_t>(t.index[j]) * target_p + c];
        out.at(r, c, k) = static_cast<float>(v);
      }
    }
  });
  return out;
}

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_floats(std::vector<std::uint8_t>& b, const std::vector<float>& values) {
  for (float f : values) put_u32(b, std::bit_cast<std::uint32_t>(f));
}

}  // namespace

std::vector<std::uint8_t> encode_pegrid(const EmbeddingGrid& grid) {
  grid.validate();
  std::vector<std::uint8_t> b;
  b.reserve(kPegridHeaderSize + 4 * (grid.prefix.size() + grid.grid.size()));
  b.insert(b.end(), std::begin(kPegridMagic), std::end(kPegridMagic));
  put_u16(b, kPegridVersion);
  put_u16(b, 0);
  put_u32(b, grid.p);
  put_u32(b, grid.d);
  put_u32(b, grid.n_prefix);
  put_floats(b, grid.prefix);
  put_floats(b, grid.grid);
  return b;
}

EmbeddingGrid decode_pegrid(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kPegridMagic, 4) != 0) {
    throw FormatError("byte offset 0: bad magic, expected \"PEG1\"");
  }
  if (bytes.size() < kPegridHeaderSize) {
    throw FormatError("byte offset " + std::to_string(bytes.size()) +
                      ": header truncated, expected " + std::to_string(kPegridHeaderSize) +
                      " bytes");
  }
  const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kPegridVersion) {
    throw FormatError("byte offset 4: unsupported version " + std::to_string(version));
  }
  const auto reserved = static_cast<std::uint16_t>(bytes[6] | (bytes[7] << 8));
  if (reserved != 0) throw FormatError("byte offset 6: reserved field must be 0");

  EmbeddingGrid g;
  g.p = get_u32(bytes.data() + 8);
  g.d = get_u32(bytes.data() + 12);
  g.n_prefix = get_u32(bytes.data() + 16);
  if (g.p == 0) throw FormatError("byte offset 8: p must be >= 1");
  if (g.d == 0) throw FormatError("byte offset 12: d must be >= 1");

  const std::uint64_t n_prefix_vals = static_cast<std::uint64_t>(g.n_prefix) * g.d;
  const std::uint64_t n_grid_vals = static_cast<std::uint64_t>(g.p) * g.p * g.d;
  const std::uint64_t expected = kPegridHeaderSize + 4 * (n_prefix_vals + n_grid_vals);
  if (bytes.size() < expected) {
    throw FormatError("byte offset " + std::to_string(bytes.size()) +
                      ": payload truncated, expected " + std::to_string(expected) +
                      " bytes in total");
  }
  if (bytes.size() > expected) {
    throw FormatError("byte offset " + std::to_string(expected) + ": " +
                      std::to_string(bytes.size() - expected) + " trailing bytes");
  }
  auto read_floats = [&](std::size_t offset, std::uint64_t count, std::vector<float>& out) {
    out.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::size_t at = offset + 4 * i;
      out[i] = std::bit_cast<float>(get_u32(bytes.data() + at));
      if (!std::isfinite(out[i])) {
        throw FormatError("byte offset " + std::to_string(at) + ": non-finite value");
      }
    }
  };
  read_floats(kPegridHeaderSize, n_prefix_vals, g.prefix);
  read_floats(kPegridHeaderSize + 4 * n_prefix_vals, n_grid_vals, g.grid);
  return g;
}

EmbeddingGrid read_pegrid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  try {
    return decode_pegrid(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pegrid(const EmbeddingGrid& grid, const std::filesystem::path& path) {
  const auto bytes = encode_pegrid(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace taskreso
