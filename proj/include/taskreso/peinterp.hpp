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
#include <vector>

namespace taskreso {

/// Square p x p grid of d-dimensional position embeddings, plus prefix rows
/// (class tokens etc.) that carry no spatial position.
struct EmbeddingGrid {
  std::uint32_t p = 0;
  std::uint32_t d = 0;
  std::uint32_t n_prefix = 0;
  std::vector<float> prefix;  // n_prefix x d
  std::vector<float> grid;    // p x p x d, row-major (row, column, dim)

  /// Throws InvalidArg on shape mismatch or non-finite values.
  void validate() const;

  float at(std::uint32_t row, std::uint32_t col, std::uint32_t dim) const {
    return grid[(static_cast<std::size_t>(row) * p + col) * d + dim];
  }
  float& at(std::uint32_t row, std::uint32_t col, std::uint32_t dim) {
    return grid[(static_cast<std::size_t>(row) * p + col) * d + dim];
  }

  bool operator==(const EmbeddingGrid&) const = default;
};

/// Patches per side for a square input; throws NotDivisible unless exact.
std::uint32_t patch_count(std::uint32_t resolution, std::uint32_t patch_size = 14);

/// Catmull-Rom (a = -0.5) weights for the four taps around a sample with
/// fractional offset `frac` in [0, 1). The last weight is 1 minus the others,
/// so they always sum to exactly 1.
std::array<double, 4> catmull_rom_weights(double frac);

/// Separable bicubic resample of every embedding dimension to target_p per
/// side, half-pixel centers, edge-clamped taps. Prefix rows are copied.
/// Throws InvalidArg if target_p == 0.
EmbeddingGrid interpolate_grid(const EmbeddingGrid& src, std::uint32_t target_p,
                               unsigned threads = 1);

// PEGRID on-disk layout (little-endian):
//   "PEG1" | u16 version = 1 | u16 reserved = 0 | u32 p | u32 d | u32 n_prefix
//   | f32[n_prefix * d] prefix | f32[p * p * d] grid
inline constexpr char kPegridMagic[4] = {'P', 'E', 'G', '1'};
inline constexpr std::uint16_t kPegridVersion = 1;
inline constexpr std::size_t kPegridHeaderSize = 20;

std::vector<std::uint8_t> encode_pegrid(const EmbeddingGrid& grid);
/// Throws FormatError with the offending byte offset.
EmbeddingGrid decode_pegrid(const std::vector<std::uint8_t>& bytes);

/// Throws IoError or FormatError.
EmbeddingGrid read_pegrid(const std::filesystem::path& path);
void write_pegrid(const EmbeddingGrid& grid, const std::filesystem::path& path);

}  // namespace taskreso
