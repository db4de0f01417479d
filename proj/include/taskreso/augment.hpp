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
#include <span>
#include <string_view>
#include <vector>

#include "taskreso/image.hpp"

namespace taskreso {

enum class AugOp : std::uint8_t {
  kIdentity,
  kAutoContrast,
  kEqualize,
  kRotate,
  kSolarize,
  kColor,
  kPosterize,
  kContrast,
  kBrightness,
  kSharpness,
  kShearX,
  kShearY,
  kTranslateX,
  kTranslateY,
};

inline constexpr std::array<AugOp, 14> kAllAugOps = {
    AugOp::kIdentity,  AugOp::kAutoContrast, AugOp::kEqualize,   AugOp::kRotate,
    AugOp::kSolarize,  AugOp::kColor,        AugOp::kPosterize,  AugOp::kContrast,
    AugOp::kBrightness, AugOp::kSharpness,   AugOp::kShearX,     AugOp::kShearY,
    AugOp::kTranslateX, AugOp::kTranslateY,
};

std::string_view aug_op_name(AugOp op);

/// True for ops whose parameter is mirrored by a random sign.
bool aug_op_is_signed(AugOp op);

struct AugmentConfig {
  std::uint32_t n_ops = 3;
  std::uint32_t magnitude = 10;  // bin in [0, 30]
  std::uint64_t seed = 0;
  std::array<std::uint8_t, 3> fill = {128, 128, 128};
  /// Pool ops are drawn from; defaults to all 14.
  std::vector<AugOp> pool{kAllAugOps.begin(), kAllAugOps.end()};

  void validate() const;
};

inline constexpr std::uint32_t kMaxMagnitude = 30;

/// One planned step: the op plus its sign (+1 / -1; always +1 for unsigned ops).
struct AugStep {
  AugOp op;
  int sign;
};

/// The op sequence rand_augment will apply for `cfg`.
std::vector<AugStep> plan_augment(const AugmentConfig& cfg);

/// Applies a single op at `magnitude` (0..30) with the given sign.
///
/// Magnitude tables (m = magnitude / 30):
///   rotate       sign * 30 deg * m
///   solarize     invert channels >= 256 - 256 m
///   posterize    keep 8 - round(4 m) bits
///   color, contrast, brightness, sharpness
///                enhance factor 1 + sign * 0.9 m
///   shear-x/y    shear coefficient sign * 0.3 m
///   translate-x/y  sign * 0.45 m * (width or height) pixels
/// auto-contrast, equalize and identity ignore the magnitude.
Image apply_aug_op(const Image& img, AugOp op, std::uint32_t magnitude, int sign,
                   std::array<std::uint8_t, 3> fill);

/// Sequentially applies cfg.n_ops ops drawn uniformly from cfg.pool.
Image rand_augment(const Image& img, const AugmentConfig& cfg);

/// One independent augmentation per seed, in seed order.
std::vector<Image> augment_replicates(const Image& img, const AugmentConfig& base_cfg,
                                      std::span<const std::uint64_t> replicate_seeds);

// Individual primitives, exposed for reuse and testing.

/// Rotates counter-clockwise by `degrees` about the image center
/// (nearest-neighbour, out-of-range pixels take `fill`).
Image rotate(const Image& img, double degrees, std::array<std::uint8_t, 3> fill);
/// Inverse-mapped affine warp: dst(x, y) samples src at
/// (a*x + b*y + c, d*x + e*y + f) with nearest-neighbour rounding.
Image affine_nearest(const Image& img, const std::array<double, 6>& inverse,
                     std::array<std::uint8_t, 3> fill);
Image auto_contrast(const Image& img);
Image equalize(const Image& img);
Image solarize(const Image& img, int threshold);
Image posterize(const Image& img, int bits);
/// factor 0 -> degenerate image, 1 -> original, linear extrapolation beyond.
Image enhance_color(const Image& img, double factor);
Image enhance_contrast(const Image& img, double factor);
Image enhance_brightness(const Image& img, double factor);
Image enhance_sharpness(const Image& img, double factor);

}  // namespace taskreso
