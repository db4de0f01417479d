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

#include "taskreso/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "taskreso/errors.hpp"
#include "taskreso/rng.hpp"

namespace taskreso {

namespace {

std::uint8_t clamp_round(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

Image apply_lut(const Image& img, const std::array<std::array<std::uint8_t, 256>, 3>& lut) {
  Image out = img;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = lut[i % 3][px[i]];
  return out;
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((r * 19595u + g * 38470u + b * 7471u + 0x8000u) >> 16);
}

Image blend(const Image& degenerate, const Image& img, double factor) {
  Image out = img;
  const auto src = img.pixels();
  const auto deg = degenerate.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = clamp_round(deg[i] + factor * (static_cast<double>(src[i]) - deg[i]));
  }
  return out;
}

}  // namespace

std::string_view aug_op_name(AugOp op) {
  switch (op) {
    case AugOp::kIdentity: return "identity";
    case AugOp::kAutoContrast: return "auto_contrast";
    case AugOp::kEqualize: return "equalize";
    case AugOp::kRotate: return "rotate";
    case AugOp::kSolarize: return "solarize";
    case AugOp::kColor: return "color";
    case AugOp::kPosterize: return "posterize";
    case AugOp::kContrast: return "contrast";
    case AugOp::kBrightness: return "brightness";
    case AugOp::kSharpness: return "sharpness";
    case AugOp::kShearX: return "shear_x";
    case AugOp::kShearY: return "shear_y";
    case AugOp::kTranslateX: return "translate_x";
    case AugOp::kTranslateY: return "translate_y";
  }
  return "unknown";
}

bool aug_op_is_signed(AugOp op) {
  switch (op) {
    case AugOp::kRotate:
    case AugOp::kColor:
    case AugOp::kContrast:
    case AugOp::kBrightness:
    case AugOp::kSharpness:
    case AugOp::kShearX:
    case AugOp::kShearY:
    case AugOp::kTranslateX:
    case AugOp::kTranslateY:
      return true;
    default:
      return false;
  }
}

void AugmentConfig::validate() const {
  if (n_ops < 1) throw InvalidArg("n_ops must be >= 1");
  if (magnitude > kMaxMagnitude) throw InvalidArg("magnitude must lie in [0, 30]");
  if (pool.empty()) throw InvalidArg("augmentation op pool is empty");
}

Image affine_nearest(const Image& img, const std::array<double, 6>& inv,
                     std::array<std::uint8_t, 3> fill) {
  Image out(img.width(), img.height(), fill);
  const double w = img.width();
  const double h = img.height();
  for (std::uint32_t y = 0; y < img.height(); ++y) {
    for (std::uint32_t x = 0; x < img.width(); ++x) {
      const double sx = std::floor(inv[0] * x + inv[1] * y + inv[2] + 0.5);
      const double sy = std::floor(inv[3] * x + inv[4] * y + inv[5] + 0.5);
      if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
      const auto ix = static_cast<std::uint32_t>(sx);
      const auto iy = static_cast<std::uint32_t>(sy);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(ix, iy, c);
    }
  }
  return out;
}

Image rotate(const Image& img, double degrees, std::array<std::uint8_t, 3> fill) {
  const double t = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(t);
  const double sn = std::sin(t);
  const double cx = (img.width() - 1) / 2.0;
  const double cy = (img.height() - 1) / 2.0;
  // src = c + R * (dst - c), R = [cos -sin; sin cos]
  return affine_nearest(img, {cs, -sn, cx - cs * cx + sn * cy, sn, cs, cy - sn * cx - cs * cy},
                        fill);
}

Image auto_contrast(const Image& img) {
  std::array<std::array<std::uint8_t, 256>, 3> lut{};
  const auto px = img.pixels();
  for (int c = 0; c < 3; ++c) {
    int lo = 255;
    int hi = 0;
    for (std::size_t i = c; i < px.size(); i += 3) {
      lo = std::min<int>(lo, px[i]);
      hi = std::max<int>(hi, px[i]);
    }
    for (int v = 0; v < 256; ++v) {
      lut[c][v] = hi <= lo ? static_cast<std::uint8_t>(v)
                           : clamp_round((v - lo) * 255.0 / (hi - lo));
    }
  }
  return apply_lut(img, lut);
}

Image equalize(const Image& img) {
  std::array<std::array<std::uint8_t, 256>, 3> lut{};
  const auto px = img.pixels();
  for (int c = 0; c < 3; ++c) {
    std::array<std::size_t, 256> hist{};
    for (std::size_t i = c; i < px.size(); i += 3) ++hist[px[i]];
    std::size_t last_nonzero = 0;
    std::size_t total = 0;
    for (int v = 0; v < 256; ++v) {
      total += hist[v];
      if (hist[v] != 0) last_nonzero = hist[v];
    }
    const std::size_t step = (total - last_nonzero) / 255;
    if (step == 0) {
      for (int v = 0; v < 256; ++v) lut[c][v] = static_cast<std::uint8_t>(v);
      continue;
    }
    std::size_t acc = step / 2;
    for (int v = 0; v < 256; ++v) {
      lut[c][v] = static_cast<std::uint8_t>(std::min<std::size_t>(acc / step, 255));
      acc += hist[v];
    }
  }
  return apply_lut(img, lut);
}

Image solarize(const Image& img, int threshold) {
  Image out = img;
  for (auto& v : out.pixels()) {
    if (v >= threshold) v = static_cast<std::uint8_t>(255 - v);
  }
  return out;
}

Image posterize(const Image& img, int bits) {
  bits = std::clamp(bits, 1, 8);
  const auto mask = static_cast<std::uint8_t>(~((1u << (8 - bits)) - 1u));
  Image out = img;
  for (auto& v : out.pixels()) v &= mask;
  return out;
}

Image enhance_color(const Image& img, double factor) {
  Image gray = img;
  auto px = gray.pixels();
  for (std::size_t i = 0; i < px.size(); i += 3) {
    const auto l = luma(px[i], px[i + 1], px[i + 2]);
    px[i] = px[i + 1] = px[i + 2] = l;
  }
  return blend(gray, img, factor);
}

Image enhance_contrast(const Image& img, double factor) {
  const auto px = img.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < px.size(); i += 3) sum += luma(px[i], px[i + 1], px[i + 2]);
  const auto mean = static_cast<std::uint8_t>(
      std::lround(sum / (static_cast<double>(img.width()) * img.height())));
  return blend(Image(img.width(), img.height(), std::array<std::uint8_t, 3>{mean, mean, mean}), img, factor);
}

Image enhance_brightness(const Image& img, double factor) {
  return blend(Image(img.width(), img.height()), img, factor);
}

Image enhance_sharpness(const Image& img, double factor) {
  // 3x3 smoothing kernel (center 5, ring 1, /13); border pixels untouched.
  Image smooth = img;
  if (img.width() > 2 && img.height() > 2) {
    for (std::uint32_t y = 1; y + 1 < img.height(); ++y) {
      for (std::uint32_t x = 1; x + 1 < img.width(); ++x) {
        for (int c = 0; c < 3; ++c) {
          int acc = 4 * img.at(x, y, c);
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) acc += img.at(x + dx, y + dy, c);
          }
          smooth.at(x, y, c) = clamp_round(acc / 13.0);
        }
      }
    }
  }
  return blend(smooth, img, factor);
}

Image apply_aug_op(const Image& img, AugOp op, std::uint32_t magnitude, int sign,
                   std::array<std::uint8_t, 3> fill) {
  if (magnitude > kMaxMagnitude) throw InvalidArg("magnitude must lie in [0, 30]");
  const double m = static_cast<double>(magnitude) / kMaxMagnitude;
  const double s = sign < 0 ? -1.0 : 1.0;
  const double cx = (img.width() - 1) / 2.0;
  const double cy = (img.height() - 1) / 2.0;
  switch (op) {
    case AugOp::kIdentity: return img;
    case AugOp::kAutoContrast: return auto_contrast(img);
    case AugOp::kEqualize: return equalize(img);
    case AugOp::kRotate: return rotate(img, s * 30.0 * m, fill);
    case AugOp::kSolarize: return solarize(img, static_cast<int>(std::lround(256.0 - 256.0 * m)));
    case AugOp::kPosterize: return posterize(img, 8 - static_cast<int>(std::lround(4.0 * m)));
    case AugOp::kColor: return enhance_color(img, 1.0 + s * 0.9 * m);
    case AugOp::kContrast: return enhance_contrast(img, 1.0 + s * 0.9 * m);
    case AugOp::kBrightness: return enhance_brightness(img, 1.0 + s * 0.9 * m);
    case AugOp::kSharpness: return enhance_sharpness(img, 1.0 + s * 0.9 * m);
    case AugOp::kShearX: {
      const double k = s * 0.3 * m;
      return affine_nearest(img, {1.0, k, -k * cy, 0.0, 1.0, 0.0}, fill);
    }
    case AugOp::kShearY: {
      const double k = s * 0.3 * m;
      return affine_nearest(img, {1.0, 0.0, 0.0, k, 1.0, -k * cx}, fill);
    }
    case AugOp::kTranslateX:
      return affine_nearest(img, {1.0, 0.0, -s * 0.45 * m * img.width(), 0.0, 1.0, 0.0}, fill);
    case AugOp::kTranslateY:
      return affine_nearest(img, {1.0, 0.0, 0.0, 0.0, 1.0, -s * 0.45 * m * img.height()}, fill);
  }
  return img;
}

std::vector<AugStep> plan_augment(const AugmentConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<AugStep> steps;
  steps.reserve(cfg.n_ops);
  for (std::uint32_t i = 0; i < cfg.n_ops; ++i) {
    const AugOp op = cfg.pool[static_cast<std::size_t>(rng.below(cfg.pool.size()))];
    const bool negative = rng.coin();
    steps.push_back({op, aug_op_is_signed(op) && negative ? -1 : 1});
  }
  return steps;
}

Image rand_augment(const Image& img, const AugmentConfig& cfg) {
  Image out = img;
  for (const AugStep& step : plan_augment(cfg)) {
    out = apply_aug_op(out, step.op, cfg.magnitude, step.sign, cfg.fill);
  }
  return out;
}

std::vector<Image> augment_replicates(const Image& img, const AugmentConfig& base_cfg,
                                      std::span<const std::uint64_t> replicate_seeds) {
  if (replicate_seeds.empty()) throw InvalidArg("augment_replicates: no seeds");
  std::vector<Image> out;
  out.reserve(replicate_seeds.size());
  AugmentConfig cfg = base_cfg;
  for (std::uint64_t seed : replicate_seeds) {
    cfg.seed = seed;
    out.push_back(rand_augment(img, cfg));
  }
  return out;
}

}  // namespace taskreso
