#pragma once

// Training-data tools: sparse per-video frame sampling, intensity
// normalization and the seeded augmentation pipeline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aopkit/ellipse.hpp"
#include "aopkit/errors.hpp"
#include "aopkit/raster.hpp"
#include "aopkit/rng.hpp"

namespace aopkit {

struct VideoInfo {
  std::string id;
  int length = 0;
  int label = 0;  // 1 positive, 0 negative
};

struct VideoSample {
  std::string id;
  int label = 0;
  std::vector<int> frames;  // ascending
};

struct SamplePlan {
  std::vector<VideoSample> videos;
  std::vector<std::string> warnings;
};

inline constexpr int kDefaultPositiveFrames = 5;
inline constexpr int kDefaultNegativeFrames = 8;

/// FNV-1a, used to key random streams by video id.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Splits each video into n equal strata and draws one frame per stratum.
/// Videos shorter than the request contribute every frame and a warning.
inline SamplePlan sparse_sample(const std::vector<VideoInfo>& videos,
                                int n_pos = kDefaultPositiveFrames,
                                int n_neg = kDefaultNegativeFrames, std::uint64_t seed = 0) {
  if (n_pos < 1 || n_neg < 1) throw InvalidArgument("frame counts must be at least 1");
  SamplePlan plan;
  for (const auto& v : videos) {
    if (v.length < 0) throw InvalidArgument("video " + v.id + " has negative length");
    const int n = v.label ? n_pos : n_neg;
    VideoSample s{v.id, v.label, {}};
    if (v.length <= n) {
      if (v.length < n) {
        plan.warnings.push_back("video " + v.id + " has " + std::to_string(v.length) +
                                " frames, fewer than the " + std::to_string(n) +
                                " requested; taking all");
      }
      for (int f = 0; f < v.length; ++f) s.frames.push_back(f);
    } else {
      rng::Stream r({seed, fnv1a(v.id)});
      for (int k = 0; k < n; ++k) {
        const long lo = static_cast<long>(k) * v.length / n;
        const long hi = static_cast<long>(k + 1) * v.length / n - 1;
        s.frames.push_back(static_cast<int>(r.uniform_int(lo, hi)));
      }
    }
    plan.videos.push_back(std::move(s));
  }
  return plan;
}

inline Grid<double> normalize_intensity(const Grid<std::uint8_t>& img) {
  Grid<double> out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i] / 255.0;
  return out;
}

inline Grid<std::uint8_t> to_8bit(const Grid<double>& img) {
  Grid<std::uint8_t> out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img[i], 0.0, 1.0) * 255.0));
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct AugmentParams {
  double flip_prob = 0.5;
  double noise_prob = 0.5;
  Range noise_sigma{1.18e-2, 5.88e-2};
  double gamma_prob = 0.5;
  Range gamma{0.4, 1.0};
  double contrast_prob = 0.5;
  Range contrast{0.8, 1.2};
  double affine_prob = 0.6;
  double translate = 0.1;  // fraction of width / height, symmetric
  double rotate_deg = 20.0;
  Range scale{1.0, 1.3};
  std::uint64_t seed = 0;

  void validate() const {
    for (double p : {flip_prob, noise_prob, gamma_prob, contrast_prob, affine_prob}) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("augmentation probability outside [0,1]");
    }
    for (Range r : {noise_sigma, gamma, contrast, scale}) {
      if (!(r.lo <= r.hi)) throw InvalidArgument("augmentation range is not ordered");
    }
    if (noise_sigma.lo < 0.0 || gamma.lo <= 0.0 || contrast.lo < 0.0 || scale.lo <= 0.0) {
      throw InvalidArgument("augmentation range out of domain");
    }
    if (translate < 0.0 || rotate_deg < 0.0) throw InvalidArgument("negative affine extent");
  }
};

enum class Transform : std::uint64_t { flip = 1, noise, gamma, contrast, affine };

struct AppliedTransforms {
  bool flip = false;
  std::optional<double> noise_sigma;
  std::optional<double> gamma;
  std::optional<double> contrast;
  bool affine = false;
  double rotate_deg = 0.0;
  double scale = 1.0;
  double tx = 0.0, ty = 0.0;
};

struct Augmented {
  Grid<double> image;
  std::optional<LabelMask> mask;
  AppliedTransforms applied;
};

template <typename T>
Grid<T> flip_horizontal(const Grid<T>& g) {
  Grid<T> out(g.width(), g.height());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) out(x, y) = g(g.width() - 1 - x, y);
  }
  return out;
}

inline LabelMask flip_horizontal(const LabelMask& m) {
  return LabelMask(flip_horizontal(static_cast<const Grid<std::uint8_t>&>(m)));
}

namespace detail {

inline void clip_unit(Grid<double>& g) {
  for (auto& v : g.data()) v = std::clamp(v, 0.0, 1.0);
}

/// Maps an output pixel center to source coordinates for a rotation by
/// `deg` and scale `s` about the image center followed by translation.
struct InverseAffine {
  double c, s, cx, cy, tx, ty;
  InverseAffine(int w, int h, double deg, double scale, double tx_, double ty_)
      : c(std::cos(deg2rad(deg)) / scale), s(std::sin(deg2rad(deg)) / scale),
        cx(0.5 * w), cy(0.5 * h), tx(tx_), ty(ty_) {}
  Point operator()(double x, double y) const {
    const double dx = x - cx - tx, dy = y - cy - ty;
    return {c * dx + s * dy + cx, -s * dx + c * dy + cy};
  }
};

inline double bilinear(const Grid<double>& g, Point p) {
  const double fx = p.x - 0.5, fy = p.y - 0.5;
  const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
  const double ax = fx - x0, ay = fy - y0;
  auto v = [&](int x, int y) { return g.in_bounds(x, y) ? g(x, y) : 0.0; };
  return (1 - ay) * ((1 - ax) * v(x0, y0) + ax * v(x0 + 1, y0)) +
         ay * ((1 - ax) * v(x0, y0 + 1) + ax * v(x0 + 1, y0 + 1));
}

}  // namespace detail

/// Applies flip, noise, gamma, contrast and affine in that order, each with its
/// own probability. Every draw is keyed by (seed, sample_index, transform).
inline Augmented augment(const Grid<double>& img, const std::optional<LabelMask>& mask,
                         const AugmentParams& p, std::uint64_t sample_index) {
  p.validate();
  if (mask) require_same_shape(img, *mask, "augment");
  auto stream = [&](Transform t) {
    return rng::Stream({p.seed, sample_index, static_cast<std::uint64_t>(t)});
  };
  Augmented out{img, mask, {}};
  const int w = img.width(), h = img.height();

  if (auto r = stream(Transform::flip); r.bernoulli(p.flip_prob)) {
    out.applied.flip = true;
    out.image = flip_horizontal(out.image);
    if (out.mask) out.mask = flip_horizontal(*out.mask);
  }
  if (auto r = stream(Transform::noise); r.bernoulli(p.noise_prob)) {
    const double sigma = r.uniform(p.noise_sigma.lo, p.noise_sigma.hi);
    out.applied.noise_sigma = sigma;
    for (auto& v : out.image.data()) v += sigma * r.normal();
    detail::clip_unit(out.image);
  }
  if (auto r = stream(Transform::gamma); r.bernoulli(p.gamma_prob)) {
    const double g = r.uniform(p.gamma.lo, p.gamma.hi);
    out.applied.gamma = g;
    for (auto& v : out.image.data()) v = std::pow(v, g);
    detail::clip_unit(out.image);
  }
  if (auto r = stream(Transform::contrast); r.bernoulli(p.contrast_prob)) {
    const double c = r.uniform(p.contrast.lo, p.contrast.hi);
    out.applied.contrast = c;
    double mean = 0.0;
    for (double v : out.image.data()) mean += v;
    mean /= static_cast<double>(std::max<std::size_t>(out.image.size(), 1));
    for (auto& v : out.image.data()) v = (v - mean) * c + mean;
    detail::clip_unit(out.image);
  }
  if (auto r = stream(Transform::affine); r.bernoulli(p.affine_prob)) {
    auto& a = out.applied;
    a.affine = true;
    a.rotate_deg = r.uniform(-p.rotate_deg, p.rotate_deg);
    const double s = r.uniform(p.scale.lo, p.scale.hi);
    const double tx = r.uniform(-p.translate, p.translate) * w;
    const double ty = r.uniform(-p.translate, p.translate) * h;
    // segmentation samples keep rotation only
    if (!out.mask) {
      a.scale = s;
      a.tx = tx;
      a.ty = ty;
    }
    const detail::InverseAffine inv(w, h, a.rotate_deg, a.scale, a.tx, a.ty);
    Grid<double> img2(w, h);
    std::optional<LabelMask> mask2;
    if (out.mask) mask2 = LabelMask(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Point src = inv(x + 0.5, y + 0.5);
        img2(x, y) = detail::bilinear(out.image, src);
        if (mask2) {
          const int sx = static_cast<int>(std::floor(src.x));
          const int sy = static_cast<int>(std::floor(src.y));
          (*mask2)(x, y) = out.mask->get_or(sx, sy, 0);
        }
      }
    }
    out.image = std::move(img2);
    detail::clip_unit(out.image);
    if (mask2) out.mask = std::move(mask2);
  }
  return out;
}

}  // namespace aopkit
