#pragma once

// Evaluation metrics: ACC / F1 / AUC / MCC for frame classification, Dice /
// average surface distance / Hausdorff distance for segmentation, and the
// absolute biometry errors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "aopkit/errors.hpp"
#include "aopkit/raster.hpp"

namespace aopkit {

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                                 double threshold = 0.5) {
  if (scores.size() != labels.size()) throw DimensionMismatch("scores and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool truth = labels[i] != 0;
    c.tp += pred && truth;
    c.tn += !pred && !truth;
    c.fp += pred && !truth;
    c.fn += !pred && truth;
  }
  return c;
}

inline double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw UndefinedMetric("accuracy of an empty table");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// 2tp / (2tp + fp + fn); 0 when there are no positives at all.
inline double f1_score(const ConfusionCounts& c) {
  const double denom = 2.0 * c.tp + c.fp + c.fn;
  return denom == 0.0 ? 0.0 : 2.0 * c.tp / denom;
}

/// Matthews correlation; 0 when any marginal is empty.
inline double mcc(const ConfusionCounts& c) {
  const double tp = c.tp, tn = c.tn, fp = c.fp, fn = c.fn;
  const double prod = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (prod == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(prod);
}

/// Area under the ROC curve by the trapezoidal rule over every distinct score
/// threshold. Accumulated in integer units, so tied scores count one half
/// exactly.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionMismatch("scores and labels differ in length");
  if (scores.empty()) throw UndefinedMetric("AUC of an empty input");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::uint64_t pos = 0, neg = 0;
  for (int l : labels) (l ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw UndefinedMetric("AUC is undefined when only one class is present");
  // twice the area, in units of one (positive, negative) pair
  std::uint64_t area2 = 0;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::uint64_t dtp = 0, dfp = 0;
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? dtp : dfp) += 1;
    area2 += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
  }
  return static_cast<double>(area2) / static_cast<double>(2 * pos * neg);
}

struct ClassificationMetrics {
  double acc = 0, f1 = 0, auc = 0, mcc = 0;
};

inline ClassificationMetrics classification_metrics(std::span<const double> scores,
                                                    std::span<const int> labels) {
  if (scores.empty()) throw UndefinedMetric("classification metrics of an empty input");
  const auto c = confusion(scores, labels);
  return {accuracy(c), f1_score(c), aopkit::auc(scores, labels), mcc(c)};
}

/// 2|a & b| / (|a| + |b|); 1 for two empty masks.
inline double dice(const BinaryMask& a, const BinaryMask& b) {
  const auto c = mask_set_counts(a, b);
  const std::size_t sum = c.only_a + c.only_b + 2 * c.both;
  return sum == 0 ? 1.0 : 2.0 * static_cast<double>(c.both) / static_cast<double>(sum);
}

namespace detail {

/// 1D squared distance transform (lower envelope of parabolas).
inline void edt_1d(const double* f, double* d, int n, int* v, double* z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == inf) continue;
    if (f[v[0]] == inf) {
      v[0] = q;
      continue;
    }
    double s;
    for (;;) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s > z[k] || k == 0) break;
      --k;
    }
    if (s <= z[k] && k == 0) {
      v[0] = q;
      z[1] = inf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const int p = v[k];
    d[q] = f[p] == inf ? inf : double(q - p) * (q - p) + f[p];
  }
}

}  // namespace detail

/// Exact squared Euclidean distance from every pixel center to the nearest
/// pixel in `sites`; +inf everywhere if `sites` is empty.
inline Grid<double> squared_distance_transform(const BinaryMask& sites) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int w = sites.width(), h = sites.height();
  Grid<double> g(w, h, inf);
  for (std::size_t i = 0; i < sites.size(); ++i) g[i] = sites[i] ? 0.0 : inf;
  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = g(x, y);
    detail::edt_1d(f.data(), d.data(), h, v.data(), z.data());
    for (int y = 0; y < h; ++y) g(x, y) = d[y];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = g(x, y);
    detail::edt_1d(f.data(), d.data(), w, v.data(), z.data());
    for (int x = 0; x < w; ++x) g(x, y) = d[x];
  }
  return g;
}

/// Foreground pixels touching background (4-neighborhood) or the grid edge.
inline BinaryMask boundary_mask(const BinaryMask& m) {
  BinaryMask out(m.width(), m.height());
  for (Pixel p : boundary_pixels(m)) out(p.x, p.y) = 1;
  return out;
}

struct SurfaceDistances {
  double asd = 0.0;
  double hd = 0.0;
};

/// Symmetric average surface distance and exact Hausdorff distance between
/// the boundaries of two masks. Sums run over boundary pixels of `a`, then of
/// `b`, in row-major order.
inline SurfaceDistances surface_distances(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "surface_distances");
  const auto ba = boundary_pixels(a);
  const auto bb = boundary_pixels(b);
  if (ba.empty() || bb.empty()) throw UndefinedMetric("surface distance of an empty mask");
  const auto da = squared_distance_transform(boundary_mask(a));
  const auto db = squared_distance_transform(boundary_mask(b));
  double sum = 0.0, hd = 0.0;
  for (Pixel p : ba) {
    const double d = std::sqrt(db(p.x, p.y));
    sum += d;
    hd = std::max(hd, d);
  }
  for (Pixel p : bb) {
    const double d = std::sqrt(da(p.x, p.y));
    sum += d;
    hd = std::max(hd, d);
  }
  return {sum / static_cast<double>(ba.size() + bb.size()), hd};
}

struct SegScores {
  double dsc = 0.0;
  std::optional<double> asd;  // undefined when either mask is empty
  std::optional<double> hd;
};

struct LabelSegScores {
  SegScores ps;
  SegScores fh;
  SegScores mean;  // equal-weight mean over PS and FH of the defined values
};

inline SegScores seg_scores(const BinaryMask& pred, const BinaryMask& truth) {
  SegScores s;
  s.dsc = dice(pred, truth);
  if (count(pred) > 0 && count(truth) > 0) {
    const auto d = surface_distances(pred, truth);
    s.asd = d.asd;
    s.hd = d.hd;
  }
  return s;
}

inline LabelSegScores seg_scores(const LabelMask& pred, const LabelMask& truth) {
  require_same_shape(pred, truth, "seg_scores");
  LabelSegScores r;
  r.ps = seg_scores(class_mask(pred, Structure::ps), class_mask(truth, Structure::ps));
  r.fh = seg_scores(class_mask(pred, Structure::fh), class_mask(truth, Structure::fh));
  r.mean.dsc = 0.5 * (r.ps.dsc + r.fh.dsc);
  auto mean_opt = [](std::optional<double> x, std::optional<double> y) -> std::optional<double> {
    if (x && y) return 0.5 * (*x + *y);
    return x ? x : y;
  };
  r.mean.asd = mean_opt(r.ps.asd, r.fh.asd);
  r.mean.hd = mean_opt(r.ps.hd, r.fh.hd);
  return r;
}

struct BiometryDelta {
  double d_aop = 0.0;
  double d_hsd = 0.0;
};

inline BiometryDelta biometry_delta(double aop_pred, double hsd_pred, double aop_gt, double hsd_gt) {
  return {std::abs(aop_pred - aop_gt), std::abs(hsd_pred - hsd_gt)};
}

}  // namespace aopkit
