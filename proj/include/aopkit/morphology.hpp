#pragma once

// Binary morphology and connected components. Pixels outside the grid are
// background for both dilation and erosion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "aopkit/errors.hpp"
#include "aopkit/raster.hpp"

namespace aopkit {

/// Structuring element stored as one horizontal span per row.
class StructuringElement {
 public:
  struct Offset {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
  };
  struct RowSpan {
    int dy = 0;
    int dx_min = 0;
    int dx_max = 0;
  };

  StructuringElement(int width, int height, std::vector<RowSpan> rows)
      : width_(width), height_(height), rows_(std::move(rows)) {
    if (rows_.empty()) throw InvalidArgument("structuring element must not be empty");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<RowSpan>& rows() const noexcept { return rows_; }

  /// Offsets in row-major order.
  std::vector<Offset> offsets() const {
    std::vector<Offset> out;
    for (const auto& r : rows_) {
      for (int dx = r.dx_min; dx <= r.dx_max; ++dx) out.push_back({dx, r.dy});
    }
    return out;
  }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& r : rows_) n += static_cast<std::size_t>(r.dx_max - r.dx_min + 1);
    return n;
  }

  /// Largest |dx| or |dy| over all offsets.
  int half_extent() const noexcept {
    int e = 0;
    for (const auto& r : rows_) e = std::max({e, std::abs(r.dy), std::abs(r.dx_min), std::abs(r.dx_max)});
    return e;
  }

  /// Point reflection through the origin.
  StructuringElement reflected() const {
    std::vector<RowSpan> rows;
    for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
      rows.push_back({-it->dy, -it->dx_max, -it->dx_min});
    }
    return {width_, height_, std::move(rows)};
  }

 private:
  int width_;
  int height_;
  std::vector<RowSpan> rows_;
};

/// Filled ellipse inscribed in a w x h box. The origin sits at (w/2, h/2) of
/// the box (integer division), so a 10x10 kernel spans offsets [-5, 4].
/// Each row is filled between its left and right boundary pixels.
inline StructuringElement elliptical_kernel(int w, int h) {
  if (w < 1 || h < 1) throw InvalidArgument("elliptical kernel size must be >= 1");
  const int r = h / 2;
  const int c = w / 2;
  const double inv_r2 = r ? 1.0 / (static_cast<double>(r) * r) : 0.0;
  std::vector<StructuringElement::RowSpan> rows;
  for (int i = 0; i < h; ++i) {
    const int dy = i - r;
    int j1 = 0;
    int j2 = w;
    if (std::abs(dy) <= r) {
      const int dx = static_cast<int>(std::lround(c * std::sqrt((r * r - dy * dy) * inv_r2)));
      j1 = std::max(c - dx, 0);
      j2 = std::min(c + dx + 1, w);
    }
    if (j2 > j1) rows.push_back({dy, j1 - c, j2 - 1 - c});
  }
  return {w, h, std::move(rows)};
}

inline StructuringElement box_kernel(int w, int h) {
  if (w < 1 || h < 1) throw InvalidArgument("box kernel size must be >= 1");
  std::vector<StructuringElement::RowSpan> rows;
  for (int i = 0; i < h; ++i) rows.push_back({i - h / 2, -(w / 2), w - 1 - w / 2});
  return {w, h, std::move(rows)};
}

namespace detail {

/// Row prefix sums: ps[y * (w + 1) + x] = number of set pixels in row y before x.
inline std::vector<int> row_prefix_sums(const BinaryMask& m) {
  const int w = m.width();
  std::vector<int> ps(static_cast<std::size_t>(w + 1) * m.height(), 0);
  for (int y = 0; y < m.height(); ++y) {
    int* row = ps.data() + static_cast<std::size_t>(y) * (w + 1);
    for (int x = 0; x < w; ++x) row[x + 1] = row[x] + (m.at(x, y) ? 1 : 0);
  }
  return ps;
}

}  // namespace detail

/// out(p) = 1 iff m(p - o) = 1 for some offset o.
inline BinaryMask dilate(const BinaryMask& m, const StructuringElement& k) {
  const int w = m.width();
  const int h = m.height();
  const auto ps = detail::row_prefix_sums(m);
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (const auto& r : k.rows()) {
      const int sy = y - r.dy;
      if (sy < 0 || sy >= h) continue;
      const int* row = ps.data() + static_cast<std::size_t>(sy) * (w + 1);
      if (row[w] == 0) continue;
      for (int x = 0; x < w; ++x) {
        // source columns x - dx_max .. x - dx_min
        const int lo = std::clamp(x - r.dx_max, 0, w);
        const int hi = std::clamp(x - r.dx_min + 1, 0, w);
        if (hi > lo && row[hi] - row[lo] > 0) out(x, y) = 1;
      }
    }
  }
  return out;
}

/// out(p) = 1 iff m(p + o) = 1 for every offset o.
inline BinaryMask erode(const BinaryMask& m, const StructuringElement& k) {
  const int w = m.width();
  const int h = m.height();
  const auto ps = detail::row_prefix_sums(m);
  BinaryMask out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (const auto& r : k.rows()) {
      const int sy = y + r.dy;
      if (sy < 0 || sy >= h) {
        for (int x = 0; x < w; ++x) out(x, y) = 0;
        break;
      }
      const int* row = ps.data() + static_cast<std::size_t>(sy) * (w + 1);
      const int need = r.dx_max - r.dx_min + 1;
      for (int x = 0; x < w; ++x) {
        if (!out(x, y)) continue;
        const int lo = x + r.dx_min;
        const int hi = x + r.dx_max + 1;
        if (lo < 0 || hi > w || row[hi] - row[lo] != need) out(x, y) = 0;
      }
    }
  }
  return out;
}

inline BinaryMask close(const BinaryMask& m, const StructuringElement& k) {
  return erode(dilate(m, k), k);
}

inline BinaryMask open(const BinaryMask& m, const StructuringElement& k) {
  return dilate(erode(m, k), k);
}

inline BinaryMask complement(const BinaryMask& m) {
  BinaryMask out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0 : 1;
  return out;
}

struct Component {
  int id = 0;
  std::vector<Pixel> pixels;  // row-major order
  std::size_t size() const noexcept { return pixels.size(); }
};

/// 8-connected components, ordered by their first pixel in row-major order.
/// `labels`, when given, receives component id + 1 per pixel (0 = background).
inline std::vector<Component> connected_components(const BinaryMask& m,
                                                   Grid<int>* labels = nullptr) {
  const int w = m.width();
  const int h = m.height();
  Grid<int> lab(w, h, 0);
  std::vector<Component> comps;
  std::vector<Pixel> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m.at(x, y) || lab(x, y) != 0) continue;
      Component c;
      c.id = static_cast<int>(comps.size());
      lab(x, y) = c.id + 1;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        c.pixels.push_back(p);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (m.get(nx, ny) && lab(nx, ny) == 0) {
              lab(nx, ny) = c.id + 1;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      std::sort(c.pixels.begin(), c.pixels.end(),
                [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      comps.push_back(std::move(c));
    }
  }
  if (labels) *labels = std::move(lab);
  return comps;
}

/// Keeps only the largest 8-connected component. Equal sizes resolve to the
/// component whose first row-major pixel comes first.
inline BinaryMask largest_component(const BinaryMask& m) {
  const auto comps = connected_components(m);
  BinaryMask out(m.width(), m.height());
  const Component* best = nullptr;
  for (const auto& c : comps) {
    if (!best || c.size() > best->size()) best = &c;
  }
  if (best) {
    for (Pixel p : best->pixels) out(p.x, p.y) = 1;
  }
  return out;
}

}  // namespace aopkit
