#pragma once

// Core raster types. Pixel (x, y) lives at index y * width + x; the origin
// is the top-left corner, x grows to the right and y grows downward. When a
// pixel is treated as a point it stands for its center (x + 0.5, y + 0.5).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aopkit/errors.hpp"

namespace aopkit {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Integer pixel coordinate.
struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

inline Point pixel_center(Pixel p) { return {p.x + 0.5, p.y + 0.5}; }

/// Row-major 2D grid of scalars.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw InvalidArgument("grid dimensions must be >= 1, got " +
                            std::to_string(width) + "x" +
                            std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Grid(int width, int height, std::vector<T> data) : Grid(width, height) {
    if (data.size() != data_.size()) {
      throw DimensionMismatch("grid data length " + std::to_string(data.size()) +
                              " does not match " + std::to_string(width) + "x" +
                              std::to_string(height));
    }
    data_ = std::move(data);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Out-of-bounds reads return `outside`.
  T get_or(int x, int y, T outside) const noexcept {
    return in_bounds(x, y) ? (*this)(x, y) : outside;
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch " +
                            std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " +
                            std::to_string(b.width()) + "x" +
                            std::to_string(b.height()));
  }
}

enum class Structure : std::uint8_t { background = 0, ps = 1, fh = 2 };

inline const char* structure_name(Structure s) {
  switch (s) {
    case Structure::ps: return "PS";
    case Structure::fh: return "FH";
    default: return "background";
  }
}

/// Pixel values in {0, 1}.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;
  BinaryMask() = default;
  explicit BinaryMask(Grid<std::uint8_t> g) : Grid(std::move(g)) {}

  bool at(int x, int y) const noexcept { return (*this)(x, y) != 0; }
  bool get(int x, int y) const noexcept { return in_bounds(x, y) && at(x, y); }
};

/// Pixel values in {0 = background, 1 = PS, 2 = FH}.
class LabelMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;
  LabelMask() = default;
  explicit LabelMask(Grid<std::uint8_t> g) : Grid(std::move(g)) { validate(); }

  void validate() const {
    for (std::size_t i = 0; i < size(); ++i) {
      if ((*this)[i] > 2) {
        throw ValidationError("label value " + std::to_string((*this)[i]) +
                              " at index " + std::to_string(i) +
                              " is not in {0,1,2}");
      }
    }
  }
};

/// Per-pixel class probabilities, channel-interleaved. Channel order is
/// (background, PS, FH) for three channels and (negative, positive) for two.
class ProbMap {
 public:
  static constexpr double kSumTolerance = 1e-4;

  ProbMap() = default;
  ProbMap(int width, int height, int channels)
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1) throw InvalidArgument("prob map dimensions must be >= 1");
    if (channels != 2 && channels != 3) {
      throw InvalidArgument("prob map channel count must be 2 or 3, got " +
                            std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
  }
  ProbMap(int width, int height, int channels, std::vector<double> data)
      : ProbMap(width, height, channels) {
    if (data.size() != data_.size()) {
      throw DimensionMismatch("prob map data length mismatch");
    }
    data_ = std::move(data);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  double& at(int x, int y, int c) noexcept { return data_[offset(x, y, c)]; }
  double at(int x, int y, int c) const noexcept { return data_[offset(x, y, c)]; }
  std::span<const double> pixel(std::size_t i) const noexcept {
    return std::span<const double>(data_).subspan(i * channels_, channels_);
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const ProbMap& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  struct Violation {
    std::size_t pixel = 0;
    double deviation = 0.0;  // worst |sum - 1| or out-of-range excess
  };

  /// Worst normalization violation, if any pixel breaks `tol`.
  std::pair<bool, Violation> check(double tol = kSumTolerance) const {
    Violation worst;
    bool bad = false;
    for (std::size_t i = 0; i < pixel_count(); ++i) {
      double sum = 0.0;
      double dev = 0.0;
      for (double v : pixel(i)) {
        sum += v;
        if (!std::isfinite(v)) dev = INFINITY;
        dev = std::max({dev, -v, v - 1.0});
      }
      dev = std::max(dev, std::abs(sum - 1.0));
      if (dev > tol && dev > worst.deviation) {
        worst = {i, dev};
        bad = true;
      }
    }
    return {bad, worst};
  }

  void validate(double tol = kSumTolerance) const {
    auto [bad, worst] = check(tol);
    if (bad) {
      throw ValidationError(
          "prob map normalization violated at pixel (" +
          std::to_string(worst.pixel % width_) + "," +
          std::to_string(worst.pixel / width_) + "), deviation " +
          std::to_string(worst.deviation));
    }
  }

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  std::size_t offset(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Per-structure mask: 1 where the label equals `c`.
inline BinaryMask class_mask(const LabelMask& m, int c) {
  if (c != 1 && c != 2) {
    throw InvalidClass("class id must be 1 (PS) or 2 (FH), got " + std::to_string(c));
  }
  BinaryMask out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] == c ? 1 : 0;
  return out;
}

inline BinaryMask class_mask(const LabelMask& m, Structure s) {
  return class_mask(m, static_cast<int>(s));
}

struct SetCounts {
  std::size_t only_a = 0;
  std::size_t only_b = 0;
  std::size_t both = 0;

  friend bool operator==(const SetCounts&, const SetCounts&) = default;
};

inline SetCounts mask_set_counts(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_set_counts");
  SetCounts c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a[i] != 0;
    const bool in_b = b[i] != 0;
    c.only_a += in_a && !in_b;
    c.only_b += !in_a && in_b;
    c.both += in_a && in_b;
  }
  return c;
}

inline std::size_t count(const BinaryMask& m) {
  return static_cast<std::size_t>(
      std::count_if(m.data().begin(), m.data().end(), [](auto v) { return v != 0; }));
}

/// Foreground pixels with at least one 4-neighbor that is background or
/// outside the grid, in row-major order.
inline std::vector<Pixel> boundary_pixels(const BinaryMask& m) {
  std::vector<Pixel> out;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      if (!m.get(x - 1, y) || !m.get(x + 1, y) || !m.get(x, y - 1) || !m.get(x, y + 1)) {
        out.push_back({x, y});
      }
    }
  }
  return out;
}

/// Mean of foreground pixel centers.
inline Point centroid(const BinaryMask& m) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.at(x, y)) {
        sx += x + 0.5;
        sy += y + 0.5;
        ++n;
      }
    }
  }
  if (n == 0) throw EmptyShape("centroid of an empty mask");
  return {sx / n, sy / n};
}

}  // namespace aopkit
