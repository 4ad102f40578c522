#pragma once

// Shared generators and brute-force oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "aopkit/raster.hpp"
#include "aopkit/rng.hpp"

namespace aopkit::oracle {

/// Random mask with independent pixels set with probability `density`.
inline BinaryMask random_mask(int w, int h, double density, rng::Stream& r) {
  BinaryMask m(w, h);
  for (auto& v : m.data()) v = r.bernoulli(density) ? 1 : 0;
  return m;
}

/// Random mask built from a few overlapping disks and boxes: blobby shapes
/// with holes and gaps rather than salt-and-pepper.
inline BinaryMask random_blobs(int w, int h, int shapes, rng::Stream& r) {
  BinaryMask m(w, h);
  for (int s = 0; s < shapes; ++s) {
    const double cx = r.uniform(0, w), cy = r.uniform(0, h);
    const double rad = r.uniform(1.5, std::max(2.0, w / 5.0));
    const bool erase = r.bernoulli(0.25);
    const bool box = r.bernoulli(0.3);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        const bool in = box ? std::abs(dx) <= rad && std::abs(dy) <= 0.6 * rad
                            : dx * dx + dy * dy <= rad * rad;
        if (in) m(x, y) = erase ? 0 : 1;
      }
    }
  }
  return m;
}

inline BinaryMask block(int w, int h, int x0, int y0, int bw, int bh) {
  BinaryMask m(w, h);
  for (int y = y0; y < y0 + bh; ++y) {
    for (int x = x0; x < x0 + bw; ++x) {
      if (m.in_bounds(x, y)) m(x, y) = 1;
    }
  }
  return m;
}

/// Boundary test written out directly from the 4-neighbor definition.
inline bool is_boundary(const BinaryMask& m, int x, int y) {
  if (!m.at(x, y)) return false;
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  for (int k = 0; k < 4; ++k) {
    const int nx = x + dx[k], ny = y + dy[k];
    if (nx < 0 || ny < 0 || nx >= m.width() || ny >= m.height() || !m.at(nx, ny)) return true;
  }
  return false;
}

struct BruteSurface {
  double asd;
  double hd;
};

/// All-pairs surface distances, summed over boundary pixels of a then b in
/// row-major order.
inline BruteSurface brute_surface_distances(const BinaryMask& a, const BinaryMask& b) {
  std::vector<std::pair<int, int>> ba, bb;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (is_boundary(a, x, y)) ba.push_back({x, y});
      if (is_boundary(b, x, y)) bb.push_back({x, y});
    }
  }
  auto nearest = [](std::pair<int, int> p, const std::vector<std::pair<int, int>>& set) {
    long best = std::numeric_limits<long>::max();
    for (auto q : set) {
      const long dx = p.first - q.first, dy = p.second - q.second;
      best = std::min(best, dx * dx + dy * dy);
    }
    return std::sqrt(static_cast<double>(best));
  };
  double sum = 0, hd = 0;
  for (auto p : ba) {
    const double d = nearest(p, bb);
    sum += d;
    hd = std::max(hd, d);
  }
  for (auto p : bb) {
    const double d = nearest(p, ba);
    sum += d;
    hd = std::max(hd, d);
  }
  return {sum / static_cast<double>(ba.size() + bb.size()), hd};
}

inline double brute_dice(const BinaryMask& a, const BinaryMask& b) {
  long inter = 0, na = 0, nb = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      na += a(x, y) != 0;
      nb += b(x, y) != 0;
      inter += a(x, y) != 0 && b(x, y) != 0;
    }
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

/// AUC as the fraction of concordant (positive, negative) pairs, ties
/// counting one half.
inline double concordance_auc(const std::vector<double>& s, const std::vector<int>& l) {
  long twice = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[i] != 1 || l[j] != 0) continue;
      ++pairs;
      twice += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    }
  }
  return static_cast<double>(twice) / static_cast<double>(2 * pairs);
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("aopkit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace aopkit::oracle
