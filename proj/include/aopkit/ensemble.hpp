#pragma once

// Uniformly weighted deep-ensemble combination of per-model probabilities,
// majority voting, and the final argmax/threshold decisions.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aopkit/errors.hpp"
#include "aopkit/raster.hpp"

namespace aopkit {

namespace detail {

/// Sum of values[lo, hi) by pairwise (tree) reduction, so the result depends
/// only on the member order, not on how a caller happens to loop.
template <typename Get>
double tree_sum(std::size_t lo, std::size_t hi, const Get& get) {
  if (hi - lo == 1) return get(lo);
  const std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum(lo, mid, get) + tree_sum(mid, hi, get);
}

inline void require_members(std::span<const ProbMap> members) {
  if (members.empty()) throw InvalidArgument("ensemble needs at least one member");
  for (std::size_t m = 1; m < members.size(); ++m) {
    if (!members[m].same_shape(members[0])) {
      throw DimensionMismatch("ensemble member " + std::to_string(m) + " shape " +
                              std::to_string(members[m].width()) + "x" +
                              std::to_string(members[m].height()) + "x" +
                              std::to_string(members[m].channels()) +
                              " differs from member 0");
    }
  }
}

}  // namespace detail

/// p(y|x) = (1/M) sum_m p_m(y|x), per pixel and channel.
inline ProbMap average(std::span<const ProbMap> members) {
  detail::require_members(members);
  const ProbMap& first = members.front();
  ProbMap out(first.width(), first.height(), first.channels());
  const double inv = 1.0 / static_cast<double>(members.size());
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = inv * detail::tree_sum(0, members.size(),
                                    [&](std::size_t m) { return members[m].data()[i]; });
  }
  return out;
}

inline ProbMap average(const std::vector<ProbMap>& members) {
  return average(std::span<const ProbMap>(members));
}

/// Classification variant: each member gives one positive-class probability
/// per frame.
inline std::vector<double> average_scores(const std::vector<std::vector<double>>& members) {
  if (members.empty()) throw InvalidArgument("ensemble needs at least one member");
  const std::size_t n = members.front().size();
  for (const auto& m : members) {
    if (m.size() != n) throw DimensionMismatch("ensemble score vectors differ in length");
  }
  std::vector<double> out(n);
  const double inv = 1.0 / static_cast<double>(members.size());
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = inv * detail::tree_sum(0, members.size(), [&](std::size_t m) { return members[m][i]; });
  }
  return out;
}

/// Index of the largest value; ties go to the lowest index.
inline int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t c = 1; c < v.size(); ++c) {
    if (v[c] > v[best]) best = static_cast<int>(c);
  }
  return best;
}

/// Per-pixel argmax.
inline LabelMask decide(const ProbMap& p) {
  LabelMask out(p.width(), p.height());
  for (std::size_t i = 0; i < p.pixel_count(); ++i) {
    out[i] = static_cast<std::uint8_t>(argmax(p.pixel(i)));
  }
  return out;
}

inline constexpr double kDecisionThreshold = 0.5;

/// Positive iff the positive-class probability reaches the threshold.
inline int decide_cls(double positive_prob, double threshold = kDecisionThreshold) {
  return positive_prob >= threshold ? 1 : 0;
}

/// Two-channel vector form: (negative, positive).
inline int decide_cls(std::span<const double> v, double threshold = kDecisionThreshold) {
  if (v.size() != 2) throw InvalidArgument("classification vector must have 2 entries");
  return decide_cls(v[1], threshold);
}

/// Majority vote over member argmaxes; ties go to the lowest class index.
inline LabelMask vote(std::span<const ProbMap> members) {
  detail::require_members(members);
  const ProbMap& first = members.front();
  LabelMask out(first.width(), first.height());
  std::vector<int> tally(static_cast<std::size_t>(first.channels()));
  for (std::size_t i = 0; i < first.pixel_count(); ++i) {
    std::fill(tally.begin(), tally.end(), 0);
    for (const auto& m : members) ++tally[static_cast<std::size_t>(argmax(m.pixel(i)))];
    const auto it = std::max_element(tally.begin(), tally.end());
    out[i] = static_cast<std::uint8_t>(it - tally.begin());
  }
  return out;
}

inline LabelMask vote(const std::vector<ProbMap>& members) {
  return vote(std::span<const ProbMap>(members));
}

}  // namespace aopkit
