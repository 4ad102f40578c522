#pragma once

// Per-structure shape refinement: hole closing, boundary extraction, ellipse
// fit, iterative protrusion pruning and the ellipse-versus-mask decision.

#include <cmath>
#include <limits>
#include <optional>

#include "aopkit/edges.hpp"
#include "aopkit/ellipse.hpp"
#include "aopkit/errors.hpp"
#include "aopkit/morphology.hpp"
#include "aopkit/raster.hpp"

namespace aopkit {

struct RefineParams {
  int kernel_w = 10;
  int kernel_h = 10;
  double canny_min = kCannyMinVal;
  double canny_max = kCannyMaxVal;
  double prune_distance = 3.0;  // pixels beyond the fitted ellipse that survive a prune
  int max_prune = 15;
  double ellipse_accept_ratio = 0.20;

  void validate() const {
    if (kernel_w < 1 || kernel_h < 1) throw InvalidArgument("kernel size must be >= 1");
    if (!(canny_min > 0.0) || !(canny_max > 0.0)) throw InvalidArgument("canny thresholds must be positive");
    if (canny_min > canny_max) throw InvalidArgument("canny_min must not exceed canny_max");
    if (!(prune_distance > 0.0)) throw InvalidArgument("prune_distance must be positive");
    if (max_prune < 1) throw InvalidArgument("max_prune must be >= 1");
    if (!(ellipse_accept_ratio > 0.0 && ellipse_accept_ratio < 1.0)) {
      throw InvalidArgument("ellipse_accept_ratio must lie in (0, 1)");
    }
  }
};

struct RefinedShape {
  BinaryMask closed_mask;                 // S: the hole-closed mask
  BinaryMask pruned_mask;                 // S' after the last prune
  std::optional<Ellipse> ellipse;         // E
  std::optional<BinaryMask> ellipse_mask; // E rasterized
  bool used_ellipse = false;
  int prune_iterations = 0;
  double protrusion_ratio = 0.0;  // last |E\S'| / |S'\E|
  double final_ratio = 0.0;       // |E\S| / |S|, the acceptance quantity

  bool empty() const { return closed_mask.empty() || count(closed_mask) == 0; }
};

/// |E \ S| / |S \ E|. Both empty gives 0; an empty denominator alone gives +inf.
inline double protrusion_ratio(const BinaryMask& e_mask, const BinaryMask& s_mask) {
  const auto c = mask_set_counts(e_mask, s_mask);
  if (c.only_a == 0) return 0.0;
  if (c.only_b == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(c.only_a) / static_cast<double>(c.only_b);
}

/// Drops foreground pixels whose centers fall outside `e` grown by `d` on
/// both semi-axes.
inline BinaryMask prune(const BinaryMask& s, const Ellipse& e, double d) {
  if (!(d > 0.0)) throw InvalidArgument("prune distance must be positive");
  const Ellipse grown{e.center, e.a + d, e.b + d, e.theta};
  BinaryMask out = s;
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      if (out(x, y) && !contains(grown, {x + 0.5, y + 0.5})) out(x, y) = 0;
    }
  }
  return out;
}

/// Canny, longest chain, AMS fit. nullopt when any stage has nothing to work on.
inline std::optional<Ellipse> fit_boundary(const BinaryMask& m, const RefineParams& p) {
  try {
    const auto chains = extract_chains(canny(m, p.canny_min, p.canny_max));
    return fit_ams(longest_chain(chains).centers());
  } catch (const NoEdges&) {
    return std::nullopt;
  } catch (const DegenerateInput&) {
    return std::nullopt;
  }
}

inline RefinedShape refine(const BinaryMask& raw, const RefineParams& p = {}) {
  p.validate();
  if (count(raw) == 0) throw EmptyShape("refine: input mask is empty");

  RefinedShape out;
  out.closed_mask = close(raw, elliptical_kernel(p.kernel_w, p.kernel_h));
  out.pruned_mask = out.closed_mask;
  const BinaryMask& s = out.closed_mask;

  auto fallback = [&]() {
    out.ellipse.reset();
    out.ellipse_mask.reset();
    out.used_ellipse = false;
    return out;
  };

  auto e = fit_boundary(s, p);
  if (!e) return fallback();
  BinaryMask e_mask = rasterize(*e, s.width(), s.height());
  out.protrusion_ratio = protrusion_ratio(e_mask, out.pruned_mask);
  while (out.protrusion_ratio >= 1.0 && out.prune_iterations < p.max_prune) {
    out.pruned_mask = prune(out.pruned_mask, *e, p.prune_distance);
    ++out.prune_iterations;
    e = fit_boundary(out.pruned_mask, p);
    if (!e) return fallback();
    e_mask = rasterize(*e, s.width(), s.height());
    out.protrusion_ratio = protrusion_ratio(e_mask, out.pruned_mask);
  }

  const auto c = mask_set_counts(e_mask, s);
  out.final_ratio = static_cast<double>(c.only_a) / static_cast<double>(count(s));
  out.used_ellipse = out.final_ratio < p.ellipse_accept_ratio;
  out.ellipse = e;
  out.ellipse_mask = std::move(e_mask);
  return out;
}

}  // namespace aopkit
