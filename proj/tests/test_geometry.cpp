#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aopkit/biometry.hpp"
#include "aopkit/ellipse.hpp"
#include "aopkit/metrics.hpp"
#include "aopkit/refine.hpp"
#include "support.hpp"

using namespace aopkit;

namespace {

std::vector<Point> sample(const Ellipse& e, int n, double phase = 0.1) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back(e.at_parameter(phase + 2.0 * std::numbers::pi * i / n));
  return pts;
}

double angle_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

BinaryMask disk(int w, int h, Point c, double r) { return rasterize({c, r, r, 0.0}, w, h); }

}  // namespace

TEST(Ellipse, FitRecoversExactSamples) {
  const Ellipse truth{{100, 80}, 50, 30, 20};
  const auto e = fit_ams(sample(truth, 32));
  EXPECT_NEAR(e.center.x, 100, 1e-6 * 100);
  EXPECT_NEAR(e.center.y, 80, 1e-6 * 80);
  EXPECT_NEAR(e.a, 50, 1e-6 * 50);
  EXPECT_NEAR(e.b, 30, 1e-6 * 30);
  EXPECT_NEAR(e.theta, 20, 1e-6 * 20);
}

TEST(Ellipse, FitUnitCircle) {
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) {
    const double t = 2.0 * std::numbers::pi * i / 8;
    pts.push_back({std::cos(t), std::sin(t)});
  }
  const auto e = fit_ams(pts);
  EXPECT_NEAR(e.a, 1.0, 1e-9);
  EXPECT_NEAR(e.b, 1.0, 1e-9);
  EXPECT_NEAR(e.center.x, 0.0, 1e-9);
  EXPECT_NEAR(e.center.y, 0.0, 1e-9);
}

TEST(Ellipse, FitRejectsDegenerateInput) {
  std::vector<Point> line;
  for (int i = 0; i < 5; ++i) line.push_back({1.0 * i, 2.0 * i + 1});
  EXPECT_THROW(fit_ams(line), DegenerateInput);
  EXPECT_THROW(fit_ams(std::vector<Point>{{0, 0}, {1, 0}, {0, 1}}), DegenerateInput);
  EXPECT_THROW(fit_ams(std::vector<Point>(6, Point{3, 3})), DegenerateInput);
}

TEST(Ellipse, FitOnPixelChainRoundTrips) {
  const Ellipse truth{{128, 120}, 70, 40, 35};
  const auto m = rasterize(truth, 256, 256);
  const auto chain = longest_chain(extract_chains(canny(m)));
  const auto e = fit_ams(chain.centers());
  EXPECT_GE(dice(rasterize(e, 256, 256), m), 0.98);
}

TEST(Ellipse, ConicRoundTrip) {
  rng::Stream r{2};
  for (int t = 0; t < 100; ++t) {
    const double a = r.uniform(1, 80);
    const Ellipse e{{r.uniform(-50, 50), r.uniform(-50, 50)}, a, r.uniform(0.2, 1.0) * a,
                    r.uniform(0, 180)};
    const auto back = conic_to_ellipse(to_conic(e));
    ASSERT_TRUE(back);
    EXPECT_NEAR(back->a, e.a, 1e-9 * e.a);
    EXPECT_NEAR(back->b, e.b, 1e-9 * e.a);
    EXPECT_NEAR(back->center.x, e.center.x, 1e-9 * 100);
    EXPECT_LT(angle_diff(back->theta, e.theta), 1e-6);
  }
  EXPECT_FALSE(conic_to_ellipse({1, 0, -1, 0, 0, -1}));  // hyperbola
  EXPECT_FALSE(conic_to_ellipse({1, 0, 1, 0, 0, 1}));    // imaginary
}

TEST(Ellipse, Contains) {
  const Ellipse e{{10, 20}, 8, 3, 30};
  EXPECT_TRUE(contains(e, e.center));
  EXPECT_FALSE(contains(e, e.center + 16.0 * e.major_dir()));
  EXPECT_TRUE(contains(Ellipse{{0, 0}, 4, 2, 0}, {4, 0}));
}

TEST(Ellipse, Rasterize) {
  const auto one = rasterize({{3.5, 2.5}, 0.4, 0.4, 0}, 8, 6);
  EXPECT_EQ(count(one), 1u);
  EXPECT_TRUE(one.at(3, 2));
  EXPECT_EQ(count(rasterize({{-100, -100}, 20, 10, 0}, 50, 50)), 0u);
  rng::Stream r{4};
  for (int t = 0; t < 40; ++t) {
    const double a = r.uniform(20, 90);
    const Ellipse e{{r.uniform(95, 105), r.uniform(95, 105)}, a, r.uniform(20, a), r.uniform(0, 180)};
    const double area = static_cast<double>(count(rasterize(e, 200, 200)));
    EXPECT_NEAR(area / e.area(), 1.0, 0.02);
  }
}

TEST(Ellipse, ExternalTangentsOfUnitCircle) {
  const auto [t1, t2] = external_tangents({{0, 0}, 1, 1, 0}, {2, 0});
  EXPECT_NEAR(t1.x, 0.5, 1e-12);
  EXPECT_NEAR(t2.x, 0.5, 1e-12);
  EXPECT_NEAR(std::abs(t1.y), std::sqrt(3.0) / 2, 1e-12);
  EXPECT_NEAR(t1.y, -t2.y, 1e-12);
  EXPECT_THROW(external_tangents({{0, 0}, 2, 1, 10}, {0, 0}), NoTangent);
}

TEST(Ellipse, TangentHalfAngleOnCircle) {
  for (double d : {1.5, 2.0, 5.0, 11.0}) {
    const double rad = 1.0;
    const Point p{d, 0};
    const auto [t1, t2] = external_tangents({{0, 0}, rad, rad, 0}, p);
    const Point back = Point{0, 0} - p;
    const double half = rad2deg(std::acos(dot(t1 - p, back) / (norm(t1 - p) * norm(back))));
    EXPECT_NEAR(half, rad2deg(std::asin(rad / d)), 1e-9);
  }
}

TEST(Ellipse, TangentsTouchAndSupport) {
  rng::Stream r{9};
  for (int t = 0; t < 200; ++t) {
    const double a = r.uniform(5, 60);
    const Ellipse e{{r.uniform(-20, 20), r.uniform(-20, 20)}, a, r.uniform(0.1, 1.0) * a,
                    r.uniform(0, 180)};
    const double ang = r.uniform(0, 2 * std::numbers::pi);
    const Point p = e.center + r.uniform(1.05, 4.0) * a * Point{std::cos(ang), std::sin(ang)};
    if (contains(e, p)) continue;
    const auto [t1, t2] = external_tangents(e, p);
    for (Point tp : {t1, t2}) {
      // The line p + s (tp - p) meets the conic in a double root.
      const Conic q = to_conic(e);
      const Point d = tp - p;
      const double qa = q.A * d.x * d.x + q.B * d.x * d.y + q.C * d.y * d.y;
      const double qb = 2 * q.A * p.x * d.x + q.B * (p.x * d.y + p.y * d.x) + 2 * q.C * p.y * d.y +
                        q.D * d.x + q.E * d.y;
      const double qc = q.eval(p);
      const double disc = qb * qb - 4 * qa * qc;
      EXPECT_LT(std::abs(disc) / (qb * qb), 1e-9);
      EXPECT_TRUE(is_supporting_line(p, tp, sample(e, 720), 1e-7 * a));
    }
  }
}

TEST(Ellipse, CircleAxisConvention) {
  RefinedShape ps;
  ps.closed_mask = disk(300, 200, {100, 100}, 40);
  ps.ellipse = Ellipse{{100, 100}, 40, 40, 67};
  ps.used_ellipse = true;
  const auto ax = ps_axis_endpoints(ps, {220, 100});
  EXPECT_EQ(ax.apex, (Point{140, 100}));
  EXPECT_EQ(ax.proximal, (Point{60, 100}));
  EXPECT_EQ(make_ellipse({0, 0}, 3, 3, 45).theta, 0.0);
}

// ---------------------------------------------------------------- refine

TEST(Refine, ProtrusionRatioExamples) {
  const auto s = oracle::block(20, 20, 2, 2, 10, 10);
  EXPECT_EQ(protrusion_ratio(s, s), 0.0);
  const auto inner = oracle::block(20, 20, 3, 3, 8, 7);  // |S\E| = 100 - 56
  EXPECT_EQ(protrusion_ratio(inner, s), 0.0);
  // |E\S| = 30, |S\E| = 10
  BinaryMask e(20, 20), t(20, 20);
  for (int i = 0; i < 30; ++i) e[i] = 1;
  for (int i = 30; i < 40; ++i) t[i] = 1;
  EXPECT_DOUBLE_EQ(protrusion_ratio(e, t), 3.0);
}

TEST(Refine, PruneExamples) {
  const Ellipse e{{30, 30}, 20, 10, 0};
  const auto inside = rasterize(e, 60, 60);
  EXPECT_EQ(prune(inside, e, 3), inside);
  auto spur = inside;
  spur(30 + 20 + 10, 30) = 1;
  EXPECT_EQ(prune(spur, e, 3), inside);
  EXPECT_EQ(count(prune(BinaryMask(10, 10), e, 3)), 0u);
  rng::Stream r{6};
  for (int t = 0; t < 20; ++t) {
    const auto m = oracle::random_mask(60, 60, 0.5, r);
    EXPECT_EQ(mask_set_counts(prune(m, e, 2), m).only_a, 0u);
  }
}

TEST(Refine, CleanEllipseUsesEllipseWithoutPruning) {
  rng::Stream r{12};
  for (int t = 0; t < 30; ++t) {
    const double a = r.uniform(20, 70);
    const Ellipse el{{r.uniform(90, 110), r.uniform(90, 110)}, a, r.uniform(20, a), r.uniform(0, 180)};
    const auto res = refine(rasterize(el, 200, 200));
    EXPECT_TRUE(res.used_ellipse);
    EXPECT_EQ(res.prune_iterations, 0);
    ASSERT_TRUE(res.ellipse);
    EXPECT_NEAR(res.ellipse->a, a, 1.0);
  }
}

TEST(Refine, ProtrusionIsPruned) {
  const Ellipse el{{100, 100}, 60, 45, 15};
  const auto clean = rasterize(el, 220, 220);
  auto m = clean;
  // 15 px wide spur sticking 40 px out of the top of the ellipse
  const Point top = el.center - 45.0 * el.minor_dir();
  const Point out = -1.0 * el.minor_dir();
  for (int y = 0; y < 220; ++y) {
    for (int x = 0; x < 220; ++x) {
      const Point d = Point{x + 0.5, y + 0.5} - top;
      const double along = dot(d, out);
      const double across = std::abs(cross(out, d));
      if (along > -5 && along < 40 && across < 7.5) m(x, y) = 1;
    }
  }
  const auto res = refine(m);
  EXPECT_GE(res.prune_iterations, 1);
  EXPECT_LE(res.prune_iterations, 15);
  ASSERT_TRUE(res.ellipse_mask);
  EXPECT_GE(dice(*res.ellipse_mask, clean), 0.97);
}

TEST(Refine, IterationCapHolds) {
  // A thick C: the fitted ellipse spans the gap, so the ratio stays high and
  // pruning removes nothing.
  BinaryMask c(200, 200);
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 200; ++x) {
      const double dx = x + 0.5 - 100, dy = y + 0.5 - 100;
      const double rr = std::hypot(dx, dy);
      if (rr >= 50 && rr <= 70 && !(dx > 0 && std::abs(dy) < 40)) c(x, y) = 1;
    }
  }
  const auto res = refine(c);
  EXPECT_EQ(res.prune_iterations, 15);
  RefineParams p;
  p.max_prune = 4;
  EXPECT_EQ(refine(c, p).prune_iterations, 4);
}

TEST(Refine, AcceptanceThresholdIsStrict) {
  // final_ratio exactly at the threshold keeps the mask
  const Ellipse el{{50, 50}, 30, 20, 0};
  const auto m = rasterize(el, 100, 100);
  const auto res = refine(m);
  RefineParams p;
  p.ellipse_accept_ratio = res.final_ratio > 0 ? res.final_ratio : 0.5;
  const auto again = refine(m, p);
  EXPECT_EQ(again.used_ellipse, again.final_ratio < p.ellipse_accept_ratio);
  if (res.final_ratio > 0) EXPECT_FALSE(again.used_ellipse);
}

TEST(Refine, DeterministicAndValidated) {
  rng::Stream r{13};
  const auto m = oracle::random_blobs(80, 80, 6, r);
  const auto a = refine(m), b = refine(m);
  EXPECT_EQ(a.closed_mask, b.closed_mask);
  EXPECT_EQ(a.pruned_mask, b.pruned_mask);
  EXPECT_EQ(a.prune_iterations, b.prune_iterations);
  EXPECT_EQ(a.final_ratio, b.final_ratio);
  EXPECT_EQ(a.used_ellipse, b.used_ellipse);
  EXPECT_THROW(refine(BinaryMask(10, 10)), EmptyShape);
  RefineParams bad;
  bad.canny_min = 9;
  EXPECT_THROW(refine(m, bad), InvalidArgument);
}

// ---------------------------------------------------------------- biometry

namespace {

RefinedShape ellipse_shape(const Ellipse& e, int w, int h) {
  RefinedShape s;
  s.closed_mask = rasterize(e, w, h);
  s.pruned_mask = s.closed_mask;
  s.ellipse = e;
  s.ellipse_mask = s.closed_mask;
  s.used_ellipse = true;
  return s;
}

}  // namespace

TEST(Biometry, AxisEndpoints) {
  const auto ps = ellipse_shape({{100, 100}, 40, 12, 0}, 300, 200);
  const auto ax = ps_axis_endpoints(ps, {220, 100});
  EXPECT_NEAR(ax.proximal.x, 60, 1e-12);
  EXPECT_NEAR(ax.apex.x, 140, 1e-12);
  EXPECT_NEAR(ax.apex.y, 100, 1e-12);
}

TEST(Biometry, MaskDiameterMatchesAllPairs) {
  rng::Stream r{15};
  for (int t = 0; t < 20; ++t) {
    const auto m = largest_component(oracle::random_blobs(40, 40, 4, r));
    if (count(m) < 2) continue;
    const auto pts = boundary_centers(m);
    ASSERT_LE(pts.size(), 500u);
    double best = 0;
    for (Point p : pts) {
      for (Point q : pts) best = std::max(best, distance(p, q));
    }
    const auto d = diameter(pts);
    EXPECT_DOUBLE_EQ(distance(d.first, d.second), best);
  }
}

TEST(Biometry, AopCircleOracle) {
  const auto ps = ellipse_shape({{100, 100}, 40, 12, 0}, 320, 220);
  const auto fh = ellipse_shape({{240, 100}, 50, 50, 0}, 320, 220);
  const auto r = compute_aop(ps, fh);
  EXPECT_NEAR(r.degrees, 150.0, 1e-9);
  for (double d : {60.0, 75.0, 110.0, 150.0}) {
    const auto fh2 = ellipse_shape({{140 + d, 100}, 50, 50, 0}, 400, 220);
    EXPECT_NEAR(compute_aop(ps, fh2).degrees, 180.0 - rad2deg(std::asin(50.0 / d)), 1e-9);
  }
}

TEST(Biometry, AopOverlapIsAnError) {
  const auto ps = ellipse_shape({{100, 100}, 40, 12, 0}, 320, 220);
  const auto fh = ellipse_shape({{170, 100}, 50, 50, 0}, 320, 220);
  EXPECT_THROW(compute_aop(ps, fh), OverlapError);
  auto fh_mask = fh;
  fh_mask.used_ellipse = false;
  EXPECT_THROW(compute_aop(ps, fh_mask), OverlapError);
}

TEST(Biometry, MaskTangentIsSupporting) {
  const auto ps = ellipse_shape({{100, 100}, 40, 12, 0}, 320, 220);
  auto fh = ellipse_shape({{240, 100}, 50, 50, 0}, 320, 220);
  fh.used_ellipse = false;
  const auto r = compute_aop(ps, fh);
  const auto hull = convex_hull(boundary_centers(fh.closed_mask));
  EXPECT_TRUE(is_supporting_line(r.axis.apex, r.tangent, hull, 0.0));
  EXPECT_NEAR(r.degrees, 150.0, 1.0);
}

TEST(Biometry, HsdCircleOracleAndBruteForce) {
  const auto ps = rasterize({{100, 100}, 40, 12, 0}, 320, 220);
  const auto fh = disk(320, 220, {240, 100}, 50);
  const auto h = compute_hsd(ps, fh, {140, 100});
  EXPECT_NEAR(h.pixels, 50.0, 0.8);
  double best = 1e300;
  for (int y = 0; y < 220; ++y) {
    for (int x = 0; x < 320; ++x) {
      if (oracle::is_boundary(fh, x, y)) best = std::min(best, distance({140, 100}, {x + 0.5, y + 0.5}));
    }
  }
  EXPECT_EQ(h.pixels, best);
  EXPECT_EQ(compute_hsd(ps, disk(320, 220, {180, 100}, 40.5), {140, 100}).pixels, 0.0);
}

TEST(Biometry, MeasureFrameMissingStructure) {
  LabelMask m(50, 50);
  for (int y = 10; y < 30; ++y) {
    for (int x = 10; x < 30; ++x) m(x, y) = 2;
  }
  try {
    measure_frame(m);
    FAIL();
  } catch (const MissingStructure& e) {
    EXPECT_NE(std::string(e.what()).find("PS"), std::string::npos);
  }
}

TEST(Biometry, AopInvariantUnderRigidMotion) {
  auto scene = [](double deg, Point shift) {
    LabelMask m(400, 400);
    const Point c{200, 200};
    auto place = [&](Point p) {
      const double t = deg2rad(deg);
      const Point d = p - c;
      return c + Point{d.x * std::cos(t) - d.y * std::sin(t), d.x * std::sin(t) + d.y * std::cos(t)} + shift;
    };
    const Ellipse ps{place({120, 200}), 35, 12, normalize_axis_angle(10 + deg)};
    const Ellipse fh{place({250, 230}), 80, 65, normalize_axis_angle(100 + deg)};
    const auto a = rasterize(ps, 400, 400), b = rasterize(fh, 400, 400);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = a[i] ? 1 : b[i] ? 2 : 0;
    return measure_frame(m);
  };
  const auto base = scene(0, {0, 0});
  for (double deg : {17.0, 45.0, 90.0, 133.0}) {
    EXPECT_NEAR(scene(deg, {0, 0}).aop, base.aop, 0.5) << deg;
  }
  EXPECT_NEAR(scene(0, {13.3, -7.6}).aop, base.aop, 0.5);
}
