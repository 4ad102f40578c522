#pragma once

// Ellipse geometry and the approximate-mean-square (AMS) conic fit.
//
// Angles follow the raster convention: theta is measured from +x toward +y
// (clockwise on screen because y points down), in degrees, in [0, 180).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aopkit/errors.hpp"
#include "aopkit/raster.hpp"

namespace aopkit {

inline constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

struct Ellipse {
  Point center;
  double a = 1.0;      // semi-major
  double b = 1.0;      // semi-minor
  double theta = 0.0;  // major-axis direction, degrees in [0, 180)

  Point major_dir() const {
    const double t = deg2rad(theta);
    return {std::cos(t), std::sin(t)};
  }
  Point minor_dir() const {
    const double t = deg2rad(theta);
    return {-std::sin(t), std::cos(t)};
  }

  /// Coordinates of p along (major, minor) axes relative to the center.
  Point to_local(Point p) const {
    const Point d = p - center;
    return {dot(d, major_dir()), dot(d, minor_dir())};
  }
  Point from_local(Point q) const {
    return center + q.x * major_dir() + q.y * minor_dir();
  }

  /// (u/a)^2 + (v/b)^2 in the local frame; <= 1 inside.
  double form(Point p) const {
    const Point q = to_local(p);
    return (q.x / a) * (q.x / a) + (q.y / b) * (q.y / b);
  }

  Point at_parameter(double t) const {
    return from_local({a * std::cos(t), b * std::sin(t)});
  }

  /// For a circle the axis is taken along theta = 0.
  std::pair<Point, Point> major_endpoints() const {
    if (a == b) return {center - Point{a, 0.0}, center + Point{a, 0.0}};
    return {from_local({-a, 0.0}), from_local({a, 0.0})};
  }

  double area() const { return std::numbers::pi * a * b; }

  bool valid() const {
    return std::isfinite(center.x) && std::isfinite(center.y) && std::isfinite(a) &&
           std::isfinite(b) && std::isfinite(theta) && a >= b && b > 0.0;
  }
};

/// Wraps any angle in degrees into [0, 180).
inline double normalize_axis_angle(double deg) {
  double t = std::fmod(deg, 180.0);
  if (t < 0.0) t += 180.0;
  if (t >= 180.0) t -= 180.0;
  return t;
}

/// Builds an ellipse from two semi-axes in any order; swaps and rotates so
/// that a >= b. Circles get theta = 0.
inline Ellipse make_ellipse(Point center, double axis_u, double axis_v, double theta_deg) {
  if (axis_u == axis_v) return {center, axis_u, axis_v, 0.0};
  if (axis_u >= axis_v) return {center, axis_u, axis_v, normalize_axis_angle(theta_deg)};
  return {center, axis_v, axis_u, normalize_axis_angle(theta_deg + 90.0)};
}

/// Boundary counts as inside.
inline bool contains(const Ellipse& e, Point p) { return e.form(p) <= 1.0; }

/// Pixel (x, y) is set iff its center lies in `e`.
inline BinaryMask rasterize(const Ellipse& e, int width, int height) {
  BinaryMask out(width, height);
  // Bounding box of the rotated ellipse.
  const double t = deg2rad(e.theta);
  const double hx = std::hypot(e.a * std::cos(t), e.b * std::sin(t));
  const double hy = std::hypot(e.a * std::sin(t), e.b * std::cos(t));
  const int x0 = std::max(0, static_cast<int>(std::floor(e.center.x - hx - 1.0)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(e.center.x + hx + 1.0)));
  const int y0 = std::max(0, static_cast<int>(std::floor(e.center.y - hy - 1.0)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(e.center.y + hy + 1.0)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (contains(e, {x + 0.5, y + 0.5})) out(x, y) = 1;
    }
  }
  return out;
}

/// General conic A x^2 + B xy + C y^2 + D x + E y + F = 0.
struct Conic {
  double A = 0, B = 0, C = 0, D = 0, E = 0, F = 0;

  bool is_ellipse() const { return B * B - 4.0 * A * C < 0.0; }
  double eval(Point p) const {
    return A * p.x * p.x + B * p.x * p.y + C * p.y * p.y + D * p.x + E * p.y + F;
  }
};

inline Conic to_conic(const Ellipse& e) {
  const double t = deg2rad(e.theta);
  const double c = std::cos(t), s = std::sin(t);
  const double ia2 = 1.0 / (e.a * e.a), ib2 = 1.0 / (e.b * e.b);
  Conic q;
  q.A = c * c * ia2 + s * s * ib2;
  q.B = 2.0 * c * s * (ia2 - ib2);
  q.C = s * s * ia2 + c * c * ib2;
  const double x0 = e.center.x, y0 = e.center.y;
  q.D = -2.0 * q.A * x0 - q.B * y0;
  q.E = -q.B * x0 - 2.0 * q.C * y0;
  q.F = q.A * x0 * x0 + q.B * x0 * y0 + q.C * y0 * y0 - 1.0;
  return q;
}

/// Geometric parameters of an elliptic conic, or nullopt for any other conic
/// (including imaginary ellipses).
inline std::optional<Ellipse> conic_to_ellipse(const Conic& q) {
  const double disc = q.B * q.B - 4.0 * q.A * q.C;
  if (!(disc < 0.0)) return std::nullopt;
  const double x0 = (q.B * q.E - 2.0 * q.C * q.D) / (4.0 * q.A * q.C - q.B * q.B);
  const double y0 = (q.B * q.D - 2.0 * q.A * q.E) / (4.0 * q.A * q.C - q.B * q.B);
  const double f0 = q.eval({x0, y0});
  // Rotate by phi to remove the cross term.
  const double phi = 0.5 * std::atan2(q.B, q.A - q.C);
  const double c = std::cos(phi), s = std::sin(phi);
  const double lu = q.A * c * c + q.B * c * s + q.C * s * s;
  const double lv = q.A * s * s - q.B * c * s + q.C * c * c;
  const double ru = -f0 / lu;
  const double rv = -f0 / lv;
  if (!(ru > 0.0 && rv > 0.0) || !std::isfinite(ru) || !std::isfinite(rv)) return std::nullopt;
  Ellipse e = make_ellipse({x0, y0}, std::sqrt(ru), std::sqrt(rv), rad2deg(phi));
  if (!e.valid()) return std::nullopt;
  return e;
}

namespace detail {

struct Normalization {
  Point mean;
  double scale = 1.0;  // normalized = (p - mean) / scale
};

/// Centers points and scales them to unit RMS distance from the centroid.
inline Normalization normalize_points(std::span<const Point> pts, std::vector<Point>& out) {
  Normalization n;
  for (Point p : pts) n.mean = n.mean + p;
  n.mean = (1.0 / pts.size()) * n.mean;
  double ss = 0.0;
  for (Point p : pts) {
    const Point d = p - n.mean;
    ss += dot(d, d);
  }
  n.scale = std::sqrt(ss / pts.size());
  out.clear();
  if (!(n.scale > 0.0)) return n;
  for (Point p : pts) out.push_back((1.0 / n.scale) * (p - n.mean));
  return n;
}

inline bool collinear(std::span<const Point> unit_pts) {
  double sxx = 0, sxy = 0, syy = 0;
  for (Point p : unit_pts) {
    sxx += p.x * p.x;
    sxy += p.x * p.y;
    syy += p.y * p.y;
  }
  const double n = static_cast<double>(unit_pts.size());
  sxx /= n, sxy /= n, syy /= n;
  // Smallest eigenvalue of the 2x2 covariance (trace is 1 after normalization).
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  const double lmin = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  return lmin < 1e-12 * tr;
}

inline Ellipse denormalize(const Ellipse& e, const Normalization& n) {
  return {n.mean + n.scale * e.center, e.a * n.scale, e.b * n.scale, e.theta};
}

/// Ellipse-specific direct least squares (numerically stable partitioned
/// form). Points are already normalized.
inline std::optional<Conic> fit_direct(std::span<const Point> pts) {
  Eigen::Matrix3d s1 = Eigen::Matrix3d::Zero(), s2 = Eigen::Matrix3d::Zero(),
                  s3 = Eigen::Matrix3d::Zero();
  for (Point p : pts) {
    const Eigen::Vector3d q(p.x * p.x, p.x * p.y, p.y * p.y);
    const Eigen::Vector3d l(p.x, p.y, 1.0);
    s1 += q * q.transpose();
    s2 += q * l.transpose();
    s3 += l * l.transpose();
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(s3);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::Matrix3d t = -lu.solve(s2.transpose());
  const Eigen::Matrix3d m = s1 + s2 * t;
  Eigen::Matrix3d reduced;
  reduced.row(0) = m.row(2) / 2.0;
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / 2.0;
  Eigen::EigenSolver<Eigen::Matrix3d> es(reduced);
  if (es.info() != Eigen::Success) return std::nullopt;
  std::optional<Conic> best;
  double best_eval = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d v = es.eigenvectors().col(i).real();
    const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (cond <= 0.0) continue;
    const double ev = es.eigenvalues()(i).real();
    if (best && ev >= best_eval) continue;
    const Eigen::Vector3d w = t * v;
    best = Conic{v(0), v(1), v(2), w(0), w(1), w(2)};
    best_eval = ev;
  }
  return best;
}

}  // namespace detail

/// AMS fit: the conic minimizing sum (x^T v)^2 / sum |grad(x^T v)|^2 over the
/// points, solved as a generalized symmetric eigenproblem after eliminating
/// the constant term. Falls back to the ellipse-constrained direct fit when
/// the minimizer is not an ellipse.
inline Ellipse fit_ams(std::span<const Point> points) {
  if (points.size() < 5) {
    throw DegenerateInput("ellipse fit needs at least 5 points, got " +
                          std::to_string(points.size()));
  }
  std::vector<Point> pts;
  const auto norm = detail::normalize_points(points, pts);
  if (pts.empty() || detail::collinear(pts)) {
    throw DegenerateInput("ellipse fit input is collinear or coincident");
  }

  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;
  Mat6 design = Mat6::Zero();
  Mat5 grad = Mat5::Zero();
  for (Point p : pts) {
    const double x = p.x, y = p.y;
    const Vec6 z(x * x, x * y, y * y, x, y, 1.0);
    design += z * z.transpose();
    Eigen::Matrix<double, 5, 1> gx, gy;
    gx << 2 * x, y, 0, 1, 0;
    gy << 0, x, 2 * y, 0, 1;
    grad += gx * gx.transpose() + gy * gy.transpose();
  }
  const double n = static_cast<double>(pts.size());
  // Minimizing over the constant term: F = -(d12 . u) / n.
  const Eigen::Matrix<double, 5, 1> d12 = design.block<5, 1>(0, 5);
  const Mat5 reduced = design.block<5, 5>(0, 0) - d12 * d12.transpose() / n;

  Eigen::SelfAdjointEigenSolver<Mat5> gcheck(grad, Eigen::EigenvaluesOnly);
  if (gcheck.eigenvalues()(0) <= 1e-12 * gcheck.eigenvalues()(4)) {
    throw DegenerateInput("ellipse fit gradient scatter is rank deficient");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat5> ges(reduced, grad);
  if (ges.info() != Eigen::Success) throw DegenerateInput("ellipse fit eigen-solve failed");

  std::optional<Ellipse> fitted;
  {
    const Eigen::Matrix<double, 5, 1> u = ges.eigenvectors().col(0);
    const double f = -d12.dot(u) / n;
    fitted = conic_to_ellipse({u(0), u(1), u(2), u(3), u(4), f});
  }
  if (!fitted) {
    const auto direct = detail::fit_direct(pts);
    if (direct) fitted = conic_to_ellipse(*direct);
  }
  if (!fitted) throw DegenerateInput("no ellipse fits the points");
  return detail::denormalize(*fitted, norm);
}

inline Ellipse fit_ams(const std::vector<Point>& points) {
  return fit_ams(std::span<const Point>(points));
}

/// The two points of `e` whose tangent lines pass through `p`. Ordered by the
/// direction angle of (t - p), atan2 in (-180, 180], smaller first.
inline std::pair<Point, Point> external_tangents(const Ellipse& e, Point p) {
  // Affine map to the unit circle.
  const Point q = e.to_local(p);
  const Point u{q.x / e.a, q.y / e.b};
  const double d = norm(u);
  if (!(d > 1.0)) throw NoTangent("point lies inside or on the ellipse");
  const double base = std::atan2(u.y, u.x);
  const double half = std::acos(1.0 / d);
  Point t1 = e.from_local({e.a * std::cos(base + half), e.b * std::sin(base + half)});
  Point t2 = e.from_local({e.a * std::cos(base - half), e.b * std::sin(base - half)});
  const double a1 = std::atan2(t1.y - p.y, t1.x - p.x);
  const double a2 = std::atan2(t2.y - p.y, t2.x - p.x);
  if (a2 < a1) std::swap(t1, t2);
  return {t1, t2};
}

}  // namespace aopkit
