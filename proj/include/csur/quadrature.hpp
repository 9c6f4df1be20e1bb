#pragma once

#include "csur/types.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace csur::quadrature {

/// Gauss-Legendre rule with N nodes on [0, 1].
template <int N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};
};

/// Builds the N-point Gauss-Legendre rule by Newton iteration on P_N, mapped to [0, 1].
template <int N>
GaussLegendre<N> make_gauss_legendre() {
  GaussLegendre<N> rule;
  for (int i = 0; i < N; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= N; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = N * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[N - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[N - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2), halved for [0,1]
  }
  return rule;
}

template <int N>
const GaussLegendre<N>& gauss_legendre() {
  static const GaussLegendre<N> rule = make_gauss_legendre<N>();
  return rule;
}

/// Integrates f along the segment [p, q] with respect to arclength (16-node rule).
template <typename F>
auto integrate_segment(const Vec2& p, const Vec2& q, F&& f) {
  const auto& rule = gauss_legendre<16>();
  const double length = (q - p).norm();
  using R = decltype(f(p));
  R acc = f(p) * 0.0;
  for (int n = 0; n < 16; ++n) acc += rule.weights[n] * f(p + rule.nodes[n] * (q - p));
  return R(acc * length);
}

/// Integrates f over the triangle (a, b, c) with a conical product rule
/// (5 x 4 Gauss-Legendre nodes), exact for polynomials of total degree 7.
template <typename F>
auto integrate_triangle(const Vec2& a, const Vec2& b, const Vec2& c, F&& f) {
  const auto& radial = gauss_legendre<5>();
  const auto& angular = gauss_legendre<4>();
  const double twice_area = std::abs(cross2(b - a, c - a));
  using R = decltype(f(a));
  R acc = f(a) * 0.0;
  for (int i = 0; i < 5; ++i) {
    const double u = radial.nodes[i];
    for (int j = 0; j < 4; ++j) {
      const double w = angular.nodes[j];
      const Vec2 point = a + u * ((1.0 - w) * (b - a) + w * (c - a));
      acc += (radial.weights[i] * angular.weights[j] * u) * f(point);
    }
  }
  return R(acc * twice_area);
}

namespace detail {

inline double magnitude(double x) { return std::abs(x); }

template <typename Derived>
double magnitude(const Eigen::MatrixBase<Derived>& x) {
  return x.norm();
}

template <typename F, typename R>
R refine_triangle(const Vec2& a, const Vec2& b, const Vec2& c, F& f, const R& whole, double tol, int depth) {
  const Vec2 ab = 0.5 * (a + b);
  const Vec2 bc = 0.5 * (b + c);
  const Vec2 ca = 0.5 * (c + a);
  const R parts[4] = {integrate_triangle(a, ab, ca, f), integrate_triangle(ab, b, bc, f),
                      integrate_triangle(ca, bc, c, f), integrate_triangle(ab, bc, ca, f)};
  R sum = parts[0] + parts[1] + parts[2] + parts[3];
  if (depth == 0 || magnitude(sum - whole) <= tol) return sum;
  sum = refine_triangle(a, ab, ca, f, parts[0], 0.5 * tol, depth - 1);
  sum += refine_triangle(ab, b, bc, f, parts[1], 0.5 * tol, depth - 1);
  sum += refine_triangle(ca, bc, c, f, parts[2], 0.5 * tol, depth - 1);
  sum += refine_triangle(ab, bc, ca, f, parts[3], 0.5 * tol, depth - 1);
  return sum;
}

}  // namespace detail

/// The degree-7 rule with 4-way midpoint refinement until a level changes the
/// result by at most rel_tol of the whole-triangle estimate.
template <typename F>
auto integrate_triangle_adaptive(const Vec2& a, const Vec2& b, const Vec2& c, F&& f, double rel_tol = 1e-13,
                                 int max_depth = 8) {
  using R = decltype(f(a));
  const R whole = integrate_triangle(a, b, c, f);
  return detail::refine_triangle<F, R>(a, b, c, f, whole, rel_tol * detail::magnitude(whole), max_depth);
}

}  // namespace csur::quadrature
