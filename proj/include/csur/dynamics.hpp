#pragma once

#include "csur/coverage.hpp"

#include <cmath>
#include <string>

namespace csur {

/// Pose of a constant-speed unicycle. theta is never wrapped.
struct AgentState {
  Vec2 zeta = Vec2::Zero();
  double theta = 0.0;
  double v = 1.0;
  double omega = 1.0;

  bool operator==(const AgentState&) const = default;
};

inline Vec2 heading(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// d r / d theta.
inline Vec2 heading_normal(double theta) { return {-std::sin(theta), std::cos(theta)}; }

inline void validate_speeds(const AgentState& s, const std::string& where) {
  if (!(s.v > 0.0) || !std::isfinite(s.v))
    throw CoverageError(ErrorCode::InvalidParameter, where + ".v must be a finite value > 0");
  if (!(std::abs(s.omega) > 0.0) || !std::isfinite(s.omega))
    throw CoverageError(ErrorCode::InvalidParameter, where + ".omega must be finite and nonzero");
}

/// Center of the nominal orbit: z = zeta + (v / omega) dr/dtheta.
inline Vec2 virtual_center(const AgentState& s) {
  if (s.omega == 0.0) throw CoverageError(ErrorCode::InvalidParameter, "virtual center needs omega != 0");
  return s.zeta + (s.v / s.omega) * heading_normal(s.theta);
}

/// Inverse of virtual_center for a given heading.
inline Vec2 orbit_point(const Vec2& z, double theta, double v, double omega) {
  return z - (v / omega) * heading_normal(theta);
}

/// rho(x | delta) = x / (|x| + delta).
inline double sigmoid(double x, double delta) {
  if (!(delta > 0.0)) throw CoverageError(ErrorCode::InvalidParameter, "sigmoid boundary layer must be > 0");
  return x / (std::abs(x) + delta);
}

struct ControlOutput {
  double u = 0.0;
  double sigma = 0.0;
};

/// u = omega + gamma omega rho(r(theta)^T grad_V | delta).
inline ControlOutput control_input(double theta, const Vec2& grad_V, const AgentParams& p, double omega) {
  ControlOutput out;
  out.sigma = heading(theta).dot(grad_V);
  out.u = omega + p.gamma * omega * sigmoid(out.sigma, p.delta);
  return out;
}

enum class Integrator { Exact, Euler };

inline const char* to_string(Integrator i) { return i == Integrator::Exact ? "exact" : "euler"; }

/// sin(x) / x, accurate near zero.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

/// Advances one sample with u held. Exact integrates the unicycle arc in closed
/// form (chord of length v dt sinc(u dt / 2) along the mid heading); Euler is
/// zeta += dt v r(theta).
inline AgentState step_csur(const AgentState& s, double u, double dt, Integrator integrator = Integrator::Exact) {
  if (!(dt > 0.0)) throw CoverageError(ErrorCode::InvalidParameter, "time step must be > 0");
  AgentState out = s;
  const double turn = u * dt;
  if (integrator == Integrator::Euler) {
    out.zeta = s.zeta + dt * s.v * heading(s.theta);
  } else {
    out.zeta = s.zeta + (s.v * dt * sinc(0.5 * turn)) * heading(s.theta + 0.5 * turn);
  }
  out.theta = s.theta + turn;
  return out;
}

/// z' = z - dt gamma grad_H.
inline Vec2 step_conventional(const Vec2& z, const Vec2& grad_H, double gamma, double dt) {
  if (!(dt > 0.0)) throw CoverageError(ErrorCode::InvalidParameter, "time step must be > 0");
  return z - dt * gamma * grad_H;
}

}  // namespace csur
