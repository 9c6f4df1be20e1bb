#pragma once

#include "csur/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace csur {

namespace detail {

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline const char* colour(std::size_t k) { return kPalette[k % std::size(kPalette)]; }

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

/// Indices of at most `limit` evenly spaced records, always including the last.
inline std::vector<std::size_t> decimate(std::size_t count, std::size_t limit = 2000) {
  std::vector<std::size_t> out;
  if (count == 0) return out;
  const std::size_t stride = std::max<std::size_t>(1, (count + limit - 1) / limit);
  for (std::size_t s = 0; s < count; s += stride) out.push_back(s);
  if (out.back() != count - 1) out.push_back(count - 1);
  return out;
}

struct Frame {
  double x0, x1, y0, y1;       // data range
  double left = 70, top = 30;  // pixel margins
  double width = 640, height = 400;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const { return top + (y1 - y) / (y1 - y0) * height; }
};

inline std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width,
                            const std::string& extra = "") {
  std::string s = "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"" + extra +
                  " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += num(pts[i].first) + "," + num(pts[i].second);
  }
  return s + "\"/>\n";
}

inline std::string text(double x, double y, const std::string& body, const char* anchor = "middle") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + body + "</text>\n";
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Box, five ticks per axis and axis titles.
inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s = "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.width) + "\" height=\"" +
                  num(f.height) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += text(f.px(xv), f.top + f.height + 16, tick_label(xv));
    s += text(f.left - 6, f.py(yv) + 4, tick_label(yv), "end");
  }
  s += text(f.left + f.width / 2, f.top + f.height + 36, xlabel);
  s += "<text x=\"16\" y=\"" + num(f.top + f.height / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(f.top + f.height / 2) + ")\">" + ylabel + "</text>\n";
  return s;
}

inline void write_text(const std::string& file, const std::string& body) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw CoverageError(ErrorCode::Io, file + ": cannot write");
  out << body;
  if (!out) throw CoverageError(ErrorCode::Io, file + ": write failed");
}

}  // namespace detail

/// zeta paths (thin solid), z paths (thick dotted), centroid paths (thick dashed);
/// x marks the start and o the end of each path.
inline std::string trajectories_svg(const std::vector<StepRecord>& trace, const std::vector<Vec2>& region) {
  double x0 = region[0].x(), x1 = x0, y0 = region[0].y(), y1 = y0;
  auto grow = [&](const Vec2& p) {
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  };
  for (const auto& v : region) grow(v);
  const auto idx = detail::decimate(trace.size());
  for (std::size_t s : idx)
    for (const auto& a : trace[s].agents) grow(a.zeta);
  const double pad = 0.03 * std::max(x1 - x0, y1 - y0);
  x0 -= pad, x1 += pad, y0 -= pad, y1 += pad;
  detail::Frame f{x0, x1, y0, y1};
  // Equal aspect: shrink the longer pixel side.
  const double aspect = (y1 - y0) / (x1 - x0);
  if (aspect * f.width > f.height) f.width = f.height / aspect;
  else f.height = f.width * aspect;

  std::string s = detail::header(f.left + f.width + 20, f.top + f.height + 50);
  s += detail::axes(f, "x [m]", "y [m]");
  std::vector<std::pair<double, double>> outline;
  for (const auto& v : region) outline.emplace_back(f.px(v.x()), f.py(v.y()));
  outline.push_back(outline.front());
  s += detail::polyline(outline, "black", 1.5);

  const std::size_t n = trace.empty() ? 0 : trace.front().agents.size();
  auto marker = [&](const Vec2& p, const char* colour, bool start) {
    const double x = f.px(p.x()), y = f.py(p.y());
    if (start)
      return "<path d=\"M" + detail::num(x - 4) + "," + detail::num(y - 4) + " L" + detail::num(x + 4) + "," +
             detail::num(y + 4) + " M" + detail::num(x - 4) + "," + detail::num(y + 4) + " L" + detail::num(x + 4) +
             "," + detail::num(y - 4) + "\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
    return "<circle cx=\"" + detail::num(x) + "\" cy=\"" + detail::num(y) + "\" r=\"4\" fill=\"none\" stroke=\"" +
           colour + "\" stroke-width=\"1.5\"/>\n";
  };
  for (std::size_t k = 0; k < n; ++k) {
    const char* c = detail::colour(k);
    std::vector<std::pair<double, double>> zeta, z, cen;
    for (std::size_t st : idx) {
      const AgentRecord& a = trace[st].agents[k];
      zeta.emplace_back(f.px(a.zeta.x()), f.py(a.zeta.y()));
      z.emplace_back(f.px(a.z.x()), f.py(a.z.y()));
      cen.emplace_back(f.px(a.c.x()), f.py(a.c.y()));
    }
    s += detail::polyline(zeta, c, 0.6);
    s += detail::polyline(z, c, 2.0, " stroke-dasharray=\"1,3\" stroke-linecap=\"round\"");
    s += detail::polyline(cen, c, 2.0, " stroke-dasharray=\"6,4\"");
    for (const Vec2& p : {trace.front().agents[k].zeta, trace.front().agents[k].z, trace.front().agents[k].c})
      s += marker(p, c, true);
    for (const Vec2& p : {trace.back().agents[k].zeta, trace.back().agents[k].z, trace.back().agents[k].c})
      s += marker(p, c, false);
  }
  return s + "</svg>\n";
}

/// V over time for proposed runs, H for conventional runs.
inline std::string cost_svg(const std::vector<StepRecord>& trace, Controller controller) {
  const bool use_V = controller == Controller::Proposed;
  const auto idx = detail::decimate(trace.size());
  double hi = 0.0;
  for (std::size_t s : idx) hi = std::max(hi, use_V ? trace[s].V : trace[s].H);
  const double t1 = trace.empty() ? 1.0 : std::max(trace.back().t, 1e-9);
  detail::Frame f{0.0, t1, 0.0, hi > 0.0 ? 1.05 * hi : 1.0};
  std::string s = detail::header(f.left + f.width + 20, f.top + f.height + 50);
  s += detail::axes(f, "t [s]", use_V ? "V" : "H");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t st : idx) pts.emplace_back(f.px(trace[st].t), f.py(use_V ? trace[st].V : trace[st].H));
  s += detail::polyline(pts, "#1f77b4", 1.5);
  return s + "</svg>\n";
}

/// u_k(t) with the saturation band omega +- gamma omega of the first agent.
inline std::string inputs_svg(const std::vector<StepRecord>& trace, const std::vector<AgentSpec>& agents) {
  const auto idx = detail::decimate(trace.size());
  double lo = 0.0, hi = 0.0;
  for (const auto& a : agents) {
    const double w = a.state.omega, band = a.params.gamma * std::abs(w);
    lo = std::min(lo, w - band);
    hi = std::max(hi, w + band);
  }
  for (std::size_t st : idx)
    for (const auto& a : trace[st].agents) {
      lo = std::min(lo, a.u);
      hi = std::max(hi, a.u);
    }
  const double pad = 0.05 * std::max(hi - lo, 1e-9);
  const double t1 = trace.empty() ? 1.0 : std::max(trace.back().t, 1e-9);
  detail::Frame f{0.0, t1, lo - pad, hi + pad};
  std::string s = detail::header(f.left + f.width + 20, f.top + f.height + 50);
  s += detail::axes(f, "t [s]", "u [rad/s]");
  if (!agents.empty()) {
    const double w = agents.front().state.omega, band = agents.front().params.gamma * std::abs(w);
    for (double level : {w - band, w + band})
      s += detail::polyline({{f.px(0.0), f.py(level)}, {f.px(t1), f.py(level)}}, "gray", 1.0,
                            " stroke-dasharray=\"4,4\"");
  }
  const std::size_t n = trace.empty() ? 0 : trace.front().agents.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t st : idx) pts.emplace_back(f.px(trace[st].t), f.py(trace[st].agents[k].u));
    s += detail::polyline(pts, detail::colour(k), 1.0);
  }
  return s + "</svg>\n";
}

/// Writes trajectories.svg, cost.svg and inputs.svg into dir.
inline void write_plots(const std::string& dir, const std::vector<StepRecord>& trace, const Scenario& sc,
                        const std::vector<AgentSpec>& agents) {
  if (trace.empty()) return;
  detail::write_text(dir + "/trajectories.svg", trajectories_svg(trace, sc.region));
  detail::write_text(dir + "/cost.svg", cost_svg(trace, sc.controller));
  detail::write_text(dir + "/inputs.svg", inputs_svg(trace, agents));
}

}  // namespace csur
