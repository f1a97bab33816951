#pragma once

// Solution grids (CSV), the JSON run report and SVG contour plots.
// Every writer is a pure function of its inputs: no timestamps, no timings.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hypercurv/barriers.hpp"
#include "hypercurv/config.hpp"
#include "hypercurv/continuation.hpp"

namespace hcurv {

inline std::string fmt_g(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One row per active node; pinned nodes carry u = eps and nan geometry.
inline std::string solution_csv(const SurfaceState& s) {
  const auto& dom = *s.domain;
  std::ostringstream os;
  os << "x,y,u,w,nu_vertical,kappa_min,kappa_max,residual\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int p = 0; p < dom.active_count(); ++p) {
    const auto& n = dom.nodes()[p];
    const int k = dom.unknown_id(p);
    os << fmt_g(n.x) << ',' << fmt_g(n.y) << ',' << fmt_g(s.u[p]);
    if (k >= 0) {
      const auto& g = s.geometry[k];
      os << ',' << fmt_g(g.w) << ',' << fmt_g(g.nu) << ',' << fmt_g(g.kappa_min) << ',' << fmt_g(g.kappa_max) << ','
         << fmt_g(g.admissible ? g.F - s.sigma : nan);
    } else {
      os << ",nan,nan,nan,nan,nan";
    }
    os << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json to_json(const DiagnosticCheck& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["hard"] = c.hard;
  j["value"] = c.value;
  j["margin"] = c.margin;
  j["tolerance"] = c.tolerance;
  j["location"] = {{"node", c.node}, {"x", c.x}, {"y", c.y}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

/// Non-finite doubles become strings so the document stays valid JSON.
inline nlohmann::ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt_g(v);
}

inline nlohmann::ordered_json schedule_json(const RunConfig& cfg) {
  const auto& s = cfg.schedule;
  nlohmann::ordered_json j;
  j["sigma"] = s.sigma;
  j["curvature"] = {{"n", s.spec.n}, {"k", s.spec.k}, {"l", s.spec.l}};
  j["epsilon_ladder"] = s.epsilon_ladder;
  j["continuity_steps"] = s.continuity_steps;
  j["newton_tol"] = s.newton_tol;
  j["max_newton"] = s.max_newton;
  j["damping"] = s.damping;
  j["min_step"] = s.min_step;
  j["monotone_tol"] = s.monotone_tol;
  j["max_outer"] = s.max_outer;
  j["source_slope"] = s.source_slope ? nlohmann::ordered_json(*s.source_slope) : nlohmann::ordered_json("1/epsilon");
  return j;
}

inline nlohmann::ordered_json ladder_json(const RunConfig& cfg, const LadderResult& L) {
  nlohmann::ordered_json j;
  j["config_hash"] = cfg.hash();
  j["domain"] = shape::name(cfg.shape);
  j["h"] = cfg.h;
  j["schedule"] = schedule_json(cfg);
  j["tolerances"] = {{"residual", 2.0 * cfg.schedule.newton_tol},
                     {"height_slack", std::max(2.0 * cfg.h, 1e-6)},
                     {"boundary_nu_slack", 3.0 * cfg.h},
                     {"gradient_slack", 5.0 * cfg.h},
                     {"outer_monotonicity", -1e-9}};
  auto levels = nlohmann::ordered_json::array();
  for (const auto& e : L.entries) {
    nlohmann::ordered_json le;
    le["epsilon"] = e.epsilon;
    le["outer_iterations"] = e.outer_iterations;
    le["min_outer_increase"] = e.min_outer_increase;
    le["warm_started"] = e.warm_started;
    le["warm_start_blend"] = e.warm_start_blend;
    le["newton"] = {{"factorizations", e.counters.factorizations},
                    {"linear_solves", e.counters.linear_solves},
                    {"residual_evaluations", e.counters.residual_evals}};
    le["residual"] = num(e.state.residual_inf());
    le["max_w"] = e.max_w;
    le["max_kappa"] = e.max_kappa;
    le["min_kappa"] = e.min_kappa;
    le["boundary_nu_range"] = {num(e.boundary_nu.lo), num(e.boundary_nu.hi)};
    le["boundary_w_excess"] = e.boundary_w_excess;
    le["ratio_M_max"] = num(e.ratio_M);
    le["passed"] = e.diagnostics.passed();
    auto checks = nlohmann::ordered_json::array();
    for (const auto& c : e.diagnostics.checks) {
      auto cj = to_json(c);
      cj["value"] = num(c.value), cj["margin"] = num(c.margin);
      checks.push_back(cj);
    }
    le["checks"] = checks;
    levels.push_back(le);
  }
  j["levels"] = levels;
  j["completed"] = L.completed;
  if (!L.completed) {
    j["failure"] = L.failure;
    j["failure_history"] = L.failure_history;
  }
  const auto bound = kappa_bound_sigma(cfg.schedule.sigma);
  j["trend"] = {{"kappa_bound", bound ? nlohmann::ordered_json(*bound) : nlohmann::ordered_json("not applicable")},
                {"kappa_variation_last_two", L.trend.kappa_variation},
                {"kappa_bounded", L.trend.kappa_applicable ? nlohmann::ordered_json(L.trend.kappa_bounded)
                                                           : nlohmann::ordered_json("not asserted")},
                {"boundary_w_excess_monotone", L.trend.w_excess_monotone},
                {"boundary_w_excess_slope", num(L.trend.w_excess_slope)}};
  return j;
}

// --- SVG contours -----------------------------------------------------------

struct Segment {
  double x0, y0, x1, y1;
};

/// Marching squares over the lattice cells whose four corners are active.
inline std::vector<Segment> contour_segments(const GridDomain& dom, const std::vector<double>& node_values,
                                             double level) {
  std::vector<Segment> out;
  const int W = dom.grid_width();
  const int half = (W - 1) / 2;
  const double h = dom.h();
  auto val = [&](int i, int j, double& v) {
    const int a = dom.active_index(i, j);
    if (a < 0 || std::isnan(node_values[a])) return false;
    v = node_values[a];
    return true;
  };
  for (int i = -half; i < half; ++i)
    for (int j = -half; j < half; ++j) {
      double v[4];  // (i,j), (i+1,j), (i+1,j+1), (i,j+1)
      if (!val(i, j, v[0]) || !val(i + 1, j, v[1]) || !val(i + 1, j + 1, v[2]) || !val(i, j + 1, v[3])) continue;
      const double px[4] = {i * h, (i + 1) * h, (i + 1) * h, i * h};
      const double py[4] = {j * h, j * h, (j + 1) * h, (j + 1) * h};
      double ex[4], ey[4];
      int n = 0;
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        const double da = v[a] - level, db = v[b] - level;
        if ((da < 0) != (db < 0)) {
          const double t = da / (da - db);
          ex[n] = px[a] + t * (px[b] - px[a]);
          ey[n] = py[a] + t * (py[b] - py[a]);
          ++n;
        }
      }
      if (n == 2) out.push_back({ex[0], ey[0], ex[1], ey[1]});
      if (n == 4) {  // saddle: pair edges consistently
        out.push_back({ex[0], ey[0], ex[1], ey[1]});
        out.push_back({ex[2], ey[2], ex[3], ey[3]});
      }
    }
  return out;
}

inline std::string contour_svg(const GridDomain& dom, const std::vector<double>& node_values, const std::string& title,
                               int levels = 12) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : node_values)
    if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  const double ext = dom.box_max()[0];
  const double scale = 400.0 / ext;
  auto X = [&](double x) { return fmt_g(std::round((x + ext) * scale * 100) / 100); };
  auto Y = [&](double y) { return fmt_g(std::round((ext - y) * scale * 100) / 100); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"840\" viewBox=\"0 0 800 840\">\n";
  os << "<rect width=\"800\" height=\"840\" fill=\"white\"/>\n";
  os << "<text x=\"10\" y=\"830\" font-family=\"monospace\" font-size=\"14\">" << title << "  range [" << fmt_g(lo)
     << ", " << fmt_g(hi) << "]</text>\n";
  // boundary
  os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  constexpr int kCurve = 360;
  const int comps = shape::boundary_components(dom.shape());
  for (int c = 0; c < comps; ++c) {
    if (c > 0) os << "\"/>\n<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= kCurve; ++i) {
      const double t = 2.0 * std::numbers::pi * i / kCurve;
      double x, y;
      if (const auto* a = std::get_if<AnnulusShape>(&dom.shape())) {
        const double r = c == 0 ? a->r_out : a->r_in;
        x = r * std::cos(t), y = r * std::sin(t);
      } else if (const auto* d = std::get_if<DiskShape>(&dom.shape())) {
        x = d->radius * std::cos(t), y = d->radius * std::sin(t);
      } else {
        const auto p = shape::curve(dom.shape(), t);
        x = p.x, y = p.y;
      }
      os << X(x) << ',' << Y(y) << ' ';
    }
  }
  os << "\"/>\n";
  if (hi > lo) {
    for (int k = 1; k <= levels; ++k) {
      const double level = lo + (hi - lo) * k / (levels + 1);
      const double t = static_cast<double>(k) / (levels + 1);
      const int r = static_cast<int>(255 * t), b = static_cast<int>(255 * (1 - t));
      os << "<path fill=\"none\" stroke=\"rgb(" << r << ",60," << b << ")\" stroke-width=\"1\" d=\"";
      for (const auto& s : contour_segments(dom, node_values, level))
        os << 'M' << X(s.x0) << ' ' << Y(s.y0) << 'L' << X(s.x1) << ' ' << Y(s.y1);
      os << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

inline std::vector<double> kappa_max_field(const SurfaceState& s) {
  const auto& dom = *s.domain;
  std::vector<double> v(dom.active_count(), std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < dom.unknown_count(); ++k) v[dom.unknown_node(k)] = s.geometry[k].kappa_max;
  return v;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace hcurv
