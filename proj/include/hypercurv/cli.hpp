#pragma once

// Batch commands behind the hypercurv executable. Each returns the process
// exit code: 0 success, 1 numerical failure, 2 configuration error.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "hypercurv/config.hpp"
#include "hypercurv/continuation.hpp"
#include "hypercurv/export.hpp"
#include "hypercurv/oracle.hpp"
#include "hypercurv/validate.hpp"

namespace hcurv::cli {

enum ExitCode : int { kOk = 0, kNumerical = 1, kConfig = 2 };

struct Options {
  std::string config;
  std::string out;  ///< overrides [output] directory when non-empty
  bool quiet = false;
  unsigned long long seed = ValidateOptions{}.seed;
};

namespace detail {

inline std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", eps);
  return buf;
}

// Loads the config, reporting field-level problems on `err`.
inline bool load(const Options& o, RunConfig& cfg, std::ostream& err) {
  if (o.config.empty()) {
    err << "error: --config is required\n";
    return false;
  }
  try {
    cfg = load_config(o.config);
  } catch (const ConfigError& e) {
    err << "configuration error in " << o.config << ":\n";
    for (const auto& m : e.messages()) err << "  " << m << '\n';
    return false;
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  return true;
}

inline bool make_grid(const RunConfig& cfg, DomainPtr& dom, std::ostream& err) {
  try {
    dom = make_domain(cfg.shape, cfg.h);
  } catch (const std::exception& e) {
    err << "configuration error: cannot build the grid: " << e.what() << '\n';
    return false;
  }
  return true;
}

inline std::string convergence_log(const LadderResult& L) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (const auto& e : L.entries) {
    os << "eps " << e.epsilon << ": outer " << e.outer_iterations << ", newton " << e.counters.newton_iterations
       << ", factorizations " << e.counters.factorizations << ", min outer increase " << e.min_outer_increase
       << ", residual " << e.state.residual_inf() << (e.diagnostics.passed() ? "" : ", HARD CHECK FAILED") << '\n';
    for (const auto& c : e.diagnostics.checks)
      if (c.hard && !c.pass)
        os << "  " << c.name << ": value " << c.value << " margin " << c.margin << " at (" << c.x << ", " << c.y
           << ")" << (c.note.empty() ? "" : " " + c.note) << '\n';
  }
  if (!L.completed) {
    os << "stopped: " << L.failure << '\n';
    if (!L.failure_history.empty()) {
      os << "last outer Cauchy differences:";
      for (double d : L.failure_history) os << ' ' << d;
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace detail

inline int run_solve(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  DomainPtr dom;
  if (!detail::load(o, cfg, err) || !detail::make_grid(cfg, dom, err)) return kConfig;
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory " << dir << ": " << ec.message() << '\n';
    return kConfig;
  }

  DiagnosticsOptions dopt;
  dopt.ratio_a = cfg.ratio_a;
  const LadderResult L = epsilon_continuation(dom, cfg.schedule, dopt);

  if (cfg.write_csv)
    for (const auto& e : L.entries)
      write_text((dir / ("solution_eps" + detail::eps_tag(e.epsilon) + ".csv")).string(), solution_csv(e.state));
  write_text((dir / "report.json").string(), ladder_json(cfg, L).dump(2) + "\n");
  const std::string log_path = (dir / "convergence.log").string();
  write_text(log_path, detail::convergence_log(L));
  if (cfg.write_svg && !L.entries.empty()) {
    const auto& last = L.entries.back();
    const std::string tag = "eps = " + detail::eps_tag(last.epsilon);
    write_text((dir / "u.svg").string(), contour_svg(*dom, last.state.u.values, "u, " + tag));
    write_text((dir / "kappa_max.svg").string(), contour_svg(*dom, kappa_max_field(last.state), "kappa_max, " + tag));
  }

  bool hard_ok = true;
  for (const auto& e : L.entries) hard_ok = hard_ok && e.diagnostics.passed();
  if (!o.quiet) {
    out << std::setprecision(6);
    for (const auto& e : L.entries)
      out << "eps " << std::setw(10) << e.epsilon << "  outer " << std::setw(5) << e.outer_iterations
          << "  residual " << std::setw(12) << e.state.residual_inf() << "  max kappa " << std::setw(9) << e.max_kappa
          << "  checks " << (e.diagnostics.passed() ? "pass" : "FAIL") << '\n';
    out << "report: " << (dir / "report.json").string() << '\n';
  }
  if (!L.completed) {
    err << "solve failed: " << L.failure << "\nsee " << log_path << '\n';
    return kNumerical;
  }
  if (!hard_ok) {
    err << "hard diagnostic checks failed; see " << log_path << '\n';
    return kNumerical;
  }
  return kOk;
}

inline nlohmann::ordered_json validation_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["passed"] = r.passed();
  j["gradient_term_constant"] = r.gradient_term_constant;
  auto props = nlohmann::ordered_json::array();
  for (const auto& p : r.properties)
    props.push_back({{"name", p.name},
                     {"samples", p.samples},
                     {"failures", p.failures},
                     {"max_error", num(p.max_error)},
                     {"tolerance", p.tolerance},
                     {"counterexamples", p.counterexamples}});
  j["properties"] = props;
  return j;
}

inline int run_validate(const Options& o, std::ostream& out, std::ostream& err,
                        const ValidateOptions* override_opts = nullptr) {
  ValidateOptions vo = override_opts ? *override_opts : ValidateOptions{};
  vo.seed = o.seed;
  const auto rep = run_property_suite(vo);
  if (!o.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(o.out, ec);
    write_text((std::filesystem::path(o.out) / "validate.json").string(), validation_json(rep).dump(2) + "\n");
  }
  if (!o.quiet) {
    out << std::setprecision(3);
    for (const auto& p : rep.properties)
      out << std::left << std::setw(30) << p.name << std::right << std::setw(7) << p.samples << " samples  "
          << (p.passed() ? "pass" : "FAIL") << "  max err " << p.max_error << '\n';
  }
  if (rep.passed()) return kOk;
  int shown = 0;
  for (const auto& p : rep.properties)
    for (const auto& c : p.counterexamples) {
      if (shown++ == 20) break;
      err << p.name << ": " << c << '\n';
    }
  return kNumerical;
}

struct OracleRow {
  double epsilon = 0.0;
  double max_error = 0.0;
  double mean_error = 0.0;
  double tolerance = 0.0;
  double shooting_parameter = 0.0;
  bool pass = false;
};

/// Max and mean |u_2D - u_radial| over the unknown nodes.
inline OracleRow compare_with_oracle(const SurfaceState& s, const oracle::RadialProfile& prof, double tol) {
  OracleRow row;
  row.epsilon = s.epsilon;
  row.tolerance = tol;
  row.shooting_parameter = prof.shooting_parameter;
  const auto& dom = *s.domain;
  double sum = 0.0;
  for (int k = 0; k < dom.unknown_count(); ++k) {
    const int p = dom.unknown_node(k);
    const auto& n = dom.nodes()[p];
    const double e = std::abs(s.u[p] - prof(std::hypot(n.x, n.y)));
    row.max_error = std::max(row.max_error, e);
    sum += e;
  }
  row.mean_error = dom.unknown_count() ? sum / dom.unknown_count() : 0.0;
  row.pass = row.max_error <= tol;
  return row;
}

inline int run_oracle_compare(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (!detail::load(o, cfg, err)) return kConfig;
  oracle::RadialDomain rd;
  double tol = 5.0 * cfg.h * cfg.h;
  if (const auto* d = std::get_if<DiskShape>(&cfg.shape)) {
    rd = oracle::Disk{d->radius};
  } else if (const auto* a = std::get_if<AnnulusShape>(&cfg.shape)) {
    rd = oracle::Annulus{a->r_in, a->r_out};
    tol = std::max(2e-3, tol);
  } else {
    err << "configuration error: oracle-compare needs a disk or annulus domain, got " << shape::name(cfg.shape)
        << '\n';
    return kConfig;
  }
  DomainPtr dom;
  if (!detail::make_grid(cfg, dom, err)) return kConfig;

  const LadderResult L = epsilon_continuation(dom, cfg.schedule);
  std::vector<OracleRow> rows;
  bool ok = L.completed;
  for (const auto& e : L.entries) {
    try {
      const auto prof = oracle::shoot(rd, cfg.schedule.spec, cfg.schedule.sigma, e.epsilon);
      rows.push_back(compare_with_oracle(e.state, prof, tol));
      ok = ok && rows.back().pass;
    } catch (const std::exception& ex) {
      err << "oracle failed at eps " << e.epsilon << ": " << ex.what() << '\n';
      ok = false;
    }
  }

  nlohmann::ordered_json j;
  j["config_hash"] = cfg.hash();
  j["domain"] = shape::name(cfg.shape);
  j["h"] = cfg.h;
  j["tolerance"] = tol;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"epsilon", r.epsilon},
                   {"max_error", r.max_error},
                   {"mean_error", r.mean_error},
                   {"shooting_parameter", r.shooting_parameter},
                   {"pass", r.pass}});
  j["rows"] = arr;
  j["completed"] = L.completed;
  if (!L.completed) j["failure"] = L.failure;
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (!ec) write_text((std::filesystem::path(cfg.output_dir) / "oracle_compare.json").string(), j.dump(2) + "\n");

  if (!o.quiet) {
    out << "      eps     max |du|    mean |du|    tolerance\n" << std::scientific << std::setprecision(3);
    for (const auto& r : rows)
      out << std::setw(9) << r.epsilon << "  " << std::setw(10) << r.max_error << "  " << std::setw(10)
          << r.mean_error << "  " << std::setw(10) << r.tolerance << (r.pass ? "" : "  FAIL") << '\n';
    out << std::defaultfloat;
  }
  if (!L.completed) err << "2D solve failed: " << L.failure << '\n';
  return ok ? kOk : kNumerical;
}

/// Summarizes an existing report.json from the output directory.
inline int run_report(const Options& o, std::ostream& out, std::ostream& err) {
  std::string dir = o.out;
  if (dir.empty() && !o.config.empty()) {
    RunConfig cfg;
    if (!detail::load(o, cfg, err)) return kConfig;
    dir = cfg.output_dir;
  }
  if (dir.empty()) {
    err << "error: report needs --out DIR or --config PATH\n";
    return kConfig;
  }
  const auto path = std::filesystem::path(dir) / "report.json";
  std::ifstream in(path);
  if (!in) {
    err << "error: cannot read " << path.string() << '\n';
    return kConfig;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    err << "error: " << path.string() << " is not valid JSON: " << e.what() << '\n';
    return kConfig;
  }
  bool ok = j.value("completed", false);
  out << "config " << j.value("config_hash", std::string("?")) << "  domain " << j.value("domain", std::string("?"))
      << "  h " << j.value("h", 0.0) << '\n';
  for (const auto& lv : j.value("levels", nlohmann::json::array())) {
    const bool pass = lv.value("passed", false);
    ok = ok && pass;
    out << "eps " << lv.value("epsilon", 0.0) << "  outer " << lv.value("outer_iterations", 0) << "  max kappa "
        << lv.value("max_kappa", 0.0) << "  " << (pass ? "pass" : "FAIL") << '\n';
    for (const auto& c : lv.value("checks", nlohmann::json::array()))
      if (c.value("hard", false) && !c.value("pass", false))
        out << "  failed: " << c.value("name", std::string("?")) << '\n';
  }
  if (j.contains("failure")) out << "stopped: " << j["failure"].get<std::string>() << '\n';
  return ok ? kOk : kNumerical;
}

}  // namespace hcurv::cli
