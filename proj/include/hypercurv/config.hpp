#pragma once

// Run configuration: an INI file with [domain], [curvature], [solve] and
// [output] sections, validated field by field before any solve starts.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hypercurv/errors.hpp"
#include "hypercurv/grid.hpp"
#include "hypercurv/solver.hpp"

namespace hcurv {

/// Invalid configuration; carries one message per offending field.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> messages)
      : std::runtime_error(join(messages)), messages_(std::move(messages)) {}
  const std::vector<std::string>& messages() const noexcept { return messages_; }

private:
  static std::string join(const std::vector<std::string>& m) {
    std::string s;
    for (const auto& x : m) s += (s.empty() ? "" : "\n") + x;
    return s;
  }
  std::vector<std::string> messages_;
};

struct RunConfig {
  Shape shape = DiskShape{};
  double h = 1.0 / 64;
  SolveSchedule schedule;
  std::string output_dir = "out";
  bool write_csv = true;
  bool write_svg = true;
  std::optional<double> ratio_a;
  std::string source_text;  ///< raw file contents, hashed into reports

  /// FNV-1a (64 bit) of the raw configuration text.
  std::string hash() const {
    std::uint64_t x = 1469598103934665603ull;
    for (unsigned char c : source_text) x = (x ^ c) * 1099511628211ull;
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << x;
    return os.str();
  }
};

namespace detail {

class FieldReader {
public:
  FieldReader(const boost::property_tree::ptree& pt, std::vector<std::string>& errors)
      : pt_(pt), errors_(errors) {}

  bool has_section(const std::string& s) const { return pt_.get_child_optional(s).has_value(); }

  std::optional<std::string> str(const std::string& sec, const std::string& key) {
    used_[sec].insert(key);
    if (auto v = pt_.get_optional<std::string>(sec + "." + key)) return trim(*v);
    return std::nullopt;
  }

  std::optional<double> real(const std::string& sec, const std::string& key) {
    auto s = str(sec, key);
    if (!s) return std::nullopt;
    try {
      size_t pos = 0;
      const double v = std::stod(*s, &pos);
      if (pos != s->size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      errors_.push_back("[" + sec + "] " + key + ": expected a number, got '" + *s + "'");
      return std::nullopt;
    }
  }

  std::optional<long> integer(const std::string& sec, const std::string& key) {
    auto s = str(sec, key);
    if (!s) return std::nullopt;
    try {
      size_t pos = 0;
      const long v = std::stol(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      errors_.push_back("[" + sec + "] " + key + ": expected an integer, got '" + *s + "'");
      return std::nullopt;
    }
  }

  std::optional<bool> boolean(const std::string& sec, const std::string& key) {
    auto s = str(sec, key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1" || *s == "yes") return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    errors_.push_back("[" + sec + "] " + key + ": expected true/false, got '" + *s + "'");
    return std::nullopt;
  }

  std::optional<std::vector<double>> real_list(const std::string& sec, const std::string& key) {
    auto s = str(sec, key);
    if (!s) return std::nullopt;
    std::vector<double> out;
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        size_t pos = 0;
        out.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        errors_.push_back("[" + sec + "] " + key + ": bad list entry '" + item + "'");
        return std::nullopt;
      }
    }
    return out;
  }

  void require(const std::string& sec, const std::string& key) {
    if (!pt_.get_optional<std::string>(sec + "." + key)) errors_.push_back("[" + sec + "] " + key + ": required");
  }

  void reject_unknown() const {
    for (const auto& [sec, sub] : pt_) {
      const auto it = used_.find(sec);
      if (it == used_.end()) {
        errors_.push_back("[" + sec + "]: unknown section");
        continue;
      }
      for (const auto& [key, _] : sub)
        if (!it->second.count(key)) errors_.push_back("[" + sec + "] " + key + ": unknown key");
    }
  }

  void touch(const std::string& sec) { used_[sec]; }

private:
  static std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  const boost::property_tree::ptree& pt_;
  std::vector<std::string>& errors_;
  std::map<std::string, std::set<std::string>> used_;
};

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }
  std::vector<std::string> errors;
  detail::FieldReader rd(tree, errors);
  RunConfig cfg;
  cfg.source_text = text;

  // [domain]
  rd.touch("domain");
  if (!rd.has_section("domain")) {
    errors.push_back("[domain]: missing section");
  } else {
    const auto shape = rd.str("domain", "shape");
    const auto radius = rd.real("domain", "radius");
    const auto r_in = rd.real("domain", "r_in");
    const auto r_out = rd.real("domain", "r_out");
    const auto a = rd.real("domain", "a");
    const auto b = rd.real("domain", "b");
    const auto r0 = rd.real("domain", "r0");
    const auto amp = rd.real("domain", "amplitude");
    const auto lobes = rd.integer("domain", "lobes");
    if (auto h = rd.real("domain", "h")) cfg.h = *h;
    if (!(cfg.h > 0.0 && cfg.h < 1.0)) errors.push_back("[domain] h: must lie in (0, 1)");
    if (!shape) {
      errors.push_back("[domain] shape: required (disk, annulus, ellipse, blob)");
    } else {
      auto need = [&](const char* key, const std::optional<double>& v) {
        if (!v) errors.push_back(std::string("[domain] ") + key + ": required for shape " + *shape);
        return v.value_or(0.0);
      };
      if (*shape == "disk") {
        cfg.shape = DiskShape{need("radius", radius)};
      } else if (*shape == "annulus") {
        cfg.shape = AnnulusShape{need("r_in", r_in), need("r_out", r_out)};
      } else if (*shape == "ellipse") {
        cfg.shape = EllipseShape{need("a", a), need("b", b)};
      } else if (*shape == "blob") {
        cfg.shape = BlobShape{need("r0", r0), need("amplitude", amp), static_cast<int>(lobes.value_or(3))};
      } else {
        errors.push_back("[domain] shape: unknown shape '" + *shape + "'");
      }
      try {
        shape::validate(cfg.shape);
      } catch (const std::exception& e) {
        errors.push_back(std::string("[domain]: ") + e.what());
      }
    }
  }

  // [curvature]
  rd.touch("curvature");
  auto& sched = cfg.schedule;
  if (auto k = rd.integer("curvature", "k")) sched.spec.k = static_cast<int>(*k);
  if (auto l = rd.integer("curvature", "l")) sched.spec.l = static_cast<int>(*l);
  if (auto n = rd.integer("curvature", "n")) sched.spec.n = static_cast<int>(*n);
  if (auto s = rd.real("curvature", "sigma")) {
    sched.sigma = *s;
    if (!(*s > 0.0 && *s < 1.0)) errors.push_back("[curvature] sigma: must lie in (0, 1), got " + std::to_string(*s));
  } else {
    rd.require("curvature", "sigma");
  }
  if (sched.spec.n != 2) errors.push_back("[curvature] n: only n = 2 is supported on the grid");
  if (!(sched.spec.l >= 0 && sched.spec.l < sched.spec.k && sched.spec.k <= sched.spec.n))
    errors.push_back("[curvature] k, l: need 0 <= l < k <= n");

  // [solve]
  rd.touch("solve");
  if (auto v = rd.real_list("solve", "epsilon_ladder")) sched.epsilon_ladder = *v;
  const auto eps0 = rd.real("solve", "epsilon0");
  const auto levels = rd.integer("solve", "levels");
  if (eps0 || levels) {
    if (rd.str("solve", "epsilon_ladder"))
      errors.push_back("[solve] epsilon0/levels: conflicts with epsilon_ladder");
    else if (eps0 && !(*eps0 > 0.0))
      errors.push_back("[solve] epsilon0: must be positive");
    else if (levels && (*levels < 1 || *levels > 30))
      errors.push_back("[solve] levels: must lie in [1, 30]");
    else
      sched.epsilon_ladder = SolveSchedule::default_ladder(eps0.value_or(0.04), static_cast<int>(levels.value_or(6)));
  }
  if (auto v = rd.integer("solve", "continuity_steps")) sched.continuity_steps = static_cast<int>(*v);
  if (auto v = rd.real("solve", "newton_tol")) sched.newton_tol = *v;
  if (auto v = rd.integer("solve", "max_newton")) sched.max_newton = static_cast<int>(*v);
  if (auto v = rd.real("solve", "damping")) sched.damping = *v;
  if (auto v = rd.real("solve", "monotone_tol")) sched.monotone_tol = *v;
  if (auto v = rd.integer("solve", "max_outer")) sched.max_outer = static_cast<int>(*v);
  if (auto v = rd.real("solve", "source_slope")) sched.source_slope = *v;
  if (auto v = rd.boolean("solve", "reuse_jacobian")) sched.reuse_jacobian = *v;
  if (auto v = rd.real("solve", "ratio_a")) cfg.ratio_a = *v;
  try {
    SolveSchedule probe = sched;
    probe.sigma = 0.5;  // sigma already reported above
    probe.spec = {2, 1, 0};
    probe.validate();
  } catch (const std::exception& e) {
    errors.push_back(std::string("[solve]: ") + e.what());
  }
  if (cfg.ratio_a && !(*cfg.ratio_a > 0.0 && *cfg.ratio_a < 0.5)) errors.push_back("[solve] ratio_a: must lie in (0, 1/2)");

  // [output]
  rd.touch("output");
  if (auto v = rd.str("output", "directory")) cfg.output_dir = *v;
  if (auto v = rd.boolean("output", "csv")) cfg.write_csv = *v;
  if (auto v = rd.boolean("output", "svg")) cfg.write_svg = *v;

  rd.reject_unknown();
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hcurv
