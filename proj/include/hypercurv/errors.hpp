#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hcurv {

/// Invalid argument to a pure function (index out of range, bad parameter).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A curvature vector or spectrum fell outside the positive cone.
class DomainError : public std::domain_error {
public:
  DomainError(const std::string& what, std::vector<double> offending = {})
      : std::domain_error(what), offending_(std::move(offending)) {}

  const std::vector<double>& offending() const noexcept { return offending_; }

private:
  std::vector<double> offending_;
};

/// A height field is not admissible (some hyperbolic principal curvature <= 0).
class AdmissibilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Grid/domain construction failed (e.g. no interior nodes at the given h).
class ConfigurationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DiscretizationError : public std::runtime_error {
public:
  DiscretizationError(const std::string& what, int node)
      : std::runtime_error(what), node_(node) {}
  int node() const noexcept { return node_; }

private:
  int node_;
};

/// Newton / continuity / outer-iteration failure. Carries the last valid
/// continuation parameter and residual, plus the outer Cauchy history.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double last_t, double last_residual,
                   std::vector<double> history = {})
      : std::runtime_error(what), last_t_(last_t), last_residual_(last_residual),
        history_(std::move(history)) {}

  double last_t() const noexcept { return last_t_; }
  double last_residual() const noexcept { return last_residual_; }
  const std::vector<double>& history() const noexcept { return history_; }

private:
  double last_t_;
  double last_residual_;
  std::vector<double> history_;
};

}  // namespace hcurv
