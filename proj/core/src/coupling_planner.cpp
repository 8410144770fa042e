#include "costplan/coupling_planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>

#include "costplan/errors.hpp"
#include "costplan/numerics.hpp"

namespace costplan {

namespace {

constexpr Tolerance kRootTolerance{1e-14, 0.0, 300};
constexpr std::size_t kScanPoints = 2001;

std::vector<double> geomspace(double lo, double hi, std::size_t n) {
  std::vector<double> out = linspace(std::log(lo), std::log(hi), n);
  for (double& x : out) x = std::exp(x);
  out.front() = lo;
  out.back() = hi;
  return out;
}

struct Scan {
  std::vector<double> roots;  // parameter values where evar(param) == target
  double evar_lo = std::numeric_limits<double>::infinity();
  double evar_hi = -std::numeric_limits<double>::infinity();
};

// Samples evar over an ascending parameter grid, brackets every sign change of
// evar - target and refines it. Zeros exactly on an endpoint count only when
// that end of the parameter domain is closed.
Scan scan_roots(const std::function<double(double)>& evar, const std::vector<double>& grid, double target,
                bool closed_lo, bool closed_hi) {
  Scan scan;
  std::vector<double> diff(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double v = evar(grid[j]);
    scan.evar_lo = std::min(scan.evar_lo, v);
    scan.evar_hi = std::max(scan.evar_hi, v);
    diff[j] = v - target;
  }
  auto residual = [&](double p) { return evar(p) - target; };
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (diff[j] == 0.0) {
      const bool endpoint_ok = (j == 0 && closed_lo) || (j + 1 == grid.size() && closed_hi);
      if ((j > 0 && j + 1 < grid.size()) || endpoint_ok) scan.roots.push_back(grid[j]);
      continue;
    }
    if (j + 1 < grid.size() && diff[j + 1] != 0.0 && std::signbit(diff[j]) != std::signbit(diff[j + 1])) {
      scan.roots.push_back(find_root(residual, grid[j], grid[j + 1], kRootTolerance));
    }
  }
  return scan;
}

[[noreturn]] void throw_unattainable(const PlanTargets& t, const Scan& scan) {
  std::ostringstream msg;
  msg.precision(6);
  const double target = t.e_updev * t.e_updev;
  const double nearest = target < scan.evar_lo ? scan.evar_lo : scan.evar_hi;
  msg << to_string(t.family) << ": no (r, c_e) pair meets e_mean = " << t.e_mean << " J and e_updev = " << t.e_updev
      << " J; along the e_mean-consistent curve e_updev ranges over [" << std::sqrt(std::max(0.0, scan.evar_lo))
      << ", " << std::sqrt(std::max(0.0, scan.evar_hi)) << "] J (nearest attainable "
      << std::sqrt(std::max(0.0, nearest)) << " J)";
  throw InfeasibleError(Infeasibility::Unattainable, msg.str(), scan.evar_lo, scan.evar_hi);
}

std::vector<EnergySolution> solve_uniform(const RateCard& rates, const PlanTargets& t) {
  const double g = rates.g_e;
  const double i = rates.i_e;
  const double e = t.e_mean;
  // Half the threshold as a function of r, clamped to the closed feasible range.
  auto half_ce = [=](double r) { return std::sqrt(std::clamp((e - g * r) / (i * r), 0.0, 1.0)); };
  auto evar = [=](double r) {
    const double slack = 1.0 - half_ce(r);
    return 4.0 / 3.0 * g * g * r * r * slack * slack * slack;
  };
  const double r_lo = e / (g + i);  // c_e -> 2
  const double r_hi = e / g;        // c_e -> 0
  const Scan scan = scan_roots(evar, linspace(r_lo, r_hi, kScanPoints), t.e_updev * t.e_updev, false, false);

  std::vector<EnergySolution> out;
  for (double r : scan.roots) {
    const double c_e = 2.0 * half_ce(r);
    if (c_e > 0.0 && c_e < 2.0) out.push_back({r, c_e});
  }
  if (out.empty()) throw_unattainable(t, scan);
  return out;
}

std::vector<EnergySolution> solve_exponential(const RateCard& rates, const PlanTargets& t) {
  const double r_hi = t.e_mean / rates.g_e;  // c_e = 0
  auto threshold = [&](double r) {
    // g_e * r_hi can round one ulp above e_mean; that end is c_e = 0
    if (rates.g_e * r >= t.e_mean) return ExponentialThreshold{0.0, 2.0 * rates.g_e * rates.g_e * r * r};
    return solve_ce_exponential(rates, r, t.e_mean);
  };
  auto evar = [&](double r) { return threshold(r).e_var; };
  const Scan scan = scan_roots(evar, geomspace(r_hi * 1e-9, r_hi, kScanPoints), t.e_updev * t.e_updev, false, true);

  std::vector<EnergySolution> out;
  for (double r : scan.roots) out.push_back({r, threshold(r).c_e});
  if (out.empty()) throw_unattainable(t, scan);
  return out;
}

std::vector<EnergySolution> solve_pareto(const RateCard& rates, const PlanTargets& t) {
  const double alpha = *t.alpha;
  const double c_lo = pareto_idle_threshold(alpha);
  auto volume = [&](double c) { return solve_r_pareto(rates, c, alpha, t.e_mean); };
  auto evar = [&](double c) { return energy_pareto(rates, c, volume(c), alpha).e_var; };
  const Scan scan = scan_roots(evar, geomspace(c_lo, c_lo * 1e6, kScanPoints), t.e_updev * t.e_updev, true, false);

  std::vector<EnergySolution> out;
  for (double c : scan.roots) out.push_back({volume(c), c});
  if (out.empty()) throw_unattainable(t, scan);
  return out;
}

// Point mass at r: E_exp = g_e r for c_e <= 1 with E_var = g_e^2 (1-c_e)^2 r^2,
// and zero variability for every c_e >= 1. The smallest threshold wins.
std::vector<EnergySolution> solve_fixed(const RateCard& rates, const PlanTargets& t) {
  const double r = t.e_mean / rates.g_e;
  if (t.e_updev == 0.0) return {{r, 1.0}};
  if (t.e_updev < t.e_mean) return {{r, 1.0 - t.e_updev / t.e_mean}};
  Scan scan;
  scan.evar_lo = 0.0;
  scan.evar_hi = t.e_mean * t.e_mean;
  throw_unattainable(t, scan);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

void PlanTargets::validate() const {
  if (!(e_mean > 0.0) || !std::isfinite(e_mean)) throw DomainError("targets: e_mean must be finite and > 0");
  if (!(e_updev >= 0.0) || !std::isfinite(e_updev)) throw DomainError("targets: e_updev must be finite and >= 0");
  if (!(b_mean > 0.0) || !std::isfinite(b_mean)) throw DomainError("targets: b_mean must be finite and > 0");
  if (family == Family::Empirical) throw DomainError("targets: planning needs a parametric family");
  if (family == Family::Pareto && (!alpha || !(*alpha > 2.0))) {
    throw DomainError("targets: pareto planning needs alpha > 2");
  }
}

std::vector<EnergySolution> solve_energy_targets(const RateCard& rates, const PlanTargets& targets) {
  rates.validate();
  targets.validate();
  std::vector<EnergySolution> out;
  switch (targets.family) {
    case Family::Uniform: out = solve_uniform(rates, targets); break;
    case Family::Exponential: out = solve_exponential(rates, targets); break;
    case Family::Pareto: out = solve_pareto(rates, targets); break;
    case Family::Fixed: out = solve_fixed(rates, targets); break;
    case Family::Empirical: break;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.c_e < b.c_e; });
  return out;
}

CouplingPlan plan(const RateCard& rates, const PlanTargets& targets) {
  CouplingPlan p;
  p.energy_solutions = solve_energy_targets(rates, targets);
  p.r = p.energy_solutions.front().r;
  p.c_e = p.energy_solutions.front().c_e;

  p.devices = devices_for_budget(rates, targets.family, targets.alpha, p.r, targets.b_mean);
  if (!(p.devices.n > 0.0)) {
    throw InfeasibleError(Infeasibility::Billing, "billing budget yields a non-positive device count");
  }

  const VolumeModel device = targets.family == Family::Pareto ? VolumeModel::pareto(p.r, *targets.alpha)
                           : targets.family == Family::Exponential ? VolumeModel::exponential(p.r)
                           : targets.family == Family::Fixed       ? VolumeModel::fixed(p.r)
                                                                   : VolumeModel::uniform(p.r);
  const VolumeModel aggregate = device.with_mean(p.r * p.devices.n);
  p.c_b = optimal_cb_general(aggregate, rates);
  p.energy = energy_closed_form(rates, p.c_e, device);
  p.billing = billing_stats(aggregate, rates, p.c_b);
  return p;
}

std::string_view to_string(SweepVariable v) noexcept {
  return v == SweepVariable::IdleThreshold ? "c_e" : "c_b";
}

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::EnergyMean: return "e_exp";
    case Metric::EnergyVar: return "e_var";
    case Metric::Billing: return "b_exp";
  }
  return "unknown";
}

SweepVariable parse_sweep_variable(std::string_view name) {
  const std::string n = lower(name);
  if (n == "c_e" || n == "ce") return SweepVariable::IdleThreshold;
  if (n == "c_b" || n == "cb") return SweepVariable::Quota;
  throw DomainError("unknown sweep variable '" + std::string(name) + "' (expected c_e|c_b)");
}

Metric parse_metric(std::string_view name) {
  const std::string n = lower(name);
  if (n == "e_exp") return Metric::EnergyMean;
  if (n == "e_var") return Metric::EnergyVar;
  if (n == "b_exp") return Metric::Billing;
  throw DomainError("unknown metric '" + std::string(name) + "' (expected e_exp|e_var|b_exp)");
}

void SweepSpec::validate() const {
  if (grid.empty()) throw DomainError("sweep: grid is empty");
  if (n_devices == 0) throw DomainError("sweep: n_devices must be >= 1");
  const bool energy_metric = metric != Metric::Billing;
  if (energy_metric != (vary == SweepVariable::IdleThreshold)) {
    throw DomainError("sweep: metric " + std::string(to_string(metric)) + " does not vary with " +
                      std::string(to_string(vary)));
  }
  rates.validate();
}

double analytic_value(const SweepSpec& spec, double x) {
  if (!std::isfinite(x)) throw DomainError("sweep: grid value must be finite");
  if (spec.vary == SweepVariable::IdleThreshold) {
    if (x < 0.0) throw DomainError("sweep: c_e must be >= 0");
    const EnergyStats stats = energy_closed_form(spec.rates, x, spec.device);
    return spec.metric == Metric::EnergyMean ? stats.e_exp : stats.e_var;
  }
  const VolumeModel aggregate = aggregate_modeled(spec.device, spec.n_devices);
  return billing_stats(aggregate, spec.rates, x).b_exp;
}

std::vector<SweepPoint> sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepPoint> out;
  out.reserve(spec.grid.size());
  for (double x : spec.grid) {
    SweepPoint point{x, std::nullopt, {}};
    try {
      point.value = analytic_value(spec, x);
    } catch (const Error& e) {
      point.error = e.what();
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace costplan
