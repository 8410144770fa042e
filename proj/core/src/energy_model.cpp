#include "costplan/energy_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "costplan/errors.hpp"
#include "expectation.hpp"

namespace costplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) throw DomainError(std::string(what) + " must be finite and > 0");
}

void require_alpha(double alpha) {
  if (!(alpha > 2.0) || std::isnan(alpha)) throw DomainError("pareto: alpha must be > 2");
}

// log((alpha-1)^(alpha-1) / alpha^alpha), stable for very large alpha.
double log_pareto_constant(double alpha) {
  return (alpha - 1.0) * std::log1p(-1.0 / alpha) - std::log(alpha);
}

// Per-bit idle multiplier of the Pareto E_exp closed form:
// (alpha-1)^(alpha-1) c (alpha c)^(-alpha) + c - 1.
double pareto_idle_factor(double c_e, double alpha) {
  return std::exp(log_pareto_constant(alpha) + (1.0 - alpha) * std::log(c_e)) + c_e - 1.0;
}

}  // namespace

EnergyStats energy_generic(const EnergyConfig& cfg, const Tolerance& tol) {
  cfg.rates.validate();
  if (!(cfg.c_e >= 0.0) || !std::isfinite(cfg.c_e)) throw DomainError("energy: c_e must be finite and >= 0");
  const auto& m = cfg.model;
  const double r = m.mean();
  const double k = cfg.c_e * r;

  const double idle = detail::partial_expectation(m, [k](double x) { return k - x; }, 0.0, k, tol);
  const double upper = detail::partial_expectation(
      m, [k](double x) { return (x - k) * (x - k); }, k, kInf, tol);
  return {r * cfg.rates.g_e + cfg.rates.i_e * idle, cfg.rates.g_e * cfg.rates.g_e * upper};
}

EnergyStats energy_closed_form(const RateCard& rates, double c_e, const VolumeModel& model) {
  switch (model.family()) {
    case Family::Uniform:
      if (c_e >= 0.0 && c_e <= 2.0) return energy_uniform(rates, c_e, model.mean());
      break;
    case Family::Pareto:
      return energy_pareto(rates, c_e, model.mean(), model.alpha());
    case Family::Exponential:
      return energy_exponential(rates, c_e, model.mean());
    case Family::Fixed:
      return energy_fixed(rates, c_e, model.mean());
    case Family::Empirical:
      break;
  }
  return energy_generic({rates, c_e, model});
}

EnergyStats energy_uniform(const RateCard& rates, double c_e, double r) {
  rates.validate();
  require_positive(r, "r");
  if (!(c_e >= 0.0 && c_e <= 2.0)) throw DomainError("uniform energy: c_e must lie in [0, 2]");
  const double g = rates.g_e;
  const double slack = 2.0 - c_e;
  return {(g + rates.i_e * c_e * c_e / 4.0) * r, g * g * slack * slack * slack * r * r / 6.0};
}

double solve_r_uniform(const RateCard& rates, double c_e, double e_mean) {
  rates.validate();
  require_positive(e_mean, "e_mean");
  if (!(c_e > 0.0 && c_e < 2.0)) throw DomainError("solve_r_uniform: c_e must lie in (0, 2)");
  return 4.0 * e_mean / (4.0 * rates.g_e + rates.i_e * c_e * c_e);
}

double solve_ce_uniform(const RateCard& rates, double r, double e_mean) {
  rates.validate();
  require_positive(r, "r");
  const double floor = rates.g_e * r;
  const double ceiling = (rates.g_e + rates.i_e) * r;
  if (!(e_mean > floor)) {
    throw InfeasibleError(Infeasibility::BelowFloor,
                          "uniform: e_mean " + std::to_string(e_mean) + " J is not above the active floor g_e*r = " +
                              std::to_string(floor) + " J",
                          floor, ceiling);
  }
  if (!(e_mean < ceiling)) {
    throw InfeasibleError(Infeasibility::AboveCeiling,
                          "uniform: e_mean " + std::to_string(e_mean) + " J is not below (g_e+i_e)*r = " +
                              std::to_string(ceiling) + " J",
                          floor, ceiling);
  }
  return 2.0 * std::sqrt((e_mean - floor) / (rates.i_e * r));
}

double evar_uniform_given_ce(const RateCard& rates, double e_mean, double c_e) {
  rates.validate();
  require_positive(e_mean, "e_mean");
  if (!(c_e >= 0.0 && c_e <= 2.0)) throw DomainError("uniform E_var: c_e must lie in [0, 2]");
  const double g = rates.g_e;
  const double slack = 2.0 - c_e;
  const double denom = 4.0 * g + rates.i_e * c_e * c_e;
  return 8.0 * g * g * e_mean * e_mean * slack * slack * slack / (3.0 * denom * denom);
}

double evar_uniform_given_r(const RateCard& rates, double e_mean, double r) {
  rates.validate();
  require_positive(e_mean, "e_mean");
  require_positive(r, "r");
  const double floor = rates.g_e * r;
  const double ceiling = (rates.g_e + rates.i_e) * r;
  if (e_mean < floor) {
    throw InfeasibleError(Infeasibility::BelowFloor, "uniform: e_mean below the active floor g_e*r", floor, ceiling);
  }
  if (e_mean > ceiling) {
    throw InfeasibleError(Infeasibility::AboveCeiling, "uniform: e_mean above (g_e+i_e)*r", floor, ceiling);
  }
  const double half_ce = std::sqrt((e_mean - floor) / (rates.i_e * r));
  const double slack = 1.0 - half_ce;
  return 4.0 / 3.0 * rates.g_e * rates.g_e * r * r * slack * slack * slack;
}

double pareto_idle_threshold(double alpha) {
  require_alpha(alpha);
  return (alpha - 1.0) / alpha;
}

EnergyStats energy_pareto(const RateCard& rates, double c_e, double r, double alpha) {
  rates.validate();
  require_positive(r, "r");
  require_alpha(alpha);
  require_positive(c_e, "c_e");
  const double g = rates.g_e;

  if (c_e < pareto_idle_threshold(alpha)) {
    // Threshold below the scale: never idle, and Eq. 3 covers the whole support.
    const double offset = 1.0 - c_e;
    return {g * r, g * g * r * r * (1.0 / (alpha * (alpha - 2.0)) + offset * offset)};
  }
  const double e_exp = (g + rates.i_e * pareto_idle_factor(c_e, alpha)) * r;
  const double e_var = 2.0 * g * g * r * r *
                       std::exp(log_pareto_constant(alpha) + (2.0 - alpha) * std::log(c_e)) / (alpha - 2.0);
  return {e_exp, e_var};
}

double solve_r_pareto(const RateCard& rates, double c_e, double alpha, double e_mean) {
  rates.validate();
  require_alpha(alpha);
  require_positive(e_mean, "e_mean");
  if (!(c_e >= pareto_idle_threshold(alpha))) {
    throw DomainError("solve_r_pareto: c_e " + std::to_string(c_e) + " below (alpha-1)/alpha = " +
                      std::to_string(pareto_idle_threshold(alpha)) + "; the never-idle branch is not invertible");
  }
  const double per_bit = rates.g_e + rates.i_e * pareto_idle_factor(c_e, alpha);
  if (!(per_bit > 0.0)) throw DomainError("solve_r_pareto: non-positive energy per bit");
  return e_mean / per_bit;
}

EnergyStats energy_fixed(const RateCard& rates, double c_e, double r) {
  rates.validate();
  require_positive(r, "r");
  if (!(c_e >= 0.0) || !std::isfinite(c_e)) throw DomainError("fixed energy: c_e must be finite and >= 0");
  const double g = rates.g_e;
  const double idle = std::max(0.0, c_e - 1.0);
  const double above = std::max(0.0, 1.0 - c_e);
  return {(g + rates.i_e * idle) * r, g * g * above * above * r * r};
}

double solve_r_fixed(const RateCard& rates, double c_e, double e_mean) {
  rates.validate();
  require_positive(e_mean, "e_mean");
  if (!(c_e >= 0.0) || !std::isfinite(c_e)) throw DomainError("solve_r_fixed: c_e must be finite and >= 0");
  return e_mean / (rates.g_e + rates.i_e * std::max(0.0, c_e - 1.0));
}

EnergyStats energy_exponential(const RateCard& rates, double c_e, double r) {
  rates.validate();
  require_positive(r, "r");
  if (!(c_e >= 0.0) || std::isnan(c_e)) throw DomainError("exponential energy: c_e must be >= 0");
  const double g = rates.g_e;
  // c + e^-c - 1 via expm1 keeps precision for small c.
  const double idle = c_e + std::expm1(-c_e);
  return {(g + rates.i_e * idle) * r, 2.0 * g * g * std::exp(-c_e) * r * r};
}

double solve_r_exponential(const RateCard& rates, double c_e, double e_mean) {
  rates.validate();
  require_positive(e_mean, "e_mean");
  if (!(c_e >= 0.0) || !std::isfinite(c_e)) throw DomainError("solve_r_exponential: c_e must be finite and >= 0");
  return e_mean / (rates.g_e + rates.i_e * (c_e + std::expm1(-c_e)));
}

ExponentialThreshold solve_ce_exponential(const RateCard& rates, double r, double e_mean) {
  rates.validate();
  require_positive(r, "r");
  const double floor = rates.g_e * r;
  if (!(e_mean >= floor)) {
    throw InfeasibleError(Infeasibility::BelowFloor,
                          "exponential: e_mean " + std::to_string(e_mean) +
                              " J is below the active floor g_e*r = " + std::to_string(floor) + " J",
                          floor, kInf);
  }
  const double g = rates.g_e;
  // At the floor the argument is exactly the branch point, W0 = -1 and c_e = 0.
  if (e_mean == floor) return {0.0, 2.0 * g * g * r * r};
  const double shift = 1.0 + (e_mean - floor) / (rates.i_e * r);
  const double w = lambert_w0(-std::exp(-shift));
  return {w + shift, -2.0 * g * g * r * r * w};
}

}  // namespace costplan
