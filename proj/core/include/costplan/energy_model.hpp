#pragma once

#include "costplan/numerics.hpp"
#include "costplan/volume_models.hpp"

namespace costplan {

// Per device, per monitoring interval.
struct EnergyStats {
  double e_exp = 0.0;  // expected energy, J
  double e_var = 0.0;  // one-sided variability above the idle/active switch, J^2
};

struct EnergyConfig {
  RateCard rates;
  double c_e = 1.0;    // idle threshold as a multiple of the mean volume
  VolumeModel model;   // device-level volume law, mean r
};

// Expected energy and one-sided variability by quadrature over the model:
//   e_exp = r g_e + i_e * E[(c_e r - Psi)^+]
//   e_var = g_e^2 * E[((Psi - c_e r)^+)^2]
// Works for every family, including Fixed and Empirical.
EnergyStats energy_generic(const EnergyConfig& cfg, const Tolerance& tol = kQuadratureTolerance);

// Closed form for the model's family; Empirical falls back to energy_generic.
EnergyStats energy_closed_form(const RateCard& rates, double c_e, const VolumeModel& model);

// --- Uniform on [0, 2r] -----------------------------------------------------

// Valid for 0 <= c_e <= 2 (the endpoints are evaluable limits).
EnergyStats energy_uniform(const RateCard& rates, double c_e, double r);

// r that yields e_mean at threshold c_e. Requires 0 < c_e < 2 and e_mean > 0.
double solve_r_uniform(const RateCard& rates, double c_e, double e_mean);

// c_e that yields e_mean at volume r. Feasible only for
// g_e r < e_mean < (g_e + i_e) r; violations throw InfeasibleError with
// kind BelowFloor or AboveCeiling.
double solve_ce_uniform(const RateCard& rates, double r, double e_mean);

// E_var,U with r eliminated: 8 g_e^2 e_mean^2 (2 - c_e)^3 / (3 (4 g_e + i_e c_e^2)^2).
double evar_uniform_given_ce(const RateCard& rates, double e_mean, double c_e);

// E_var,U with c_e eliminated: (4/3) g_e^2 r^2 (1 - sqrt((e_mean - g_e r)/(i_e r)))^3.
// Same feasibility as solve_ce_uniform.
double evar_uniform_given_r(const RateCard& rates, double e_mean, double r);

// --- Pareto, scale (alpha-1)/alpha * r ----------------------------------------

// Threshold below which the device never idles: (alpha - 1) / alpha.
double pareto_idle_threshold(double alpha);

// Both branches: c_e >= (alpha-1)/alpha uses the idle closed form, smaller
// c_e the never-idle branch (e_exp = g_e r, e_var = g_e^2 E[(Psi - c_e r)^2]).
EnergyStats energy_pareto(const RateCard& rates, double c_e, double r, double alpha);

// Requires c_e >= (alpha-1)/alpha (DomainError otherwise).
double solve_r_pareto(const RateCard& rates, double c_e, double alpha, double e_mean);

// --- Fixed volume (alpha -> inf) ------------------------------------------------

EnergyStats energy_fixed(const RateCard& rates, double c_e, double r);

// r = e_mean / (g_e + i_e (c_e - 1)) for c_e >= 1; r = e_mean / g_e below.
double solve_r_fixed(const RateCard& rates, double c_e, double e_mean);

// --- Exponential, rate 1/r -------------------------------------------------------

EnergyStats energy_exponential(const RateCard& rates, double c_e, double r);

// r that yields e_mean at threshold c_e >= 0.
double solve_r_exponential(const RateCard& rates, double c_e, double e_mean);

struct ExponentialThreshold {
  double c_e = 0.0;
  double e_var = 0.0;  // J^2, the variability at that threshold
};

// Inverts the exponential E_exp for c_e via the principal Lambert W branch.
// Requires e_mean >= g_e r (InfeasibleError BelowFloor otherwise).
ExponentialThreshold solve_ce_exponential(const RateCard& rates, double r, double e_mean);

}  // namespace costplan
