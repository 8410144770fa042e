#pragma once

#include <optional>
#include <vector>

#include "costplan/numerics.hpp"
#include "costplan/volume_models.hpp"

namespace costplan {

// Per aggregator, per monitoring interval.
struct BillingStats {
  double b_exp = 0.0;    // expected billing at the evaluated quota, $
  double c_b_opt = 0.0;  // quota minimizing b_exp, bits
  double b_min = 0.0;    // b_exp at c_b_opt, $
};

// Expected billing by quadrature, transfer + idle slack + active overage:
//   g_b E[Psi] + i_b E[(c_b - Psi)^+] + p_b E[(Psi - c_b)^+]
double billing_generic(const VolumeModel& aggregate, const RateCard& rates, double c_b,
                       const Tolerance& tol = kQuadratureTolerance);

// The same quantity after adding and subtracting p_b E[(Psi - c_b); Psi < c_b]:
//   (g_b + p_b) E[Psi] - p_b c_b + (i_b + p_b) E[(c_b - Psi)^+]
// Only the finite lower partial moment is integrated.
double billing_generic_rearranged(const VolumeModel& aggregate, const RateCard& rates, double c_b,
                                  const Tolerance& tol = kQuadratureTolerance);

// p_b / (i_b + p_b).
double critical_fractile(const RateCard& rates);

// Quantile of the aggregate law at the critical fractile. Fixed models
// return their mean; Empirical returns the matching order statistic.
double optimal_cb_general(const VolumeModel& aggregate, const RateCard& rates);

// Closed forms, rn = mean aggregate volume in bits.
BillingStats billing_uniform(const RateCard& rates, double rn, double c_b);               // 0 <= c_b <= 2 rn
BillingStats billing_pareto(const RateCard& rates, double rn, double alpha, double c_b);  // c_b >= v_b
BillingStats billing_exponential(const RateCard& rates, double rn, double c_b);           // c_b >= 0
BillingStats billing_fixed(const RateCard& rates, double rn, double c_b);                 // c_b >= 0

// Closed form where the family's formula covers c_b, quadrature otherwise
// (Uniform above 2 rn, Pareto below the scale, Empirical everywhere).
BillingStats billing_stats(const VolumeModel& aggregate, const RateCard& rates, double c_b);

// The comparator quota c_b = rn: provision exactly for the mean aggregate volume.
inline double adhoc_quota(double rn) noexcept { return rn; }

// Minimum billing per aggregate bit, b_min / rn, for a parametric family.
// Pareto needs alpha; Empirical throws DomainError.
double min_billing_per_bit(const RateCard& rates, Family family, std::optional<double> alpha = std::nullopt);

struct DeviceCandidate {
  long count = 0;
  double b_min = 0.0;    // minimum billing with `count` devices, $
  double c_b_opt = 0.0;  // its optimal quota, bits
};

struct DeviceCount {
  double n = 0.0;  // real-valued device count meeting b_mean exactly
  std::vector<DeviceCandidate> candidates;  // floor and ceil of n, each >= 1
};

// Number of devices whose optimized billing equals b_mean at per-device volume r.
DeviceCount devices_for_budget(const RateCard& rates, Family family, std::optional<double> alpha, double r,
                               double b_mean);

}  // namespace costplan
