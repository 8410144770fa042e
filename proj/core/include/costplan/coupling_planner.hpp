#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "costplan/billing_model.hpp"
#include "costplan/energy_model.hpp"
#include "costplan/volume_models.hpp"

namespace costplan {

struct PlanTargets {
  double e_mean = 0.0;   // J per device per interval
  double e_updev = 0.0;  // J; the variability target is e_updev^2
  double b_mean = 0.0;   // $ per interval
  Family family = Family::Uniform;
  std::optional<double> alpha;  // Pareto shape, used for both device and aggregate laws

  // Throws DomainError on non-positive e_mean/b_mean, negative e_updev,
  // Empirical family, or a missing/invalid Pareto alpha.
  void validate() const;
};

struct EnergySolution {
  double r = 0.0;
  double c_e = 0.0;
};

struct CouplingPlan {
  double r = 0.0;    // per-device mean volume, bits
  double c_e = 0.0;  // idle threshold
  double c_b = 0.0;  // optimal quota at r*n, bits
  DeviceCount devices;
  EnergyStats energy;    // forward evaluation at (r, c_e)
  BillingStats billing;  // forward evaluation at (r*n, c_b)
  // Every (r, c_e) pair meeting both energy targets, ascending in c_e; the
  // plan uses the first.
  std::vector<EnergySolution> energy_solutions;
};

// All (r, c_e) pairs with E_exp = e_mean and E_var = e_updev^2, ascending
// c_e. Throws InfeasibleError(Unattainable) carrying the attainable E_var
// range (J^2) along the e_mean-consistent curve when there are none.
std::vector<EnergySolution> solve_energy_targets(const RateCard& rates, const PlanTargets& targets);

// Energy first, then billing: (r, c_e) from the energy targets, n from the
// billing budget at that r, c_b optimal at r*n.
CouplingPlan plan(const RateCard& rates, const PlanTargets& targets);

enum class SweepVariable { IdleThreshold, Quota };  // c_e, c_b
enum class Metric { EnergyMean, EnergyVar, Billing };  // e_exp, e_var, b_exp

std::string_view to_string(SweepVariable v) noexcept;
std::string_view to_string(Metric m) noexcept;
SweepVariable parse_sweep_variable(std::string_view name);
Metric parse_metric(std::string_view name);

struct SweepSpec {
  RateCard rates;
  VolumeModel device = VolumeModel::uniform(1.0);
  std::size_t n_devices = 1;
  double c_e = 1.0;  // held fixed when sweeping c_b
  double c_b = 0.0;  // held fixed when sweeping c_e
  SweepVariable vary = SweepVariable::IdleThreshold;
  Metric metric = Metric::EnergyMean;
  std::vector<double> grid;

  // Throws DomainError on an empty grid or a metric that does not depend on
  // the swept variable (energy metrics need c_e, billing needs c_b).
  void validate() const;
};

struct SweepPoint {
  double x = 0.0;
  std::optional<double> value;
  std::string error;  // set when this grid point is outside the model's domain
};

// Analytic value of spec.metric at one grid value.
double analytic_value(const SweepSpec& spec, double x);

// Analytic curve over the grid, in grid order. Out-of-domain points are
// reported per point rather than aborting the sweep.
std::vector<SweepPoint> sweep(const SweepSpec& spec);

}  // namespace costplan
