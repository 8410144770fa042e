#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "costplan/coupling_planner.hpp"
#include "costplan/volume_models.hpp"

namespace costplan {

inline constexpr std::uint64_t kDefaultSeed = 20170612;
inline constexpr std::size_t kDefaultIntervals = 100000;

struct SimConfig {
  VolumeModel device_model = VolumeModel::uniform(1.0);
  std::size_t n_devices = 1;
  AggregateMode aggregate_mode = AggregateMode::Modeled;
  RateCard rates;
  double c_e = 1.0;
  double c_b = 0.0;
  std::size_t n_intervals = kDefaultIntervals;
  std::uint64_t seed = kDefaultSeed;
  // Keep the last trace_capacity intervals in SimResult::trace (0 = no trace).
  std::size_t trace_capacity = 0;

  void validate() const;
};

struct IntervalRecord {
  std::size_t interval = 0;
  double device_volume = 0.0;     // bits
  double aggregate_volume = 0.0;  // bits
  double energy = 0.0;            // J
  double var_term = 0.0;          // J^2
  double billing = 0.0;           // $
};

struct SimResult {
  double e_exp_hat = 0.0;  // J
  double e_var_hat = 0.0;  // J^2
  double b_exp_hat = 0.0;  // $
  std::size_t interval_count = 0;
  std::vector<IntervalRecord> trace;  // oldest first, at most trace_capacity entries
};

struct DeviceEnergy {
  double energy = 0.0;    // g_e v + i_e (c_e r - v)^+
  double var_term = 0.0;  // g_e^2 ((v - c_e r)^+)^2
};

// Energy spent by one device producing v bits in an interval. The threshold
// uses the configured mean r, not a sample mean.
DeviceEnergy device_energy_kernel(double v, const RateCard& rates, double c_e, double r);

// g_b v_b + i_b (c_b - v_b)^+ + p_b (v_b - c_b)^+
double billing_kernel(double v_b, const RateCard& rates, double c_b);

// Draws n_intervals device and aggregate volumes from independent substreams
// of cfg.seed and averages the kernels. Bit-identical for identical configs.
SimResult run(const SimConfig& cfg);

struct Validation {
  SweepVariable vary = SweepVariable::IdleThreshold;
  Metric metric = Metric::EnergyMean;
  std::vector<double> x;
  std::vector<double> analytic;
  std::vector<double> empirical;
  std::vector<std::string> errors;  // per grid point; empty string when the point evaluated
  double r2 = 0.0;                  // over the points that evaluated
};

// For every grid value: the analytic metric and a Monte Carlo estimate whose
// seed is derive_seed(cfg.seed, point index). Points are spread over
// `threads` workers (0 = hardware concurrency); the result does not depend
// on the thread count.
Validation validate_sweep(const SimConfig& cfg, SweepVariable vary, Metric metric, std::span<const double> grid,
                          unsigned threads = 0);

}  // namespace costplan
