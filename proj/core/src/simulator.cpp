#include "costplan/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>

#include "costplan/errors.hpp"
#include "costplan/numerics.hpp"
#include "costplan/rng.hpp"

namespace costplan {

namespace {

constexpr std::uint64_t kDeviceStream = 0;
constexpr std::uint64_t kAggregateStream = 1;

}  // namespace

void SimConfig::validate() const {
  rates.validate();
  if (n_devices == 0) throw DomainError("simulation: n_devices must be >= 1");
  if (n_intervals == 0) throw DomainError("simulation: n_intervals must be >= 1");
  if (!(c_e >= 0.0) || !std::isfinite(c_e)) throw DomainError("simulation: c_e must be finite and >= 0");
  if (!(c_b >= 0.0) || !std::isfinite(c_b)) throw DomainError("simulation: c_b must be finite and >= 0");
}

DeviceEnergy device_energy_kernel(double v, const RateCard& rates, double c_e, double r) {
  const double k = c_e * r;
  const double above = v > k ? v - k : 0.0;
  return {rates.g_e * v + rates.i_e * std::max(0.0, k - v), rates.g_e * rates.g_e * above * above};
}

double billing_kernel(double v_b, const RateCard& rates, double c_b) {
  return rates.g_b * v_b + rates.i_b * std::max(0.0, c_b - v_b) + rates.p_b * std::max(0.0, v_b - c_b);
}

SimResult run(const SimConfig& cfg) {
  cfg.validate();
  const double r = cfg.device_model.mean();
  const AggregateSampler uploads = aggregate(cfg.device_model, cfg.n_devices, cfg.aggregate_mode);
  Rng device_rng = Rng::substream(cfg.seed, kDeviceStream);
  Rng aggregate_rng = Rng::substream(cfg.seed, kAggregateStream);

  SimResult result;
  result.interval_count = cfg.n_intervals;
  std::vector<IntervalRecord> ring(cfg.trace_capacity);

  double energy_sum = 0.0;
  double var_sum = 0.0;
  double billing_sum = 0.0;
  for (std::size_t t = 0; t < cfg.n_intervals; ++t) {
    const double v = draw(cfg.device_model, device_rng);
    const double v_b = uploads.draw(aggregate_rng);
    const DeviceEnergy e = device_energy_kernel(v, cfg.rates, cfg.c_e, r);
    const double b = billing_kernel(v_b, cfg.rates, cfg.c_b);
    energy_sum += e.energy;
    var_sum += e.var_term;
    billing_sum += b;
    if (!ring.empty()) ring[t % ring.size()] = {t, v, v_b, e.energy, e.var_term, b};
  }

  const auto n = static_cast<double>(cfg.n_intervals);
  result.e_exp_hat = energy_sum / n;
  result.e_var_hat = var_sum / n;
  result.b_exp_hat = billing_sum / n;

  if (!ring.empty()) {
    const std::size_t kept = std::min(cfg.trace_capacity, cfg.n_intervals);
    const std::size_t start = cfg.n_intervals > ring.size() ? cfg.n_intervals % ring.size() : 0;
    result.trace.reserve(kept);
    for (std::size_t i = 0; i < kept; ++i) result.trace.push_back(ring[(start + i) % ring.size()]);
  }
  return result;
}

Validation validate_sweep(const SimConfig& cfg, SweepVariable vary, Metric metric, std::span<const double> grid,
                          unsigned threads) {
  cfg.validate();
  SweepSpec spec;
  spec.rates = cfg.rates;
  spec.device = cfg.device_model;
  spec.n_devices = cfg.n_devices;
  spec.c_e = cfg.c_e;
  spec.c_b = cfg.c_b;
  spec.vary = vary;
  spec.metric = metric;
  spec.grid.assign(grid.begin(), grid.end());
  spec.validate();

  const std::size_t points = grid.size();
  std::vector<double> analytic(points, std::nan(""));
  std::vector<double> empirical(points, std::nan(""));
  std::vector<std::string> errors(points);

  auto evaluate = [&](std::size_t i) {
    try {
      analytic[i] = analytic_value(spec, grid[i]);
      SimConfig point = cfg;
      point.seed = derive_seed(cfg.seed, i);
      point.trace_capacity = 0;
      if (vary == SweepVariable::IdleThreshold) {
        point.c_e = grid[i];
      } else {
        point.c_b = grid[i];
      }
      const SimResult res = run(point);
      empirical[i] = metric == Metric::EnergyMean ? res.e_exp_hat
                   : metric == Metric::EnergyVar  ? res.e_var_hat
                                                  : res.b_exp_hat;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, points));
  if (workers <= 1) {
    for (std::size_t i = 0; i < points; ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points; i = next++) evaluate(i);
      });
    }
  }

  Validation out;
  out.vary = vary;
  out.metric = metric;
  out.x.assign(grid.begin(), grid.end());
  out.analytic = std::move(analytic);
  out.empirical = std::move(empirical);
  out.errors = std::move(errors);

  std::vector<double> model_ok;
  std::vector<double> empirical_ok;
  for (std::size_t i = 0; i < points; ++i) {
    if (out.errors[i].empty()) {
      model_ok.push_back(out.analytic[i]);
      empirical_ok.push_back(out.empirical[i]);
    }
  }
  out.r2 = std::nan("");
  if (model_ok.size() >= 2) {
    try {
      out.r2 = r_squared(model_ok, empirical_ok);
    } catch (const DomainError&) {
      // Flat empirical curve: R^2 is undefined.
    }
  }
  return out;
}

}  // namespace costplan
