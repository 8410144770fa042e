#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "costplan/rng.hpp"

namespace costplan {

enum class Family { Uniform, Pareto, Exponential, Fixed, Empirical };

std::string_view to_string(Family family) noexcept;
// Case-insensitive; throws DomainError on an unknown name.
Family parse_family(std::string_view name);

// Linear cost rates. Energy rates are J/b, billing rates are $/b.
struct RateCard {
  double g_e = 0.0;  // active energy per produced bit
  double i_e = 0.0;  // idle energy per bit of shortfall below c_e * r
  double g_b = 0.0;  // transfer/storage billing per uploaded bit
  double i_b = 0.0;  // idle billing per bit of unused quota
  double p_b = 0.0;  // active billing per bit above quota

  // Throws DomainError unless all five rates are finite and > 0.
  void validate() const;

  // Rates measured on the BeagleBone + AWS testbed.
  static RateCard reference() noexcept { return {1.78e-6, 6.10e-7, 2.09e-10, 6.27e-11, 6.27e-10}; }
};

// Bin edges plus per-bin probability mass (sums to 1).
struct Histogram {
  std::vector<double> edges;
  std::vector<double> probability;

  std::size_t bins() const noexcept { return probability.size(); }
};

// Freedman-Diaconis binning, falling back to Sturges when the IQR is zero.
// Throws DomainError on an empty sample.
Histogram make_histogram(std::span<const double> samples);

// Marginal distribution of the per-interval query volume in bits. Every
// parametric family is parameterized by its mean r:
//   Uniform      support [0, 2r]
//   Pareto       scale v = (alpha-1)/alpha * r, support [v, inf), alpha > 2
//   Exponential  rate 1/r
//   Fixed        point mass at r (the alpha -> inf Pareto limit)
//   Empirical    the sample itself; r is the sample mean
// Immutable after construction.
class VolumeModel {
 public:
  static VolumeModel uniform(double mean);
  static VolumeModel pareto(double mean, double alpha);
  static VolumeModel exponential(double mean);
  static VolumeModel fixed(double mean);
  static VolumeModel empirical(std::vector<double> samples);

  Family family() const noexcept { return family_; }
  double mean() const noexcept { return mean_; }
  // Pareto shape; throws DomainError for other families.
  double alpha() const;
  // Pareto scale v; throws DomainError for other families.
  double scale() const;
  // Empirical sample in ascending order (empty for parametric families).
  std::span<const double> samples() const noexcept;

  double support_lo() const noexcept;
  // +infinity for Pareto and Exponential.
  double support_hi() const noexcept;
  // The (1 - 1e-9) quantile, a finite stand-in for support_hi() when a
  // plotting range or grid needs an upper end.
  double effective_support_hi() const;

  bool is_continuous() const noexcept { return family_ != Family::Fixed && family_ != Family::Empirical; }

  // Same family with the mean changed to new_mean (Empirical samples are scaled).
  VolumeModel with_mean(double new_mean) const;

 private:
  struct EmpiricalData;

  VolumeModel(Family family, double mean, double alpha, std::shared_ptr<const EmpiricalData> data)
      : family_(family), mean_(mean), alpha_(alpha), data_(std::move(data)) {}

  friend double draw(const VolumeModel& m, Rng& rng);

  Family family_;
  double mean_;
  double alpha_;
  std::shared_ptr<const EmpiricalData> data_;
};

// Density in 1/bit. Throws DomainError for Fixed and Empirical.
double pdf(const VolumeModel& m, double x);
double cdf(const VolumeModel& m, double x);
// Smallest x with cdf(x) >= u. Throws DomainError for u outside [0, 1].
double inverse_cdf(const VolumeModel& m, double u);
double variance(const VolumeModel& m);

// One draw from the model's law: inverse transform for parametric families,
// rejection sampling against a flat envelope over the histogram for Empirical.
double draw(const VolumeModel& m, Rng& rng);

// count draws from a stream seeded with `seed`.
std::vector<double> sample(const VolumeModel& m, std::size_t count, std::uint64_t seed);

enum class AggregateMode {
  Modeled,  // same family with mean n*r
  Summed,   // exact n-fold sum of independent device volumes
};

std::string_view to_string(AggregateMode mode) noexcept;
AggregateMode parse_aggregate_mode(std::string_view name);

// Same family as the device model with mean n*r.
VolumeModel aggregate_modeled(const VolumeModel& device, std::size_t n);

// Draws the volume uploaded by an aggregator of n devices per interval.
class AggregateSampler {
 public:
  AggregateSampler(VolumeModel device, std::size_t n, AggregateMode mode);

  double draw(Rng& rng) const;
  double mean() const noexcept { return device_.mean() * static_cast<double>(n_); }
  std::size_t devices() const noexcept { return n_; }
  AggregateMode mode() const noexcept { return mode_; }
  const VolumeModel& device() const noexcept { return device_; }
  // The analytic aggregate law; present only in Modeled mode.
  const std::optional<VolumeModel>& modeled() const noexcept { return modeled_; }

 private:
  VolumeModel device_;
  std::size_t n_;
  AggregateMode mode_;
  std::optional<VolumeModel> modeled_;
};

AggregateSampler aggregate(const VolumeModel& device, std::size_t n, AggregateMode mode);

}  // namespace costplan
