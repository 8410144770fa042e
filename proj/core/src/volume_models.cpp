#include "costplan/volume_models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "costplan/errors.hpp"

namespace costplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEffectiveSupportQuantile = 1.0 - 1e-9;
constexpr std::size_t kMaxHistogramBins = 10000;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void require_mean(double mean, const char* who) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw DomainError(std::string(who) + ": mean volume must be finite and > 0");
  }
}

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

struct VolumeModel::EmpiricalData {
  std::vector<double> sorted;
  Histogram histogram;
  double max_probability = 0.0;
};

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::Uniform: return "uniform";
    case Family::Pareto: return "pareto";
    case Family::Exponential: return "exponential";
    case Family::Fixed: return "fixed";
    case Family::Empirical: return "empirical";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  const std::string n = lower(name);
  if (n == "uniform") return Family::Uniform;
  if (n == "pareto") return Family::Pareto;
  if (n == "exponential") return Family::Exponential;
  if (n == "fixed") return Family::Fixed;
  if (n == "empirical") return Family::Empirical;
  throw DomainError("unknown distribution family '" + std::string(name) + "'");
}

void RateCard::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"g_e", g_e}, {"i_e", i_e}, {"g_b", g_b}, {"i_b", i_b}, {"p_b", p_b}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw DomainError(std::string("rate ") + name + " must be finite and > 0");
    }
  }
}

Histogram make_histogram(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("histogram: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const auto n = static_cast<double>(sorted.size());

  Histogram h;
  if (hi == lo) {
    h.edges = {lo, hi};
    h.probability = {1.0};
    return h;
  }

  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  std::size_t bins = 0;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(n);
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  } else {
    bins = static_cast<std::size_t>(std::ceil(std::log2(n))) + 1;
  }
  bins = std::clamp<std::size_t>(bins, 1, kMaxHistogramBins);

  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;

  std::vector<std::size_t> counts(bins, 0);
  for (double x : sorted) {
    auto idx = static_cast<std::size_t>((x - lo) / width);
    counts[std::min(idx, bins - 1)]++;
  }
  h.probability.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) h.probability[i] = static_cast<double>(counts[i]) / n;
  return h;
}

VolumeModel VolumeModel::uniform(double mean) {
  require_mean(mean, "uniform");
  return VolumeModel(Family::Uniform, mean, 0.0, nullptr);
}

VolumeModel VolumeModel::pareto(double mean, double alpha) {
  require_mean(mean, "pareto");
  if (!(alpha > 2.0) || std::isnan(alpha)) {
    throw DomainError("pareto: shape alpha must be > 2 for a finite one-sided variability");
  }
  return VolumeModel(Family::Pareto, mean, alpha, nullptr);
}

VolumeModel VolumeModel::exponential(double mean) {
  require_mean(mean, "exponential");
  return VolumeModel(Family::Exponential, mean, 0.0, nullptr);
}

VolumeModel VolumeModel::fixed(double mean) {
  require_mean(mean, "fixed");
  return VolumeModel(Family::Fixed, mean, 0.0, nullptr);
}

VolumeModel VolumeModel::empirical(std::vector<double> samples) {
  if (samples.empty()) throw DomainError("empirical: empty sample");
  for (double x : samples) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("empirical: volumes must be finite and >= 0");
  }
  std::sort(samples.begin(), samples.end());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  require_mean(mean, "empirical");

  auto data = std::make_shared<EmpiricalData>();
  data->histogram = make_histogram(samples);
  data->max_probability = *std::max_element(data->histogram.probability.begin(), data->histogram.probability.end());
  data->sorted = std::move(samples);
  return VolumeModel(Family::Empirical, mean, 0.0, std::move(data));
}

double VolumeModel::alpha() const {
  if (family_ != Family::Pareto) throw DomainError("alpha is defined only for the Pareto family");
  return alpha_;
}

double VolumeModel::scale() const {
  if (family_ != Family::Pareto) throw DomainError("scale is defined only for the Pareto family");
  return (alpha_ - 1.0) / alpha_ * mean_;
}

std::span<const double> VolumeModel::samples() const noexcept {
  if (!data_) return {};
  return data_->sorted;
}

double VolumeModel::support_lo() const noexcept {
  switch (family_) {
    case Family::Pareto: return (alpha_ - 1.0) / alpha_ * mean_;
    case Family::Fixed: return mean_;
    case Family::Empirical: return data_->sorted.front();
    default: return 0.0;
  }
}

double VolumeModel::support_hi() const noexcept {
  switch (family_) {
    case Family::Uniform: return 2.0 * mean_;
    case Family::Fixed: return mean_;
    case Family::Empirical: return data_->sorted.back();
    default: return kInf;
  }
}

double VolumeModel::effective_support_hi() const {
  if (std::isfinite(support_hi())) return support_hi();
  return inverse_cdf(*this, kEffectiveSupportQuantile);
}

VolumeModel VolumeModel::with_mean(double new_mean) const {
  require_mean(new_mean, "with_mean");
  if (family_ == Family::Empirical) {
    const double factor = new_mean / mean_;
    std::vector<double> scaled(data_->sorted);
    for (double& x : scaled) x *= factor;
    return empirical(std::move(scaled));
  }
  return VolumeModel(family_, new_mean, alpha_, nullptr);
}

double pdf(const VolumeModel& m, double x) {
  const double r = m.mean();
  switch (m.family()) {
    case Family::Uniform:
      return (x >= 0.0 && x <= 2.0 * r) ? 1.0 / (2.0 * r) : 0.0;
    case Family::Exponential:
      return x >= 0.0 ? std::exp(-x / r) / r : 0.0;
    case Family::Pareto: {
      const double a = m.alpha();
      const double v = m.scale();
      if (x < v) return 0.0;
      // a v^a / x^(a+1), evaluated in ratio form to avoid overflow of v^a.
      return a / x * std::pow(v / x, a);
    }
    case Family::Fixed:
    case Family::Empirical:
      break;
  }
  throw DomainError(std::string("pdf: unsupported family ") + std::string(to_string(m.family())));
}

double cdf(const VolumeModel& m, double x) {
  const double r = m.mean();
  switch (m.family()) {
    case Family::Uniform:
      return std::clamp(x / (2.0 * r), 0.0, 1.0);
    case Family::Exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-x / r);
    case Family::Pareto: {
      const double v = m.scale();
      return x <= v ? 0.0 : 1.0 - std::pow(v / x, m.alpha());
    }
    case Family::Fixed:
      return x < r ? 0.0 : 1.0;
    case Family::Empirical: {
      const auto s = m.samples();
      const auto count = std::upper_bound(s.begin(), s.end(), x) - s.begin();
      return static_cast<double>(count) / static_cast<double>(s.size());
    }
  }
  return 0.0;
}

double inverse_cdf(const VolumeModel& m, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("inverse_cdf: probability must lie in [0, 1]");
  const double r = m.mean();
  switch (m.family()) {
    case Family::Uniform:
      return 2.0 * r * u;
    case Family::Exponential:
      return u == 1.0 ? kInf : -r * std::log1p(-u);
    case Family::Pareto:
      return u == 1.0 ? kInf : m.scale() * std::pow(1.0 - u, -1.0 / m.alpha());
    case Family::Fixed:
      return r;
    case Family::Empirical: {
      const auto s = m.samples();
      const double pos = std::ceil(u * static_cast<double>(s.size()));
      const auto idx = pos < 1.0 ? std::size_t{0} : static_cast<std::size_t>(pos) - 1;
      return s[std::min(idx, s.size() - 1)];
    }
  }
  return r;
}

double variance(const VolumeModel& m) {
  const double r = m.mean();
  switch (m.family()) {
    case Family::Uniform: return r * r / 3.0;
    case Family::Exponential: return r * r;
    case Family::Pareto: return r * r / (m.alpha() * (m.alpha() - 2.0));
    case Family::Fixed: return 0.0;
    case Family::Empirical: {
      double ss = 0.0;
      for (double x : m.samples()) ss += (x - r) * (x - r);
      return ss / static_cast<double>(m.samples().size());
    }
  }
  return 0.0;
}

double draw(const VolumeModel& m, Rng& rng) {
  if (m.family() == Family::Fixed) return m.mean();
  if (m.family() != Family::Empirical) return inverse_cdf(m, rng.uniform());

  const auto& data = *m.data_;
  const auto& h = data.histogram;
  const std::size_t bins = h.bins();
  for (;;) {
    const auto bin = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(bins)), bins - 1);
    if (rng.uniform() * data.max_probability < h.probability[bin]) {
      return h.edges[bin] + rng.uniform() * (h.edges[bin + 1] - h.edges[bin]);
    }
  }
}

std::vector<double> sample(const VolumeModel& m, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(count);
  for (double& x : out) x = draw(m, rng);
  return out;
}

std::string_view to_string(AggregateMode mode) noexcept {
  return mode == AggregateMode::Modeled ? "modeled" : "summed";
}

AggregateMode parse_aggregate_mode(std::string_view name) {
  const std::string n = lower(name);
  if (n == "modeled") return AggregateMode::Modeled;
  if (n == "summed") return AggregateMode::Summed;
  throw DomainError("unknown aggregate mode '" + std::string(name) + "' (expected modeled|summed)");
}

VolumeModel aggregate_modeled(const VolumeModel& device, std::size_t n) {
  if (n == 0) throw DomainError("aggregate: device count must be >= 1");
  return device.with_mean(device.mean() * static_cast<double>(n));
}

AggregateSampler::AggregateSampler(VolumeModel device, std::size_t n, AggregateMode mode)
    : device_(std::move(device)), n_(n), mode_(mode) {
  if (n_ == 0) throw DomainError("aggregate: device count must be >= 1");
  if (mode_ == AggregateMode::Modeled) modeled_ = aggregate_modeled(device_, n_);
}

double AggregateSampler::draw(Rng& rng) const {
  if (modeled_) return costplan::draw(*modeled_, rng);
  double total = 0.0;
  for (std::size_t i = 0; i < n_; ++i) total += costplan::draw(device_, rng);
  return total;
}

AggregateSampler aggregate(const VolumeModel& device, std::size_t n, AggregateMode mode) {
  return AggregateSampler(device, n, mode);
}

}  // namespace costplan
