#include "costplan/billing_model.hpp"

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

void require_quota(double c_b) {
  if (!(c_b >= 0.0) || !std::isfinite(c_b)) throw DomainError("quota c_b must be finite and >= 0");
}

}  // namespace

double billing_generic(const VolumeModel& aggregate, const RateCard& rates, double c_b, const Tolerance& tol) {
  rates.validate();
  require_quota(c_b);
  const double idle = detail::partial_expectation(aggregate, [c_b](double x) { return c_b - x; }, 0.0, c_b, tol);
  const double active = detail::partial_expectation(aggregate, [c_b](double x) { return x - c_b; }, c_b, kInf, tol);
  return aggregate.mean() * rates.g_b + rates.i_b * idle + rates.p_b * active;
}

double billing_generic_rearranged(const VolumeModel& aggregate, const RateCard& rates, double c_b,
                                  const Tolerance& tol) {
  rates.validate();
  require_quota(c_b);
  const double idle = detail::partial_expectation(aggregate, [c_b](double x) { return c_b - x; }, 0.0, c_b, tol);
  return aggregate.mean() * (rates.g_b + rates.p_b) - rates.p_b * c_b + (rates.i_b + rates.p_b) * idle;
}

double critical_fractile(const RateCard& rates) {
  rates.validate();
  return rates.p_b / (rates.i_b + rates.p_b);
}

double optimal_cb_general(const VolumeModel& aggregate, const RateCard& rates) {
  const double fractile = critical_fractile(rates);
  if (aggregate.family() == Family::Fixed) return aggregate.mean();
  return inverse_cdf(aggregate, fractile);
}

BillingStats billing_uniform(const RateCard& rates, double rn, double c_b) {
  rates.validate();
  require_positive(rn, "rn");
  if (!(c_b >= 0.0 && c_b <= 2.0 * rn)) throw DomainError("uniform billing: c_b must lie in [0, 2 rn]");
  const double ip = rates.i_b + rates.p_b;
  const double b_exp = (rates.g_b + rates.p_b) * rn - rates.p_b * c_b + ip * c_b * c_b / (4.0 * rn);
  return {b_exp, 2.0 * rates.p_b * rn / ip, (rates.g_b + rates.p_b - rates.p_b * rates.p_b / ip) * rn};
}

BillingStats billing_pareto(const RateCard& rates, double rn, double alpha, double c_b) {
  rates.validate();
  require_positive(rn, "rn");
  if (!(alpha > 2.0) || std::isnan(alpha)) throw DomainError("pareto billing: alpha must be > 2");
  const double scale = (alpha - 1.0) / alpha * rn;
  if (!(c_b >= scale) || !std::isfinite(c_b)) {
    throw DomainError("pareto billing: closed form needs c_b >= scale v_b = " + std::to_string(scale));
  }
  const double ip = rates.i_b + rates.p_b;
  // (alpha-1)^(alpha-1)/alpha^alpha * rn^alpha * c_b^(1-alpha), in logs.
  const double log_term = (alpha - 1.0) * std::log1p(-1.0 / alpha) - std::log(alpha) + alpha * std::log(rn) +
                          (1.0 - alpha) * std::log(c_b);
  const double b_exp = (rates.g_b - rates.i_b) * rn + ip * std::exp(log_term) + rates.i_b * c_b;
  const double ratio_root = std::pow(ip / rates.i_b, 1.0 / alpha);
  return {b_exp, ratio_root * scale, (rates.g_b - rates.i_b + rates.i_b * ratio_root) * rn};
}

BillingStats billing_exponential(const RateCard& rates, double rn, double c_b) {
  rates.validate();
  require_positive(rn, "rn");
  require_quota(c_b);
  const double ip = rates.i_b + rates.p_b;
  const double log_ratio = std::log(ip / rates.i_b);
  const double b_exp = (rates.g_b - rates.i_b) * rn + rates.i_b * c_b + ip * rn * std::exp(-c_b / rn);
  return {b_exp, rn * log_ratio, (rates.g_b + rates.i_b * log_ratio) * rn};
}

BillingStats billing_fixed(const RateCard& rates, double rn, double c_b) {
  rates.validate();
  require_positive(rn, "rn");
  require_quota(c_b);
  const double b_exp = c_b >= rn ? (rates.g_b - rates.i_b) * rn + rates.i_b * c_b
                                 : rates.g_b * rn + rates.p_b * (rn - c_b);
  return {b_exp, rn, rates.g_b * rn};
}

BillingStats billing_stats(const VolumeModel& aggregate, const RateCard& rates, double c_b) {
  const double rn = aggregate.mean();
  switch (aggregate.family()) {
    case Family::Uniform:
      if (c_b <= 2.0 * rn) return billing_uniform(rates, rn, c_b);
      break;
    case Family::Pareto:
      if (c_b >= aggregate.scale()) return billing_pareto(rates, rn, aggregate.alpha(), c_b);
      break;
    case Family::Exponential:
      return billing_exponential(rates, rn, c_b);
    case Family::Fixed:
      return billing_fixed(rates, rn, c_b);
    case Family::Empirical:
      break;
  }
  // No closed form at this quota: quadrature for b_exp, the critical
  // fractile for the optimum.
  BillingStats out;
  out.b_exp = billing_generic(aggregate, rates, c_b);
  if (aggregate.family() == Family::Empirical) {
    out.c_b_opt = optimal_cb_general(aggregate, rates);
    out.b_min = billing_generic(aggregate, rates, out.c_b_opt);
  } else {
    const auto at_opt = billing_stats(aggregate, rates, optimal_cb_general(aggregate, rates));
    out.c_b_opt = at_opt.c_b_opt;
    out.b_min = at_opt.b_min;
  }
  return out;
}

double min_billing_per_bit(const RateCard& rates, Family family, std::optional<double> alpha) {
  rates.validate();
  const double ip = rates.i_b + rates.p_b;
  switch (family) {
    case Family::Uniform:
      return rates.g_b + rates.p_b - rates.p_b * rates.p_b / ip;
    case Family::Pareto:
      if (!alpha || !(*alpha > 2.0)) throw DomainError("pareto billing: alpha must be given and > 2");
      return rates.g_b - rates.i_b + rates.i_b * std::pow(ip / rates.i_b, 1.0 / *alpha);
    case Family::Exponential:
      return rates.g_b + rates.i_b * std::log(ip / rates.i_b);
    case Family::Fixed:
      return rates.g_b;
    case Family::Empirical:
      break;
  }
  throw DomainError("minimum billing per bit has no closed form for the empirical family");
}

DeviceCount devices_for_budget(const RateCard& rates, Family family, std::optional<double> alpha, double r,
                               double b_mean) {
  require_positive(r, "r");
  require_positive(b_mean, "b_mean");
  const double per_bit = min_billing_per_bit(rates, family, alpha);
  if (!(per_bit > 0.0)) {
    throw InfeasibleError(Infeasibility::Billing, "minimum billing per bit is not positive for this rate card");
  }

  DeviceCount out;
  out.n = b_mean / (per_bit * r);

  auto candidate = [&](long count) {
    const double rn = r * static_cast<double>(count);
    double c_b_opt = rn;
    const double ip = rates.i_b + rates.p_b;
    switch (family) {
      case Family::Uniform: c_b_opt = 2.0 * rates.p_b * rn / ip; break;
      case Family::Pareto: c_b_opt = std::pow(ip / rates.i_b, 1.0 / *alpha) * (*alpha - 1.0) / *alpha * rn; break;
      case Family::Exponential: c_b_opt = rn * std::log(ip / rates.i_b); break;
      default: break;
    }
    return DeviceCandidate{count, per_bit * rn, c_b_opt};
  };

  const auto lo = static_cast<long>(std::floor(out.n));
  const auto hi = static_cast<long>(std::ceil(out.n));
  if (lo >= 1) out.candidates.push_back(candidate(lo));
  if (hi >= 1 && hi != lo) out.candidates.push_back(candidate(hi));
  return out;
}

}  // namespace costplan
