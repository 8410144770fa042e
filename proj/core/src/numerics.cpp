#include "costplan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "costplan/errors.hpp"

namespace costplan {

namespace {

constexpr double kBranchPoint = -1.0 / std::numbers::e;  // -1/e
constexpr double kBranchSlack = 1e-15;
constexpr double kHalleyTol = 1e-14;
constexpr int kHalleyMaxIter = 100;

// Series in p = sqrt(2(e x + 1)) about the branch point.
double branch_point_guess(double x) {
  const double p = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * x + 1.0)));
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0 + p * 769.0 / 17280.0))));
}

double initial_guess(double x) {
  if (x < -0.25) return branch_point_guess(x);
  if (x <= std::numbers::e) return std::log1p(x);
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace

void Tolerance::validate() const {
  if (!(rel > 0.0)) throw DomainError("tolerance: rel must be > 0");
  if (!(abs >= 0.0)) throw DomainError("tolerance: abs must be >= 0");
  if (max_iter < 1) throw DomainError("tolerance: max_iter must be >= 1");
}

double lambert_w0(double x) {
  if (std::isnan(x)) throw DomainError("lambert_w0: NaN argument");
  if (x == 0.0) return 0.0;
  if (x < kBranchPoint) {
    if (x >= kBranchPoint - kBranchSlack) return -1.0;
    throw DomainError("lambert_w0: argument " + std::to_string(x) + " below -1/e");
  }
  if (x == kBranchPoint) return -1.0;
  if (std::isinf(x)) return x;

  double w = initial_guess(x);
  for (int i = 0; i < kHalleyMaxIter; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (f == 0.0) return w;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= kHalleyTol * (1.0 + std::abs(w))) return w;
  }
  throw ConvergenceError("lambert_w0: Halley iteration did not converge");
}

double integrate(const RealFunction& f, double lo, double hi, const Tolerance& tol) {
  tol.validate();
  if (std::isnan(lo) || std::isnan(hi) || !(lo <= hi)) {
    throw DomainError("integrate: require lo <= hi");
  }
  if (lo == hi) return 0.0;
  if (std::isinf(lo)) throw DomainError("integrate: lower limit must be finite");

  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  if (std::isinf(hi)) {
    const std::size_t refinements = static_cast<std::size_t>(std::clamp(tol.max_iter, 1, 12));
    boost::math::quadrature::exp_sinh<double> rule(refinements);
    std::size_t levels = 0;
    value = rule.integrate(f, lo, hi, tol.rel, &error, &l1, &levels);
  } else {
    // Integrate over [0, 1] and rescale: on very short ranges the Boost
    // recursive error estimate is inflated far above the true error.
    const unsigned depth = static_cast<unsigned>(std::clamp(tol.max_iter, 1, 20));
    const double width = hi - lo;
    auto unit = [&](double t) { return f(lo + width * t); };
    value = width * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(unit, 0.0, 1.0, depth, tol.rel,
                                                                                  &error, &l1);
    error *= width;
    l1 *= width;
  }
  if (!std::isfinite(value)) throw ConvergenceError("integrate: non-finite result");
  // Double rounding sets a floor on attainable accuracy; tolerances below it
  // are treated as "as accurate as the arithmetic allows".
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
  if (error > std::max({tol.rel * l1, tol.abs, floor})) {
    throw ConvergenceError("integrate: error estimate " + std::to_string(error) +
                           " exceeds tolerance after refinement budget");
  }
  return value;
}

double find_root(const RealFunction& f, double lo, double hi, const Tolerance& tol) {
  tol.validate();
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("find_root: NaN bracket");
  if (lo > hi) std::swap(lo, hi);
  const double flo = f(lo);
  const double fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi)) throw DomainError("find_root: f is NaN at bracket end");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) {
    throw BracketError("find_root: f(lo) and f(hi) have the same sign");
  }

  auto narrow_enough = [&tol](double a, double b) {
    const double mid = 0.5 * (a + b);
    const double ulp = std::abs(std::nextafter(mid, std::numeric_limits<double>::infinity()) - mid);
    return std::abs(b - a) <= std::max({tol.rel * std::abs(mid), tol.abs, 2.0 * ulp});
  };

  std::uintmax_t iterations = static_cast<std::uintmax_t>(tol.max_iter);
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, narrow_enough, iterations);
  if (a == b) return a;
  if (!narrow_enough(a, b)) {
    throw ConvergenceError("find_root: bracket did not shrink below tolerance in " +
                           std::to_string(tol.max_iter) + " iterations");
  }
  return 0.5 * (a + b);
}

double r_squared(std::span<const double> model, std::span<const double> empirical) {
  if (model.size() != empirical.size()) {
    throw DomainError("r_squared: length mismatch (" + std::to_string(model.size()) + " vs " +
                      std::to_string(empirical.size()) + ")");
  }
  if (empirical.empty()) throw DomainError("r_squared: empty input");

  double mean = 0.0;
  for (double y : empirical) mean += y;
  mean /= static_cast<double>(empirical.size());

  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    ss_tot += (empirical[i] - mean) * (empirical[i] - mean);
    ss_res += (empirical[i] - model[i]) * (empirical[i] - model[i]);
  }
  if (ss_tot == 0.0) throw DomainError("r_squared: empirical values have zero variance");
  return 1.0 - ss_res / ss_tot;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  if (n == 0) return out;
  out.reserve(n);
  if (n == 1) {
    out.push_back(lo);
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) out.push_back(lo + step * static_cast<double>(i));
  out.push_back(hi);
  return out;
}

}  // namespace costplan
