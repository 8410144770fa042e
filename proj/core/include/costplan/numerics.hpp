#pragma once

#include <functional>
#include <span>
#include <vector>

namespace costplan {

struct Tolerance {
  double rel = 1e-10;
  double abs = 0.0;
  int max_iter = 200;

  // Throws DomainError unless rel > 0, abs >= 0, max_iter >= 1.
  void validate() const;
};

// Tolerance used by the model modules when they evaluate integrals by quadrature.
inline constexpr Tolerance kQuadratureTolerance{1e-13, 0.0, 200};

using RealFunction = std::function<double(double)>;

// Principal branch of the Lambert W function, W0(x) >= -1 for x >= -1/e.
// Halley iteration from a piecewise initial guess; throws DomainError for
// x < -1/e beyond a 1e-15 slack.
double lambert_w0(double x);

// Adaptive quadrature of f over [lo, hi]. hi may be +infinity; semi-infinite
// ranges use a double-exponential rule so algebraic (Pareto) tails are exact
// rather than truncated. Throws ConvergenceError when the error estimate
// stays above tol after the refinement budget.
double integrate(const RealFunction& f, double lo, double hi, const Tolerance& tol = {});

// Bracketed root of f on [lo, hi]. Requires f(lo)*f(hi) <= 0 (BracketError
// otherwise). Terminates when the bracket is narrower than
// tol.rel*|x| + tol.abs or |f(x)| == 0.
double find_root(const RealFunction& f, double lo, double hi, const Tolerance& tol = {});

// Coefficient of determination of `model` against `empirical`:
// 1 - SS_res / SS_tot with SS_tot about the empirical mean.
double r_squared(std::span<const double> model, std::span<const double> empirical);

// n evenly spaced points from lo to hi inclusive (n == 1 yields {lo}).
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace costplan
