#pragma once

#include <algorithm>
#include <cmath>

#include "costplan/numerics.hpp"
#include "costplan/volume_models.hpp"

namespace costplan::detail {

// E[h(Psi) ; lo <= Psi <= hi] under model m. Continuous families integrate
// h * pdf over the support intersected with [lo, hi]; Fixed and Empirical
// take the exact finite expectation.
template <typename H>
double partial_expectation(const VolumeModel& m, H&& h, double lo, double hi, const Tolerance& tol) {
  if (m.family() == Family::Fixed) {
    const double r = m.mean();
    return (r >= lo && r <= hi) ? h(r) : 0.0;
  }
  if (m.family() == Family::Empirical) {
    const auto s = m.samples();
    double total = 0.0;
    for (double x : s) {
      if (x >= lo && x <= hi) total += h(x);
    }
    return total / static_cast<double>(s.size());
  }

  const double a = std::max(lo, m.support_lo());
  const double b = std::min(hi, m.support_hi());
  if (!(a < b)) return 0.0;
  return integrate(
      [&](double x) {
        const double p = pdf(m, x);
        return p == 0.0 ? 0.0 : h(x) * p;
      },
      a, b, tol);
}

}  // namespace costplan::detail
