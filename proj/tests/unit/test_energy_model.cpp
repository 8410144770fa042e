#include <doctest.h>

#include <cmath>
#include <vector>

#include "costplan/energy_model.hpp"
#include "costplan/errors.hpp"
#include "costplan/numerics.hpp"
#include "costplan/rng.hpp"
#include "oracle_values.hpp"
#include "reference.hpp"

using namespace costplan;
using costplan::testing::rel_err;
namespace oracle = costplan::oracle;

namespace {

const RateCard kRates = RateCard::reference();

// Direct Simpson evaluation of the energy kernels over a finite range.
EnergyStats simpson_energy(const RateCard& rates, double c_e, const VolumeModel& m, double hi) {
  const double k = c_e * m.mean();
  auto idle = [&](double x) { return x < k ? (k - x) * pdf(m, x) : 0.0; };
  auto over = [&](double x) { return x > k ? (x - k) * (x - k) * pdf(m, x) : 0.0; };
  const double lo = m.support_lo();
  EnergyStats s;
  s.e_exp = rates.g_e * m.mean() + (k > lo ? rates.i_e * costplan::testing::simpson(idle, lo, k) : 0.0);
  const double from = std::max(lo, k);
  s.e_var = rates.g_e * rates.g_e * costplan::testing::simpson(over, from, hi, 200000);
  return s;
}

}  // namespace

TEST_CASE("uniform energy reference values") {
  const EnergyStats s = energy_uniform(kRates, 1.0, oracle::kUniformR);
  CHECK(rel_err(s.e_exp, oracle::kUniformCe1Exp) < 1e-13);
  CHECK(rel_err(s.e_var, oracle::kUniformCe1Var) < 1e-13);
  CHECK(rel_err(energy_uniform(kRates, 0.5, oracle::kUniformR).e_exp, oracle::kUniformCeHalfExp) < 1e-13);
  CHECK(rel_err(energy_uniform(kRates, 1.5, oracle::kUniformR).e_exp, oracle::kUniformCe3HalvesExp) < 1e-13);
  CHECK(energy_uniform(kRates, 2.0, oracle::kUniformR).e_var == 0.0);
  CHECK(rel_err(energy_uniform(kRates, 0.0, oracle::kUniformR).e_exp, kRates.g_e * oracle::kUniformR) < 1e-15);
  CHECK_THROWS_AS(energy_uniform(kRates, 2.5, 1.0), DomainError);
}

TEST_CASE("generic quadrature agrees with closed forms and Simpson") {
  const double r = oracle::kUniformR;
  struct Case {
    VolumeModel m;
    double c_e;
  };
  const std::vector<Case> cases{{VolumeModel::uniform(r), 1.0},
                                {VolumeModel::uniform(r), 0.3},
                                {VolumeModel::exponential(r), 0.5},
                                {VolumeModel::exponential(r), 2.5},
                                {VolumeModel::pareto(r, 4.0), 1.0},
                                {VolumeModel::pareto(r, 4.0), 0.5},
                                {VolumeModel::pareto(r, 3.0), 1.7}};
  for (const auto& c : cases) {
    CAPTURE(to_string(c.m.family()));
    CAPTURE(c.c_e);
    const EnergyStats closed = energy_closed_form(kRates, c.c_e, c.m);
    const EnergyStats quad = energy_generic({kRates, c.c_e, c.m});
    CHECK(rel_err(closed.e_exp, quad.e_exp) < 1e-10);
    CHECK(rel_err(closed.e_var, quad.e_var) < 1e-10);
    if (c.m.family() != Family::Pareto) {
      const double hi = std::isfinite(c.m.support_hi()) ? c.m.support_hi() : 2 * c.m.effective_support_hi();
      const EnergyStats ref = simpson_energy(kRates, c.c_e, c.m, hi);
      CHECK(rel_err(closed.e_exp, ref.e_exp) < 1e-7);
      CHECK(rel_err(closed.e_var, ref.e_var) < 1e-6);
    }
  }
}

TEST_CASE("pareto reference values and branches") {
  const EnergyStats s = energy_pareto(kRates, 1.0, oracle::kUniformR, 4.0);
  CHECK(rel_err(s.e_exp, oracle::kParetoA4Ce1Exp) < 1e-12);
  CHECK(rel_err(s.e_var, oracle::kParetoA4Ce1Var) < 1e-12);

  const EnergyStats never_idle = energy_pareto(kRates, 0.5, 1569700.0, 3.95);
  CHECK(rel_err(never_idle.e_exp, oracle::kTable1LongExp) < 1e-12);
  CHECK(rel_err(never_idle.e_var, oracle::kTable1LongVar) < 1e-12);
  CHECK(never_idle.e_exp == kRates.g_e * 1569700.0);

  // both branch formulas agree at the idle threshold
  const double c0 = pareto_idle_threshold(4.0);
  CHECK(c0 == 0.75);
  const EnergyStats at = energy_pareto(kRates, c0, 1000.0, 4.0);
  const EnergyStats below = energy_pareto(kRates, std::nextafter(c0, 0.0), 1000.0, 4.0);
  CHECK(rel_err(at.e_exp, below.e_exp) < 1e-12);
  CHECK(rel_err(at.e_var, below.e_var) < 1e-12);

  const EnergyStats limit = energy_pareto(kRates, 1.2, oracle::kUniformR, 1e6);
  CHECK(rel_err(limit.e_exp, (kRates.g_e + 0.2 * kRates.i_e) * oracle::kUniformR) < 1e-5);
  CHECK(limit.e_var < 1e-12);
  CHECK_THROWS_AS(energy_pareto(kRates, 1.0, 1.0, 2.0), DomainError);
}

TEST_CASE("exponential reference values") {
  const EnergyStats s = energy_exponential(kRates, 0.5, 82616.0);
  CHECK(rel_err(s.e_exp, oracle::kTable1ShortExp) < 1e-13);
  CHECK(rel_err(s.e_var, oracle::kTable1ShortVar) < 1e-13);
  const EnergyStats zero = energy_exponential(kRates, 0.0, 82616.0);
  CHECK(zero.e_exp == kRates.g_e * 82616.0);
  CHECK(rel_err(zero.e_var, oracle::kExpCe0Var) < 1e-13);
  CHECK(energy_exponential(kRates, 800.0, 82616.0).e_var == 0.0);
}

TEST_CASE("fixed volume energy") {
  const double r = 1000.0;
  const EnergyStats at_mean = energy_fixed(kRates, 1.0, r);
  CHECK(at_mean.e_exp == kRates.g_e * r);
  CHECK(at_mean.e_var == 0.0);
  // threshold below the point mass: never idle, the whole overshoot counts
  const EnergyStats low = energy_fixed(kRates, 0.5, r);
  CHECK(low.e_exp == kRates.g_e * r);
  CHECK(rel_err(low.e_var, kRates.g_e * kRates.g_e * 0.25 * r * r) < 1e-15);
  const EnergyStats high = energy_fixed(kRates, 1.2, r);
  CHECK(rel_err(high.e_exp, (kRates.g_e + 0.2 * kRates.i_e) * r) < 1e-14);
  CHECK(high.e_var == 0.0);
  const EnergyStats generic = energy_generic({kRates, 1.2, VolumeModel::fixed(r)});
  CHECK(rel_err(generic.e_exp, high.e_exp) < 1e-14);
  CHECK(rel_err(solve_r_fixed(kRates, 1.2, high.e_exp), r) < 1e-14);
}

TEST_CASE("empirical energy averages the kernel over samples") {
  const VolumeModel m = VolumeModel::empirical({1.0, 2.0, 3.0, 6.0});
  const double k = 1.0 * m.mean();  // 3
  const EnergyStats s = energy_generic({kRates, 1.0, m});
  CHECK(rel_err(s.e_exp, kRates.g_e * 3.0 + kRates.i_e * (2.0 + 1.0) / 4.0) < 1e-14);
  CHECK(rel_err(s.e_var, kRates.g_e * kRates.g_e * (6.0 - k) * (6.0 - k) / 4.0) < 1e-14);
}

TEST_CASE("energy is monotone in the idle threshold") {
  const double r = 5000.0;
  for (const VolumeModel& m : {VolumeModel::uniform(r), VolumeModel::exponential(r), VolumeModel::pareto(r, 3.5)}) {
    CAPTURE(to_string(m.family()));
    EnergyStats prev = energy_closed_form(kRates, 0.005, m);
    CHECK(prev.e_exp >= kRates.g_e * r * (1 - 1e-15));
    for (double c : linspace(0.01, 2.0, 200)) {
      const EnergyStats cur = energy_closed_form(kRates, c, m);
      CHECK(cur.e_exp >= prev.e_exp * (1 - 1e-14));
      CHECK(cur.e_var <= prev.e_var * (1 + 1e-14));
      CHECK(cur.e_exp >= kRates.g_e * r * (1 - 1e-15));
      prev = cur;
    }
  }
}

TEST_CASE("uniform solvers") {
  const double r = oracle::kUniformR;
  CHECK(rel_err(solve_ce_uniform(kRates, r, oracle::kUniformCe1Exp), 1.0) < 1e-9);
  CHECK(rel_err(solve_r_uniform(kRates, 1.0, oracle::kUniformCe1Exp), r) < 1e-12);
  CHECK_THROWS_AS(solve_r_uniform(kRates, 2.0, 0.1), DomainError);

  try {
    solve_ce_uniform(kRates, r, 0.14);
    FAIL("expected below-floor error");
  } catch (const InfeasibleError& e) {
    CHECK(e.kind() == Infeasibility::BelowFloor);
    CHECK(rel_err(e.attainable_lo(), 0.1458176) < 1e-12);
  }
  try {
    solve_ce_uniform(kRates, r, 0.20);
    FAIL("expected above-ceiling error");
  } catch (const InfeasibleError& e) {
    CHECK(e.kind() == Infeasibility::AboveCeiling);
    CHECK(rel_err(e.attainable_hi(), 0.1957888) < 1e-12);
  }

  CHECK(evar_uniform_given_ce(kRates, 0.1, 2.0) == 0.0);
  CHECK(rel_err(evar_uniform_given_ce(kRates, oracle::kUniformCe1Exp, 1.0), oracle::kUniformCe1Var) < 1e-12);
  CHECK(rel_err(evar_uniform_given_r(kRates, oracle::kUniformCe1Exp, r), oracle::kUniformCe1Var) < 1e-9);
  CHECK_THROWS_AS(evar_uniform_given_r(kRates, 0.14, r), InfeasibleError);

  Rng rng(17);
  for (int k = 0; k < 200; ++k) {
    const double rr = 100.0 + rng.uniform() * 1e6;
    const double c = 0.01 + 1.98 * rng.uniform();
    const double e = energy_uniform(kRates, c, rr).e_exp;
    CHECK(rel_err(solve_ce_uniform(kRates, rr, e), c) < 1e-9);
    CHECK(rel_err(solve_r_uniform(kRates, c, e), rr) < 1e-12);
    CHECK(rel_err(evar_uniform_given_ce(kRates, e, c), energy_uniform(kRates, c, rr).e_var) < 1e-9);
  }
}

TEST_CASE("pareto solver") {
  CHECK(rel_err(solve_r_pareto(kRates, 1.0, 4.0, oracle::kParetoA4Ce1Exp), oracle::kUniformR) < 1e-12);
  CHECK(rel_err(solve_r_pareto(kRates, 1.2, 1e6, 0.155812), 81920.0) < 1e-5);
  CHECK_THROWS_AS(solve_r_pareto(kRates, 0.5, 4.0, 0.15), DomainError);
  Rng rng(19);
  for (int k = 0; k < 200; ++k) {
    const double alpha = 2.05 + 8.0 * rng.uniform();
    const double c = pareto_idle_threshold(alpha) + 3.0 * rng.uniform();
    const double r = 10.0 + 1e6 * rng.uniform();
    const double e = energy_pareto(kRates, c, r, alpha).e_exp;
    CHECK(rel_err(solve_r_pareto(kRates, c, alpha, e), r) < 1e-12);
  }
}

TEST_CASE("exponential solvers") {
  const double r = 82616.0;
  CHECK(rel_err(solve_ce_exponential(kRates, r, oracle::kTable1ShortExp).c_e, 0.5) < 1e-9);
  CHECK(rel_err(solve_ce_exponential(kRates, r, oracle::kTable1ShortExp).e_var, oracle::kTable1ShortVar) < 1e-9);
  const ExponentialThreshold floor = solve_ce_exponential(kRates, r, kRates.g_e * r);
  CHECK(floor.c_e == 0.0);
  CHECK(rel_err(floor.e_var, oracle::kExpCe0Var) < 1e-13);
  try {
    solve_ce_exponential(kRates, r, 0.9 * kRates.g_e * r);
    FAIL("expected infeasible");
  } catch (const InfeasibleError& e) {
    CHECK(e.kind() == Infeasibility::BelowFloor);
  }
  Rng rng(23);
  for (int k = 0; k < 200; ++k) {
    const double rr = 100.0 + 1e6 * rng.uniform();
    const double c = 0.01 + 5.0 * rng.uniform();
    const EnergyStats s = energy_exponential(kRates, c, rr);
    const ExponentialThreshold t = solve_ce_exponential(kRates, rr, s.e_exp);
    CHECK(rel_err(t.c_e, c) < 1e-9);
    CHECK(rel_err(t.e_var, s.e_var) < 1e-9);
    CHECK(rel_err(solve_r_exponential(kRates, c, s.e_exp), rr) < 1e-12);
  }
}
