#include <doctest.h>

#include <cmath>
#include <vector>

#include "costplan/billing_model.hpp"
#include "costplan/coupling_planner.hpp"
#include "costplan/energy_model.hpp"
#include "costplan/errors.hpp"
#include "costplan/rng.hpp"
#include "oracle_values.hpp"
#include "reference.hpp"

using namespace costplan;
using costplan::testing::rel_err;
namespace oracle = costplan::oracle;

namespace {

const RateCard kRates = RateCard::reference();

PlanTargets targets_from(Family family, std::optional<double> alpha, double r, double c_e, double b_mean) {
  VolumeModel m = VolumeModel::uniform(r);
  if (family == Family::Pareto) m = VolumeModel::pareto(r, *alpha);
  if (family == Family::Exponential) m = VolumeModel::exponential(r);
  if (family == Family::Fixed) m = VolumeModel::fixed(r);
  const EnergyStats s = energy_closed_form(kRates, c_e, m);
  PlanTargets t;
  t.family = family;
  t.alpha = alpha;
  t.e_mean = s.e_exp;
  t.e_updev = std::sqrt(s.e_var);
  t.b_mean = b_mean;
  return t;
}

void check_round_trip(const PlanTargets& t, const CouplingPlan& p) {
  CHECK(rel_err(p.energy.e_exp, t.e_mean) < 1e-6);
  CHECK(rel_err(std::sqrt(p.energy.e_var), t.e_updev) < 1e-6);
  CHECK(rel_err(p.billing.b_min, t.b_mean) < 1e-6);
  CHECK(rel_err(p.billing.b_exp, p.billing.b_min) < 1e-9);
  CHECK(rel_err(p.c_b, p.billing.c_b_opt) < 1e-9);
}

}  // namespace

TEST_CASE("uniform plan reproduces the reference solution") {
  PlanTargets t;
  t.family = Family::Uniform;
  t.e_mean = oracle::kUniformCe1Exp;
  t.e_updev = std::sqrt(oracle::kUniformCe1Var);
  t.b_mean = oracle::kUniformBmin;
  const CouplingPlan p = plan(kRates, t);
  CHECK(rel_err(p.r, oracle::kUniformR) < 1e-9);
  CHECK(rel_err(p.c_e, 1.0) < 1e-9);
  // rn = 1,638,400 b is 20 devices of 81,920 b
  CHECK(rel_err(p.devices.n, 20.0) < 1e-9);
  CHECK(rel_err(p.c_b, oracle::kUniformCbOpt) < 1e-9);
  check_round_trip(t, p);
}

TEST_CASE("plans round-trip for random feasible targets") {
  Rng rng(41);
  for (Family family : {Family::Uniform, Family::Exponential, Family::Pareto}) {
    CAPTURE(to_string(family));
    for (int k = 0; k < 40; ++k) {
      const double r = 1e3 + 1e6 * rng.uniform();
      std::optional<double> alpha;
      double c_e = 0.05 + 1.9 * rng.uniform();
      if (family == Family::Pareto) {
        alpha = 2.2 + 6.0 * rng.uniform();
        c_e = pareto_idle_threshold(*alpha) + 2.0 * rng.uniform();
      }
      const PlanTargets t = targets_from(family, alpha, r, c_e, 1e-5 + 1e-2 * rng.uniform());
      const CouplingPlan p = plan(kRates, t);
      check_round_trip(t, p);
      bool found = false;
      for (const auto& s : p.energy_solutions) found = found || (rel_err(s.r, r) < 1e-6 && rel_err(s.c_e, c_e) < 1e-6);
      CHECK(found);
      CHECK(p.c_e == p.energy_solutions.front().c_e);
    }
  }
}

TEST_CASE("fixed-volume plans") {
  PlanTargets t;
  t.family = Family::Fixed;
  t.e_mean = kRates.g_e * 1000.0;
  t.e_updev = 0.0;
  t.b_mean = kRates.g_b * 5000.0;
  const CouplingPlan p = plan(kRates, t);
  CHECK(rel_err(p.r, 1000.0) < 1e-14);
  CHECK(p.c_e == 1.0);
  CHECK(rel_err(p.devices.n, 5.0) < 1e-12);
  CHECK(rel_err(p.c_b, 5000.0) < 1e-12);
  t.e_updev = 0.25 * t.e_mean;
  const CouplingPlan q = plan(kRates, t);
  CHECK(rel_err(q.c_e, 0.75) < 1e-14);
  CHECK(rel_err(std::sqrt(q.energy.e_var), t.e_updev) < 1e-12);
  t.e_updev = 2.0 * t.e_mean;
  CHECK_THROWS_AS(plan(kRates, t), InfeasibleError);
}

TEST_CASE("unattainable energy targets are reported with the attainable range") {
  PlanTargets t;
  t.family = Family::Uniform;
  t.e_mean = oracle::kUniformCe1Exp;
  t.e_updev = 0.0;
  t.b_mean = 1e-3;
  try {
    plan(kRates, t);
    FAIL("expected infeasible");
  } catch (const InfeasibleError& e) {
    CHECK(e.kind() == Infeasibility::Unattainable);
    CHECK(e.attainable_lo() >= 0.0);
    CHECK(e.attainable_hi() > e.attainable_lo());
  }
  t.e_updev = 10.0;  // far above anything reachable at this mean
  try {
    plan(kRates, t);
    FAIL("expected infeasible");
  } catch (const InfeasibleError& e) {
    CHECK(e.kind() == Infeasibility::Unattainable);
    CHECK(std::sqrt(e.attainable_hi()) < 10.0);
  }
  t.family = Family::Exponential;
  CHECK_THROWS_AS(plan(kRates, t), InfeasibleError);
  t.family = Family::Pareto;
  t.alpha = 4.0;
  CHECK_THROWS_AS(plan(kRates, t), InfeasibleError);
}

TEST_CASE("invalid targets are rejected") {
  PlanTargets t;
  t.family = Family::Uniform;
  t.e_mean = 0.1;
  t.e_updev = 0.01;
  t.b_mean = 0.0;
  CHECK_THROWS_AS(plan(kRates, t), DomainError);
  t.b_mean = 1.0;
  t.family = Family::Pareto;
  CHECK_THROWS_AS(plan(kRates, t), DomainError);
  t.family = Family::Empirical;
  CHECK_THROWS_AS(plan(kRates, t), DomainError);
}

TEST_CASE("increasing e_updev keeps a feasible uniform plan feasible") {
  PlanTargets t = targets_from(Family::Uniform, std::nullopt, 81920.0, 1.0, 1e-3);
  const double base = t.e_updev;
  for (double factor : {1.0, 1.5, 2.0, 2.5, 3.0}) {
    t.e_updev = base * factor;
    CAPTURE(factor);
    try {
      const CouplingPlan p = plan(kRates, t);
      CHECK(rel_err(std::sqrt(p.energy.e_var), t.e_updev) < 1e-6);
    } catch (const InfeasibleError& e) {
      // the attainable range at this mean ends here; larger targets stay infeasible
      CHECK(std::sqrt(e.attainable_hi()) < t.e_updev);
      break;
    }
  }
}

TEST_CASE("device count scales linearly with the billing budget") {
  PlanTargets t = targets_from(Family::Exponential, std::nullopt, 82616.0, 0.5, 1e-3);
  const CouplingPlan a = plan(kRates, t);
  t.b_mean *= 3.0;
  const CouplingPlan b = plan(kRates, t);
  CHECK(rel_err(b.r, a.r) < 1e-12);
  CHECK(rel_err(b.devices.n, 3.0 * a.devices.n) < 1e-12);
}

TEST_CASE("sweep evaluates each grid point") {
  SweepSpec spec;
  spec.rates = kRates;
  spec.device = VolumeModel::uniform(oracle::kUniformR);
  spec.grid = {0.5, 1.0, 1.5};
  const auto points = sweep(spec);
  REQUIRE(points.size() == 3);
  CHECK(rel_err(*points[0].value, oracle::kUniformCeHalfExp) < 1e-13);
  CHECK(rel_err(*points[1].value, oracle::kUniformCe1Exp) < 1e-13);
  CHECK(rel_err(*points[2].value, oracle::kUniformCe3HalvesExp) < 1e-13);

  SweepSpec billing;
  billing.rates = kRates;
  billing.device = VolumeModel::exponential(163840.0);
  billing.n_devices = 10;
  billing.vary = SweepVariable::Quota;
  billing.metric = Metric::Billing;
  billing.grid = {0.0, oracle::kExpCbOpt};
  const auto b = sweep(billing);
  CHECK(rel_err(*b[0].value, oracle::kBillingAtZeroQuota) < 1e-12);
  CHECK(rel_err(*b[1].value, oracle::kExpBmin) < 1e-12);
}

TEST_CASE("sweep reports out-of-domain points without failing") {
  SweepSpec spec;
  spec.rates = kRates;
  spec.device = VolumeModel::uniform(10.0);
  spec.metric = Metric::EnergyVar;
  spec.grid = {-1.0, 1.0, 3.0};
  const auto points = sweep(spec);
  CHECK_FALSE(points[0].value.has_value());
  CHECK_FALSE(points[0].error.empty());
  CHECK(points[1].value.has_value());
  CHECK(points[2].value.has_value());  // uniform beyond the support evaluates by quadrature
  CHECK(*points[2].value == doctest::Approx(0.0));
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec;
  spec.rates = kRates;
  CHECK_THROWS_AS(sweep(spec), DomainError);  // empty grid
  spec.grid = {1.0};
  spec.metric = Metric::Billing;
  CHECK_THROWS_AS(sweep(spec), DomainError);
  CHECK(parse_metric("e_var") == Metric::EnergyVar);
  CHECK(parse_sweep_variable("c_b") == SweepVariable::Quota);
  CHECK(to_string(Metric::Billing) == "b_exp");
  CHECK_THROWS_AS(parse_metric("cost"), DomainError);
}
