#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "costplan/errors.hpp"
#include "costplan/ingest_fit.hpp"
#include "costplan/rng.hpp"
#include "costplan/volume_models.hpp"
#include "reference.hpp"

using namespace costplan;
using costplan::testing::rel_err;

namespace {

VolumeLog parse(const std::string& text) {
  std::istringstream in(text);
  return parse_volume_log(in);
}

std::size_t error_row(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.row();
  }
  return 0;
}

VolumeLog log_of(std::vector<double> volumes) { return VolumeLog{60.0, std::move(volumes)}; }

}  // namespace

TEST_CASE("parse a log with header, BOM and blank lines") {
  const VolumeLog log = parse("\xEF\xBB\xBFinterval_seconds,volume_bits\n60,100\n\n 60 , 250.5 \r\n60,0\n");
  CHECK(log.interval_seconds == 60.0);
  CHECK(log.volumes == std::vector<double>{100.0, 250.5, 0.0});
  CHECK(parse("1200,5e6\n1200,7e6\n").volumes.size() == 2);
}

TEST_CASE("malformed rows report their line number") {
  CHECK(error_row("t,v\n60,1\n60,abc\n") == 3);
  CHECK(error_row("60,1\n60\n") == 2);
  CHECK(error_row("60,1\n60,2,3\n") == 2);
  CHECK(error_row("60,1\n60,-5\n") == 2);
  CHECK(error_row("60,1\n30,5\n") == 2);
  CHECK(error_row("0,1\n") == 1);
  CHECK(error_row("t,v\nx,y\n") == 2);
  CHECK_THROWS_AS(parse("interval_seconds,volume_bits\n"), InputError);
  CHECK_THROWS_AS(parse(""), InputError);
  CHECK_THROWS_AS(load_volume_log("/nonexistent/volume.csv"), InputError);
}

TEST_CASE("fitted mean equals the sample mean") {
  const auto data = sample(VolumeModel::exponential(500.0), 3000, 4);
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / data.size();
  const FitResult fit = fit_model(log_of(data));
  CHECK(rel_err(fit.model.mean(), mean) < 1e-12);
  CHECK(fit.candidates.size() == 3);
}

TEST_CASE("large samples re-select their own family") {
  struct Case {
    VolumeModel m;
    Family expected;
  };
  for (const Case& c : {Case{VolumeModel::uniform(1e5), Family::Uniform},
                        Case{VolumeModel::exponential(1e5), Family::Exponential},
                        Case{VolumeModel::pareto(1e5, 3.5), Family::Pareto}}) {
    CAPTURE(to_string(c.expected));
    const FitResult fit = fit_model(log_of(sample(c.m, 20000, 77)));
    CHECK(fit.model.family() == c.expected);
    if (c.expected == Family::Pareto) CHECK(fit.model.alpha() == doctest::Approx(3.5).epsilon(0.05));
    // refit the winner's own output
    const FitResult again = fit_model(log_of(sample(fit.model, 20000, 78)));
    CHECK(again.model.family() == c.expected);
  }
}

TEST_CASE("pareto maximum likelihood with the mean pinned") {
  const auto data = sample(VolumeModel::pareto(10.0, 4.0), 50000, 9);
  const FitResult fit = fit_model(log_of(data));
  REQUIRE(fit.model.family() == Family::Pareto);
  const double alpha = fit.model.alpha();
  // the log-likelihood is maximal at the returned shape
  const double mean = fit.model.mean();
  double sum_log = 0.0;
  for (double x : data) sum_log += std::log(x);
  const double n = static_cast<double>(data.size());
  auto loglik = [&](double a) -> double {
    const double v = (a - 1.0) / a * mean;
    if (v > *std::min_element(data.begin(), data.end())) return -INFINITY;
    return n * std::log(a) + n * a * std::log(v) - (a + 1.0) * sum_log;
  };
  CHECK(loglik(alpha) >= loglik(alpha * 1.001));
  CHECK(loglik(alpha) >= loglik(alpha * 0.999));
  for (const auto& c : fit.candidates) {
    if (c.family == Family::Pareto) CHECK(rel_err(c.log_likelihood, loglik(alpha)) < 1e-10);
  }
}

TEST_CASE("family selection ignores sample order") {
  auto data = sample(VolumeModel::pareto(1e3, 2.8), 2000, 21);
  const FitResult a = fit_model(log_of(data));
  std::reverse(data.begin(), data.end());
  const FitResult b = fit_model(log_of(data));
  Rng rng(5);
  for (std::size_t i = data.size() - 1; i > 0; --i) std::swap(data[i], data[rng.next_u64() % (i + 1)]);
  const FitResult c = fit_model(log_of(data));
  CHECK(a.model.family() == b.model.family());
  CHECK(a.model.family() == c.model.family());
  CHECK(a.model.mean() == b.model.mean());
  CHECK(a.model.mean() == c.model.mean());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    CHECK(a.candidates[i].log_likelihood == b.candidates[i].log_likelihood);
    CHECK(a.candidates[i].log_likelihood == c.candidates[i].log_likelihood);
  }
}

TEST_CASE("uniform is disqualified by samples well above twice the mean") {
  std::vector<double> data(200, 1.0);
  data.back() = 50.0;
  const FitResult fit = fit_model(log_of(data));
  for (const auto& c : fit.candidates) {
    if (c.family == Family::Uniform) {
      CHECK(std::isinf(c.log_likelihood));
      CHECK_FALSE(c.admissible);
    }
  }
  CHECK(fit.model.family() != Family::Uniform);
}

TEST_CASE("uniform samples keep the uniform candidate across seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FitResult fit = fit_model(log_of(sample(VolumeModel::uniform(1e4), 5000, seed)));
    CHECK(fit.model.family() == Family::Uniform);
  }
}

TEST_CASE("constant logs give a fixed model") {
  const FitResult fit = fit_model(log_of({7.0, 7.0, 7.0}));
  CHECK(fit.model.family() == Family::Fixed);
  CHECK(fit.model.mean() == 7.0);
  CHECK_THROWS_AS(fit_model(log_of({0.0, 0.0})), DomainError);
  CHECK_THROWS_AS(fit_model(log_of({})), DomainError);
}

TEST_CASE("candidate families can be restricted") {
  const auto data = sample(VolumeModel::uniform(100.0), 1000, 2);
  const std::vector<Family> only{Family::Exponential, Family::Pareto};
  const FitResult fit = fit_model(log_of(data), only);
  CHECK(fit.candidates.size() == 2);
  CHECK(fit.model.family() == Family::Exponential);
  const std::vector<Family> bad{Family::Fixed};
  CHECK_THROWS_AS(fit_model(log_of(data), bad), DomainError);
  // no admissible candidate left
  const auto heavy = sample(VolumeModel::exponential(100.0), 1000, 2);
  const std::vector<Family> neither{Family::Uniform, Family::Pareto};
  CHECK_THROWS_AS(fit_model(log_of(heavy), neither), DomainError);
}

TEST_CASE("bundled sample log fits an exponential law") {
  const VolumeLog log = load_volume_log(COSTPLAN_DATA_DIR "/sample_exponential_t60.csv");
  CHECK(log.interval_seconds == 60.0);
  CHECK(log.volumes.size() == 200);
  const FitResult fit = fit_model(log);
  CHECK(fit.model.family() == Family::Exponential);
  CHECK(fit.histogram.bins() > 1);
}
