#include "costplan/ingest_fit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string_view>

#include "costplan/errors.hpp"
#include "costplan/numerics.hpp"

namespace costplan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kAlphaCap = 1e6;
constexpr Family kDefaultFamilies[] = {Family::Uniform, Family::Exponential, Family::Pareto};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

// The support top 2r is itself estimated, so a maximum just above it is
// sampling error in r rather than evidence against the family. Samples more
// than three standard errors of 2r above it disqualify the candidate.
FamilyFit fit_uniform(std::span<const double> sorted, double mean) {
  FamilyFit fit{Family::Uniform, kNegInf, std::nullopt, false, {}};
  const auto n = static_cast<double>(sorted.size());
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const double slack = n > 1.0 ? 3.0 * 2.0 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  if (sorted.back() > 2.0 * mean + slack) {
    fit.note = "sample exceeds the support [0, 2r]";
    return fit;
  }
  fit.log_likelihood = -static_cast<double>(sorted.size()) * std::log(2.0 * mean);
  fit.admissible = true;
  return fit;
}

FamilyFit fit_exponential(std::span<const double> sorted, double mean) {
  const auto n = static_cast<double>(sorted.size());
  double total = 0.0;
  for (double x : sorted) total += x;
  return {Family::Exponential, -n * std::log(mean) - total / mean, std::nullopt, true, {}};
}

// Log-likelihood with scale v = (alpha-1)/alpha * mean:
//   n ln(alpha) + n alpha ln(v) - (alpha + 1) sum ln(x)
// concave in alpha, maximized on (2, alpha_max] where alpha_max keeps v <= min(x).
FamilyFit fit_pareto(std::span<const double> sorted, double mean) {
  FamilyFit fit{Family::Pareto, kNegInf, std::nullopt, false, {}};
  const double smallest = sorted.front();
  if (!(smallest > 0.0)) {
    fit.note = "sample contains zero volumes; Pareto support starts above zero";
    return fit;
  }
  const auto n = static_cast<double>(sorted.size());
  double log_sum = 0.0;
  for (double x : sorted) log_sum += std::log(x);

  const double ratio = smallest / mean;
  const double alpha_max = ratio >= 1.0 ? kAlphaCap : std::min(kAlphaCap, 1.0 / (1.0 - ratio));
  if (!(alpha_max > 2.0)) {
    fit.note = "alpha estimate <= 2 (mean-matched scale exceeds the smallest sample for every alpha > 2)";
    return fit;
  }

  auto log_scale = [mean](double a) { return std::log((a - 1.0) / a * mean); };
  auto slope = [&](double a) { return n / a + n * log_scale(a) + n / (a - 1.0) - log_sum; };
  auto loglik = [&](double a) { return n * std::log(a) + n * a * log_scale(a) - (a + 1.0) * log_sum; };

  const double a_lo = 2.0 * (1.0 + 1e-12);
  double alpha = 0.0;
  if (slope(a_lo) <= 0.0) {
    fit.note = "alpha estimate <= 2; Pareto needs alpha > 2 for finite variability";
    return fit;
  }
  if (slope(alpha_max) >= 0.0) {
    alpha = alpha_max;
  } else {
    alpha = find_root(slope, a_lo, alpha_max, Tolerance{1e-13, 0.0, 300});
  }
  fit.alpha = alpha;
  fit.log_likelihood = loglik(alpha);
  fit.admissible = true;
  return fit;
}

}  // namespace

VolumeLog parse_volume_log(std::istream& in) {
  if (!in) throw InputError("volume log: stream is not readable");
  VolumeLog log;
  std::optional<double> interval;
  std::string line;
  std::size_t row = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++row;
    std::string_view text(line);
    if (row == 1 && text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    text = trim(text);
    if (text.empty()) continue;

    const auto comma = text.find(',');
    const std::string_view first = comma == std::string_view::npos ? text : text.substr(0, comma);
    if (!seen_content && !parse_number(first)) {
      seen_content = true;  // header line
      continue;
    }
    seen_content = true;
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(row, "expected two comma-separated fields: interval_seconds,volume_bits");
    }
    const auto seconds = parse_number(first);
    const auto bits = parse_number(text.substr(comma + 1));
    if (!seconds || !bits) throw ParseError(row, "non-numeric field");
    if (!std::isfinite(*seconds) || !(*seconds > 0.0)) throw ParseError(row, "interval_seconds must be > 0");
    if (!std::isfinite(*bits)) throw ParseError(row, "volume_bits must be finite");
    if (*bits < 0.0) throw ParseError(row, "negative volume");
    if (interval && *interval != *seconds) {
      throw ParseError(row, "interval_seconds differs from the first row");
    }
    interval = *seconds;
    log.volumes.push_back(*bits);
  }
  if (log.volumes.empty()) throw InputError("volume log: no data rows");
  log.interval_seconds = *interval;
  return log;
}

VolumeLog load_volume_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open volume log '" + path.string() + "'");
  return parse_volume_log(in);
}

FitResult fit_model(const VolumeLog& log, std::span<const Family> families) {
  if (log.volumes.empty()) throw DomainError("fit: empty volume log");
  if (families.empty()) families = kDefaultFamilies;
  for (Family f : families) {
    if (f != Family::Uniform && f != Family::Exponential && f != Family::Pareto) {
      throw DomainError("fit: candidate family must be uniform, exponential or pareto");
    }
  }

  // Sorting fixes the summation order, so the fit ignores row order.
  std::vector<double> sorted(log.volumes);
  std::sort(sorted.begin(), sorted.end());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  if (!(mean > 0.0)) throw DomainError("fit: all volumes are zero");

  FitResult result;
  result.histogram = make_histogram(sorted);
  if (sorted.front() == sorted.back()) {
    result.model = VolumeModel::fixed(mean);
    result.warnings.push_back("all volumes equal; returning the fixed-volume model");
    return result;
  }

  for (Family f : families) {
    FamilyFit fit = f == Family::Uniform       ? fit_uniform(sorted, mean)
                    : f == Family::Exponential ? fit_exponential(sorted, mean)
                                               : fit_pareto(sorted, mean);
    if (!fit.admissible && f == Family::Pareto) result.warnings.push_back("pareto excluded: " + fit.note);
    result.candidates.push_back(std::move(fit));
  }

  const FamilyFit* best = nullptr;
  for (const auto& fit : result.candidates) {
    if (fit.admissible && (!best || fit.log_likelihood > best->log_likelihood)) best = &fit;
  }
  if (!best) throw DomainError("fit: no candidate family can produce this sample");

  switch (best->family) {
    case Family::Uniform: result.model = VolumeModel::uniform(mean); break;
    case Family::Exponential: result.model = VolumeModel::exponential(mean); break;
    default: result.model = VolumeModel::pareto(mean, *best->alpha); break;
  }
  return result;
}

}  // namespace costplan
