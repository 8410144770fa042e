#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "costplan/volume_models.hpp"

namespace costplan {

// Per-interval query volumes from one device, all sharing one interval length.
struct VolumeLog {
  double interval_seconds = 0.0;
  std::vector<double> volumes;  // bits, in file order
};

// Reads `interval_seconds,volume_bits` rows (optional header line, LF or
// CRLF). Throws ParseError naming the 1-based line for malformed, negative,
// or inconsistent rows, and InputError for unreadable or empty input.
VolumeLog parse_volume_log(std::istream& in);
VolumeLog load_volume_log(const std::filesystem::path& path);

struct FamilyFit {
  Family family = Family::Uniform;
  double log_likelihood = 0.0;  // -inf when the family cannot produce the sample
  std::optional<double> alpha;  // Pareto only
  bool admissible = false;
  std::string note;  // why the family was excluded, if it was
};

struct FitResult {
  VolumeModel model = VolumeModel::fixed(1.0);
  std::vector<FamilyFit> candidates;
  Histogram histogram;
  std::vector<std::string> warnings;
};

// Fits each requested family with its mean pinned to the sample mean and
// picks the highest log-likelihood. Pareto's alpha is the constrained MLE
// (scale tied to the mean, scale <= smallest sample); alpha <= 2 excludes it.
// An all-equal sample returns Fixed. Candidates must be Uniform, Exponential
// or Pareto.
FitResult fit_model(const VolumeLog& log,
                    std::span<const Family> families = std::span<const Family>{});

}  // namespace costplan
