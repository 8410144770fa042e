#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "costplan/billing_model.hpp"
#include "costplan/coupling_planner.hpp"
#include "costplan/energy_model.hpp"
#include "costplan/errors.hpp"
#include "costplan/ingest_fit.hpp"
#include "costplan/simulator.hpp"
#include "costplan/volume_models.hpp"

#ifndef COSTPLAN_VERSION
#define COSTPLAN_VERSION "0.0.0"
#endif

namespace costplan::cli {

namespace {

using json = nlohmann::json;

constexpr const char* kToolName = "iot-costplan";

// Bad flags, bad config, unreadable or unwritable files: exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a subcommand may read. Config file values are loaded first and
// command-line flags then overwrite whatever they name.
struct RunConfig {
  std::optional<double> g_e, i_e, g_b, i_b, p_b;
  std::optional<std::string> family;
  std::optional<double> r, alpha;
  std::optional<double> c_e, c_b;
  std::optional<double> e_mean, e_updev, b_mean;
  std::optional<std::int64_t> n_devices;
  std::optional<std::int64_t> intervals;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> aggregate_mode;
};

// ---------------------------------------------------------------- formatting

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void print_table(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& row : rows) width = std::max(width, row.first.size());
  for (const auto& [key, value] : rows) out << "  " << std::left << std::setw(static_cast<int>(width)) << key << "  " << value << '\n';
}

// ---------------------------------------------------------------- config file

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) known = known || it.key() == key;
    if (!known) throw UsageError("unknown config key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
  }
}

std::optional<double> read_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw UsageError("config field " + where + "." + key + " must be a number");
  return v.get<double>();
}

std::optional<std::int64_t> read_integer(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw UsageError("config field " + where + key + " must be an integer");
  return v.get<std::int64_t>();
}

std::optional<std::string> read_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw UsageError("config field " + where + "." + key + " must be a string");
  return v.get<std::string>();
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }

  check_keys(doc, {"rates", "model", "thresholds", "targets", "n_devices", "sim"}, "");
  RunConfig cfg;
  if (doc.contains("rates")) {
    const auto& rates = doc["rates"];
    check_keys(rates, {"g_e", "i_e", "g_b", "i_b", "p_b"}, "rates");
    cfg.g_e = read_number(rates, "g_e", "rates");
    cfg.i_e = read_number(rates, "i_e", "rates");
    cfg.g_b = read_number(rates, "g_b", "rates");
    cfg.i_b = read_number(rates, "i_b", "rates");
    cfg.p_b = read_number(rates, "p_b", "rates");
  }
  if (doc.contains("model")) {
    const auto& model = doc["model"];
    check_keys(model, {"family", "r", "alpha"}, "model");
    cfg.family = read_string(model, "family", "model");
    cfg.r = read_number(model, "r", "model");
    cfg.alpha = read_number(model, "alpha", "model");
  }
  if (doc.contains("thresholds")) {
    const auto& t = doc["thresholds"];
    check_keys(t, {"c_e", "c_b"}, "thresholds");
    cfg.c_e = read_number(t, "c_e", "thresholds");
    cfg.c_b = read_number(t, "c_b", "thresholds");
  }
  if (doc.contains("targets")) {
    const auto& t = doc["targets"];
    check_keys(t, {"e_mean", "e_updev", "b_mean"}, "targets");
    cfg.e_mean = read_number(t, "e_mean", "targets");
    cfg.e_updev = read_number(t, "e_updev", "targets");
    cfg.b_mean = read_number(t, "b_mean", "targets");
  }
  cfg.n_devices = read_integer(doc, "n_devices", "");
  if (doc.contains("sim")) {
    const auto& sim = doc["sim"];
    check_keys(sim, {"intervals", "seed", "aggregate_mode"}, "sim");
    cfg.intervals = read_integer(sim, "intervals", "sim.");
    if (sim.contains("seed")) {
      if (!sim["seed"].is_number_unsigned()) throw UsageError("config field sim.seed must be a non-negative integer");
      cfg.seed = sim["seed"].get<std::uint64_t>();
    }
    cfg.aggregate_mode = read_string(sim, "aggregate_mode", "sim");
  }
  return cfg;
}

// ---------------------------------------------------------------- validation

template <typename T>
const T& require(const std::optional<T>& value, const char* field) {
  if (!value) throw UsageError(std::string("missing required field ") + field);
  return *value;
}

double require_positive(const std::optional<double>& value, const char* field) {
  const double v = require(value, field);
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string(field) + " must be a finite number > 0");
  return v;
}

void check_nonnegative(const std::optional<double>& value, const char* field) {
  if (value && (!(*value >= 0.0) || !std::isfinite(*value))) {
    throw UsageError(std::string(field) + " must be a finite number >= 0");
  }
}

RateCard rates_from(const RunConfig& cfg) {
  return {require_positive(cfg.g_e, "rates.g_e"), require_positive(cfg.i_e, "rates.i_e"),
          require_positive(cfg.g_b, "rates.g_b"), require_positive(cfg.i_b, "rates.i_b"),
          require_positive(cfg.p_b, "rates.p_b")};
}

Family family_from(const RunConfig& cfg) {
  const std::string& name = require(cfg.family, "model.family");
  Family family{};
  try {
    family = parse_family(name);
  } catch (const DomainError& e) {
    throw UsageError(std::string("model.family: ") + e.what());
  }
  if (family == Family::Empirical) {
    throw UsageError("model.family: empirical models come from `fit`; use uniform|pareto|exponential|fixed");
  }
  if (family == Family::Pareto) {
    const double alpha = require(cfg.alpha, "model.alpha");
    if (!(alpha > 2.0) || !std::isfinite(alpha)) throw UsageError("model.alpha must be > 2 for the pareto family");
  }
  return family;
}

VolumeModel device_model_from(const RunConfig& cfg) {
  const Family family = family_from(cfg);
  const double r = require_positive(cfg.r, "model.r");
  switch (family) {
    case Family::Pareto: return VolumeModel::pareto(r, *cfg.alpha);
    case Family::Exponential: return VolumeModel::exponential(r);
    case Family::Fixed: return VolumeModel::fixed(r);
    default: return VolumeModel::uniform(r);
  }
}

std::size_t devices_from(const RunConfig& cfg) {
  if (!cfg.n_devices) return 1;
  if (*cfg.n_devices < 1) throw UsageError("n_devices must be >= 1");
  return static_cast<std::size_t>(*cfg.n_devices);
}

void validate_common(const RunConfig& cfg) {
  check_nonnegative(cfg.c_e, "thresholds.c_e");
  check_nonnegative(cfg.c_b, "thresholds.c_b");
  if (cfg.intervals && *cfg.intervals < 1) throw UsageError("sim.intervals must be >= 1");
  if (cfg.aggregate_mode) {
    try {
      parse_aggregate_mode(*cfg.aggregate_mode);
    } catch (const DomainError& e) {
      throw UsageError(std::string("sim.aggregate_mode: ") + e.what());
    }
  }
}

// ---------------------------------------------------------------- grid

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw UsageError("grid: '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v)) throw UsageError("grid: '" + s + "' is not a finite number");
    return v;
  };

  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw UsageError("grid: range form is lo:hi:count");
    const double count = number(parts[2]);
    if (count < 1 || count != std::floor(count)) throw UsageError("grid: count must be a positive integer");
    return linspace(number(parts[0]), number(parts[1]), static_cast<std::size_t>(count));
  }
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    if (!part.empty()) out.push_back(number(part));
  }
  return out;
}

// ---------------------------------------------------------------- outputs

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : fallback_; }
  void finish(const std::string& path) {
    if (file_) {
      file_->flush();
      if (!*file_) throw UsageError("failed writing output file '" + path + "'");
    }
  }

 private:
  std::ostream& fallback_;
  std::unique_ptr<std::ofstream> file_;
};

std::string model_description(const VolumeModel& m) {
  std::string s = "family=" + std::string(to_string(m.family())) + " r=" + fmt(m.mean());
  if (m.family() == Family::Pareto) s += " alpha=" + fmt(m.alpha());
  return s;
}

const char* metric_unit(Metric m) {
  switch (m) {
    case Metric::EnergyMean: return "J";
    case Metric::EnergyVar: return "J^2";
    case Metric::Billing: return "$";
  }
  return "";
}

void write_curve_csv(std::ostream& os, std::uint64_t seed, SweepVariable vary, Metric metric,
                     const std::string& description, const std::vector<double>& x,
                     const std::vector<std::optional<double>>& analytic,
                     const std::vector<std::optional<double>>& empirical, const std::vector<std::string>& errors,
                     double r2) {
  os << "# tool=" << kToolName << " version=" << version() << " seed=" << seed << '\n';
  os << "# x=" << to_string(vary) << '[' << (vary == SweepVariable::IdleThreshold ? "1" : "b") << ']'
     << " metric=" << to_string(metric) << '[' << metric_unit(metric) << "] " << description << '\n';
  os << "x,analytic,empirical\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    os << fmt(x[i]) << ',' << (analytic[i] ? fmt(*analytic[i]) : "") << ','
       << (empirical[i] ? fmt(*empirical[i]) : "") << '\n';
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) os << "# error x=" << fmt(x[i]) << ": " << errors[i] << '\n';
  }
  os << "# r2=" << fmt(r2) << '\n';
}

// ---------------------------------------------------------------- commands

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::string json_path;
  bool json_stdout = false;
};

int cmd_analyze(const RunConfig& cfg, const CommonOptions& opts, std::ostream& out) {
  validate_common(cfg);
  const RateCard rates = rates_from(cfg);
  const VolumeModel device = device_model_from(cfg);
  const std::size_t n = devices_from(cfg);
  const VolumeModel agg = aggregate_modeled(device, n);
  const double rn = agg.mean();

  json report;
  report["model"] = {{"family", to_string(device.family())}, {"r", device.mean()}, {"n_devices", n}, {"rn", rn}};
  if (device.family() == Family::Pareto) report["model"]["alpha"] = device.alpha();

  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("family", std::string(to_string(device.family())));
  rows.emplace_back("r [b]", fmt_short(device.mean()));
  rows.emplace_back("n_devices", std::to_string(n));

  if (cfg.c_e) {
    const EnergyStats e = energy_closed_form(rates, *cfg.c_e, device);
    report["energy"] = {{"c_e", *cfg.c_e}, {"e_exp_J", e.e_exp}, {"e_var_J2", e.e_var}};
    rows.emplace_back("c_e", fmt_short(*cfg.c_e));
    rows.emplace_back("e_exp [J]", fmt_short(e.e_exp));
    rows.emplace_back("e_var [J^2]", fmt_short(e.e_var));
  }

  const BillingStats at_opt = billing_stats(agg, rates, optimal_cb_general(agg, rates));
  const BillingStats adhoc = billing_stats(agg, rates, adhoc_quota(rn));
  const double saving = 1.0 - at_opt.b_min / adhoc.b_exp;
  report["billing"] = {{"rn_b", rn},
                       {"critical_fractile", critical_fractile(rates)},
                       {"c_b_opt_b", at_opt.c_b_opt},
                       {"b_min_usd", at_opt.b_min},
                       {"adhoc_c_b_b", adhoc_quota(rn)},
                       {"adhoc_b_exp_usd", adhoc.b_exp},
                       {"saving_vs_adhoc", saving}};
  rows.emplace_back("rn [b]", fmt_short(rn));
  rows.emplace_back("critical fractile", fmt_short(critical_fractile(rates)));
  rows.emplace_back("c_b_opt [b]", fmt_short(at_opt.c_b_opt));
  rows.emplace_back("b_min [$]", fmt_short(at_opt.b_min));
  rows.emplace_back("b_exp ad-hoc c_b=rn [$]", fmt_short(adhoc.b_exp));
  rows.emplace_back("saving vs ad-hoc", fmt_short(100.0 * saving) + " %");
  if (cfg.c_b) {
    const BillingStats at = billing_stats(agg, rates, *cfg.c_b);
    report["billing"]["c_b_b"] = *cfg.c_b;
    report["billing"]["b_exp_usd"] = at.b_exp;
    rows.emplace_back("c_b [b]", fmt_short(*cfg.c_b));
    rows.emplace_back("b_exp [$]", fmt_short(at.b_exp));
  }

  if (opts.json_stdout) {
    out << report.dump(2) << '\n';
  } else {
    out << "analysis\n";
    print_table(out, rows);
  }
  if (!opts.json_path.empty()) {
    Output file(opts.json_path, out);
    file.stream() << report.dump(2) << '\n';
    file.finish(opts.json_path);
  }
  return kExitOk;
}

int cmd_plan(const RunConfig& cfg, const CommonOptions& opts, std::ostream& out) {
  validate_common(cfg);
  const RateCard rates = rates_from(cfg);
  PlanTargets targets;
  targets.family = family_from(cfg);
  targets.alpha = cfg.alpha;
  targets.e_mean = require_positive(cfg.e_mean, "targets.e_mean");
  targets.e_updev = require(cfg.e_updev, "targets.e_updev");
  check_nonnegative(cfg.e_updev, "targets.e_updev");
  targets.b_mean = require_positive(cfg.b_mean, "targets.b_mean");

  const CouplingPlan p = plan(rates, targets);

  json report;
  report["family"] = to_string(targets.family);
  if (targets.alpha && targets.family == Family::Pareto) report["alpha"] = *targets.alpha;
  report["targets"] = {{"e_mean_J", targets.e_mean}, {"e_updev_J", targets.e_updev}, {"b_mean_usd", targets.b_mean}};
  report["r_b"] = p.r;
  report["c_e"] = p.c_e;
  report["n"] = p.devices.n;
  report["c_b_b"] = p.c_b;
  report["n_candidates"] = json::array();
  for (const auto& c : p.devices.candidates) {
    report["n_candidates"].push_back({{"n", c.count}, {"b_min_usd", c.b_min}, {"c_b_opt_b", c.c_b_opt}});
  }
  report["predicted"] = {{"e_exp_J", p.energy.e_exp},
                         {"e_var_J2", p.energy.e_var},
                         {"b_exp_usd", p.billing.b_exp},
                         {"b_min_usd", p.billing.b_min}};
  report["energy_solutions"] = json::array();
  for (const auto& s : p.energy_solutions) report["energy_solutions"].push_back({{"r_b", s.r}, {"c_e", s.c_e}});

  if (opts.json_stdout) {
    out << report.dump(2) << '\n';
  } else {
    out << "coupling plan (" << to_string(targets.family) << ")\n";
    std::vector<std::pair<std::string, std::string>> rows{
        {"r [b]", fmt_short(p.r)},
        {"c_e", fmt_short(p.c_e)},
        {"n", fmt_short(p.devices.n)},
        {"c_b [b]", fmt_short(p.c_b)},
        {"predicted e_exp [J]", fmt_short(p.energy.e_exp)},
        {"predicted e_var [J^2]", fmt_short(p.energy.e_var)},
        {"predicted b_min [$]", fmt_short(p.billing.b_min)},
    };
    for (const auto& c : p.devices.candidates) {
      rows.emplace_back("n=" + std::to_string(c.count) + " b_min [$]", fmt_short(c.b_min));
    }
    if (p.energy_solutions.size() > 1) {
      rows.emplace_back("energy solutions", std::to_string(p.energy_solutions.size()) + " (smallest c_e used)");
    }
    print_table(out, rows);
  }
  if (!opts.json_path.empty()) {
    Output file(opts.json_path, out);
    file.stream() << report.dump(2) << '\n';
    file.finish(opts.json_path);
  }
  return kExitOk;
}

struct SweepOptions {
  std::string vary;
  std::string metric;
  std::string grid;
  bool grid_relative = false;
  unsigned threads = 0;
  std::string trace_path;
  std::size_t trace_cap = 1000;
};

struct ResolvedSweep {
  SweepVariable vary;
  Metric metric;
  std::vector<double> grid;
};

ResolvedSweep resolve_sweep(const SweepOptions& s, const RunConfig& cfg, const VolumeModel& device, std::size_t n,
                            bool grid_required) {
  ResolvedSweep out{};
  try {
    out.vary = parse_sweep_variable(s.vary.empty() ? "c_e" : s.vary);
    out.metric = s.metric.empty() ? (out.vary == SweepVariable::IdleThreshold ? Metric::EnergyMean : Metric::Billing)
                                  : parse_metric(s.metric);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if ((out.metric == Metric::Billing) != (out.vary == SweepVariable::Quota)) {
    throw UsageError("metric " + std::string(to_string(out.metric)) + " does not vary with " +
                     std::string(to_string(out.vary)));
  }
  if (!s.grid.empty()) {
    out.grid = parse_grid(s.grid);
  } else if (!grid_required) {
    const auto& fixed = out.vary == SweepVariable::IdleThreshold ? cfg.c_e : cfg.c_b;
    out.grid.push_back(require(fixed, out.vary == SweepVariable::IdleThreshold ? "thresholds.c_e (or --grid)"
                                                                               : "thresholds.c_b (or --grid)"));
  }
  if (out.grid.empty()) throw UsageError("sweep grid is empty");
  if (s.grid_relative && out.vary == SweepVariable::Quota) {
    for (double& x : out.grid) x *= device.mean() * static_cast<double>(n);
  }
  return out;
}

int cmd_sweep(const RunConfig& cfg, const CommonOptions& opts, const SweepOptions& s, std::ostream& out) {
  validate_common(cfg);
  SweepSpec spec;
  spec.rates = rates_from(cfg);
  spec.device = device_model_from(cfg);
  spec.n_devices = devices_from(cfg);
  const ResolvedSweep rs = resolve_sweep(s, cfg, spec.device, spec.n_devices, true);
  spec.vary = rs.vary;
  spec.metric = rs.metric;
  spec.grid = rs.grid;
  spec.c_e = cfg.c_e.value_or(1.0);
  spec.c_b = cfg.c_b.value_or(0.0);

  const std::vector<SweepPoint> points = sweep(spec);
  std::vector<double> x;
  std::vector<std::optional<double>> analytic;
  std::vector<std::optional<double>> empirical;
  std::vector<std::string> errors;
  for (const auto& p : points) {
    x.push_back(p.x);
    analytic.push_back(p.value);
    empirical.push_back(std::nullopt);
    errors.push_back(p.error);
  }

  std::string description = model_description(spec.device);
  if (rs.vary == SweepVariable::Quota) description += " n=" + std::to_string(spec.n_devices);
  Output file(opts.out_path, out);
  write_curve_csv(file.stream(), cfg.seed.value_or(kDefaultSeed), rs.vary, rs.metric, description, x, analytic,
                  empirical, errors, std::nan(""));
  file.finish(opts.out_path);
  return kExitOk;
}

void write_trace(const std::string& path, const SimResult& res) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open trace file '" + path + "'");
  f << "interval,device_volume_b,aggregate_volume_b,energy_J,var_term_J2,billing_usd\n";
  for (const auto& rec : res.trace) {
    f << rec.interval << ',' << fmt(rec.device_volume) << ',' << fmt(rec.aggregate_volume) << ',' << fmt(rec.energy)
      << ',' << fmt(rec.var_term) << ',' << fmt(rec.billing) << '\n';
  }
  if (!f) throw UsageError("failed writing trace file '" + path + "'");
}

int cmd_simulate(const RunConfig& cfg, const CommonOptions& opts, const SweepOptions& s, std::ostream& out) {
  validate_common(cfg);
  SimConfig sim;
  sim.rates = rates_from(cfg);
  sim.device_model = device_model_from(cfg);
  sim.n_devices = devices_from(cfg);
  sim.aggregate_mode = cfg.aggregate_mode ? parse_aggregate_mode(*cfg.aggregate_mode) : AggregateMode::Modeled;
  sim.n_intervals = cfg.intervals ? static_cast<std::size_t>(*cfg.intervals) : kDefaultIntervals;
  sim.seed = cfg.seed.value_or(kDefaultSeed);
  sim.c_e = cfg.c_e.value_or(1.0);
  const VolumeModel agg = aggregate_modeled(sim.device_model, sim.n_devices);
  sim.c_b = cfg.c_b.value_or(optimal_cb_general(agg, sim.rates));

  const ResolvedSweep rs = resolve_sweep(s, cfg, sim.device_model, sim.n_devices, false);
  const Validation v = validate_sweep(sim, rs.vary, rs.metric, rs.grid, s.threads);

  std::vector<std::optional<double>> analytic;
  std::vector<std::optional<double>> empirical;
  for (std::size_t i = 0; i < v.x.size(); ++i) {
    const bool ok = v.errors[i].empty();
    analytic.push_back(ok ? std::optional<double>(v.analytic[i]) : std::nullopt);
    empirical.push_back(ok ? std::optional<double>(v.empirical[i]) : std::nullopt);
  }

  std::string description = model_description(sim.device_model) + " n=" + std::to_string(sim.n_devices) +
                            " aggregate=" + std::string(to_string(sim.aggregate_mode)) +
                            " intervals=" + std::to_string(sim.n_intervals);
  Output file(opts.out_path, out);
  write_curve_csv(file.stream(), sim.seed, rs.vary, rs.metric, description, v.x, analytic, empirical, v.errors, v.r2);
  file.finish(opts.out_path);

  if (!s.trace_path.empty()) {
    SimConfig traced = sim;
    traced.trace_capacity = s.trace_cap;
    write_trace(s.trace_path, run(traced));
  }
  return kExitOk;
}

struct FitOptions {
  std::string log_path;
  std::string name;
  std::vector<std::string> families;
};

int cmd_fit(const FitOptions& f, const CommonOptions& opts, std::ostream& out) {
  if (f.log_path.empty()) throw UsageError("fit needs --log <file>");
  VolumeLog log;
  try {
    log = load_volume_log(f.log_path);
  } catch (const ParseError& e) {
    throw UsageError(f.log_path + ": " + e.what());
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }

  std::vector<Family> families;
  for (const auto& name : f.families) {
    try {
      families.push_back(parse_family(name));
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  const FitResult fit = fit_model(log, families);

  json model;
  model["family"] = to_string(fit.model.family());
  model["r"] = fit.model.mean();
  model["alpha"] = fit.model.family() == Family::Pareto ? json(fit.model.alpha()) : json(nullptr);
  model["interval_seconds"] = log.interval_seconds;
  model["samples"] = log.volumes.size();
  model["log_likelihoods"] = json::object();
  for (const auto& c : fit.candidates) {
    model["log_likelihoods"][std::string(to_string(c.family))] = number_or_null(c.log_likelihood);
  }
  model["warnings"] = fit.warnings;

  const std::string name = f.name.empty() ? std::filesystem::path(f.log_path).stem().string() : f.name;
  {
    Output file(name + ".model.json", out);
    file.stream() << model.dump(2) << '\n';
    file.finish(name + ".model.json");
  }
  {
    Output file(name + ".hist.csv", out);
    auto& os = file.stream();
    os << "bin_lo,bin_hi,probability\n";
    for (std::size_t i = 0; i < fit.histogram.bins(); ++i) {
      os << fmt(fit.histogram.edges[i]) << ',' << fmt(fit.histogram.edges[i + 1]) << ','
         << fmt(fit.histogram.probability[i]) << '\n';
    }
    file.finish(name + ".hist.csv");
  }

  if (opts.json_stdout) {
    out << model.dump(2) << '\n';
  } else {
    out << "fit of " << log.volumes.size() << " intervals (T=" << fmt_short(log.interval_seconds) << " s)\n";
    std::vector<std::pair<std::string, std::string>> rows{{"family", std::string(to_string(fit.model.family()))},
                                                          {"r [b]", fmt_short(fit.model.mean())}};
    if (fit.model.family() == Family::Pareto) rows.emplace_back("alpha", fmt_short(fit.model.alpha()));
    for (const auto& c : fit.candidates) {
      rows.emplace_back("loglik " + std::string(to_string(c.family)),
                        c.admissible ? fmt_short(c.log_likelihood) : "excluded (" + c.note + ")");
    }
    rows.emplace_back("outputs", name + ".model.json, " + name + ".hist.csv");
    print_table(out, rows);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- wiring

// Registers a flag that, when given, overwrites a RunConfig field.
class Overrides {
 public:
  void number(CLI::App* app, const std::string& flag, std::optional<double> RunConfig::*field, const std::string& help) {
    auto holder = std::make_shared<double>();
    CLI::Option* opt = app->add_option(flag, *holder, help);
    apply_.push_back([=](RunConfig& cfg) {
      if (opt->count() > 0) cfg.*field = *holder;
    });
  }
  void integer(CLI::App* app, const std::string& flag, std::optional<std::int64_t> RunConfig::*field,
               const std::string& help) {
    auto holder = std::make_shared<std::int64_t>();
    CLI::Option* opt = app->add_option(flag, *holder, help);
    apply_.push_back([=](RunConfig& cfg) {
      if (opt->count() > 0) cfg.*field = *holder;
    });
  }
  void text(CLI::App* app, const std::string& flag, std::optional<std::string> RunConfig::*field,
            const std::string& help) {
    auto holder = std::make_shared<std::string>();
    CLI::Option* opt = app->add_option(flag, *holder, help);
    apply_.push_back([=](RunConfig& cfg) {
      if (opt->count() > 0) cfg.*field = *holder;
    });
  }
  void seed(CLI::App* app) {
    auto holder = std::make_shared<std::uint64_t>();
    CLI::Option* opt = app->add_option("--seed", *holder, "RNG seed (echoed in CSV headers)");
    apply_.push_back([=](RunConfig& cfg) {
      if (opt->count() > 0) cfg.seed = *holder;
    });
  }
  void apply(RunConfig& cfg) const {
    for (const auto& f : apply_) f(cfg);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

void add_model_flags(CLI::App* app, Overrides& ov, CommonOptions& common, bool thresholds, bool targets, bool sim) {
  app->add_option("-c,--config", common.config_path, "JSON config file; flags override its values");
  ov.number(app, "--g-e", &RunConfig::g_e, "Active energy rate [J/b]");
  ov.number(app, "--i-e", &RunConfig::i_e, "Idle energy rate [J/b]");
  ov.number(app, "--g-b", &RunConfig::g_b, "Transfer/storage billing rate [$/b]");
  ov.number(app, "--i-b", &RunConfig::i_b, "Idle billing rate [$/b]");
  ov.number(app, "--p-b", &RunConfig::p_b, "Active billing rate [$/b]");
  ov.text(app, "--family", &RunConfig::family, "uniform|pareto|exponential|fixed");
  ov.number(app, "--r", &RunConfig::r, "Mean per-device query volume [b]");
  ov.number(app, "--alpha", &RunConfig::alpha, "Pareto shape (> 2)");
  ov.integer(app, "-n,--n-devices", &RunConfig::n_devices, "Devices per aggregator");
  if (thresholds) {
    ov.number(app, "--c-e", &RunConfig::c_e, "Idle threshold (multiple of r)");
    ov.number(app, "--c-b", &RunConfig::c_b, "Autoscaling quota [b]");
  }
  if (targets) {
    ov.number(app, "--e-mean", &RunConfig::e_mean, "Target mean energy [J]");
    ov.number(app, "--e-updev", &RunConfig::e_updev, "Target upper-side energy deviation [J]");
    ov.number(app, "--b-mean", &RunConfig::b_mean, "Target billing per interval [$]");
  }
  if (sim) {
    ov.integer(app, "--intervals", &RunConfig::intervals, "Monitoring intervals per grid point");
    ov.text(app, "--aggregate-mode", &RunConfig::aggregate_mode, "modeled|summed");
  }
  ov.seed(app);
}

void add_sweep_flags(CLI::App* app, SweepOptions& s, CommonOptions& common) {
  app->add_option("--vary", s.vary, "Swept variable: c_e|c_b");
  app->add_option("--metric", s.metric, "e_exp|e_var (c_e sweeps) or b_exp (c_b sweeps)");
  app->add_option("--grid", s.grid, "Grid as lo:hi:count or a comma-separated list");
  app->add_flag("--grid-relative", s.grid_relative, "c_b grid values are multiples of r*n");
  app->add_option("-o,--out", common.out_path, "CSV output path (default stdout)");
}

}  // namespace

const char* version() noexcept { return COSTPLAN_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy and cloud-billing cost planner for IoT query processing", kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + version());
  app.require_subcommand(1);

  CommonOptions common;
  Overrides overrides;
  SweepOptions sweep_opts;
  FitOptions fit_opts;

  CLI::App* analyze = app.add_subcommand("analyze", "Evaluate energy and billing for a model and thresholds");
  add_model_flags(analyze, overrides, common, true, false, false);
  analyze->add_flag("--json", common.json_stdout, "Print the report as JSON instead of a table");
  analyze->add_option("--json-out", common.json_path, "Also write the JSON report to this path");

  CLI::App* plan_cmd = app.add_subcommand("plan", "Solve (r, c_e, c_b, n) for energy and billing targets");
  add_model_flags(plan_cmd, overrides, common, false, true, false);
  plan_cmd->add_flag("--json", common.json_stdout, "Print the plan as JSON instead of a table");
  plan_cmd->add_option("--json-out", common.json_path, "Also write the JSON plan to this path");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Analytic curve of a metric over a c_e or c_b grid (CSV)");
  add_model_flags(sweep_cmd, overrides, common, true, false, false);
  add_sweep_flags(sweep_cmd, sweep_opts, common);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimates against the analytic curve (CSV + R^2)");
  add_model_flags(simulate, overrides, common, true, false, true);
  add_sweep_flags(simulate, sweep_opts, common);
  simulate->add_option("--threads", sweep_opts.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--trace", sweep_opts.trace_path, "Write a per-interval trace of one run here");
  simulate->add_option("--trace-cap", sweep_opts.trace_cap, "Intervals kept in the trace (most recent)");

  CLI::App* fit = app.add_subcommand("fit", "Fit a volume model to a per-interval log");
  fit->add_option("--log", fit_opts.log_path, "CSV log: interval_seconds,volume_bits")->required();
  fit->add_option("--name", fit_opts.name, "Output prefix for <name>.model.json and <name>.hist.csv");
  fit->add_option("--families", fit_opts.families, "Candidate families (default uniform exponential pareto)");
  fit->add_flag("--json", common.json_stdout, "Print the fitted model as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolName << ' ' << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << kToolName << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    RunConfig cfg;
    if (!common.config_path.empty()) cfg = load_config(common.config_path);
    overrides.apply(cfg);

    if (analyze->parsed()) return cmd_analyze(cfg, common, out);
    if (plan_cmd->parsed()) return cmd_plan(cfg, common, out);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, common, sweep_opts, out);
    if (simulate->parsed()) return cmd_simulate(cfg, common, sweep_opts, out);
    if (fit->parsed()) return cmd_fit(fit_opts, common, out);
  } catch (const UsageError& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kExitModel;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace costplan::cli
