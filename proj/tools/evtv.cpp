// evtv: E-values for time-varying treatments, plus the MSM estimation and
// simulation pipeline that backs them.
//
// Exit codes: 0 success, 2 invalid input, 3 estimation failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evtv/errors.hpp"
#include "evtv/estimation.hpp"
#include "evtv/evalue.hpp"
#include "evtv/io_report.hpp"
#include "evtv/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;

constexpr std::uint64_t kReferenceSeed = 7;

struct EstimateFlags {
  std::string measure = "rr";
  double value = 0.0;
  std::optional<double> lo;
  std::optional<double> hi;
  bool rare = false;
};

struct Config {
  std::string out;
  std::optional<std::uint64_t> seed;

  EstimateFlags estimate;
  int timepoints = 2;
  std::size_t curve_points = 0;
  bool table = false;

  std::optional<double> curve_rr;
  std::optional<double> curve_limit;
  std::size_t points = evtv::kDefaultCurvePoints;
  std::string format = "csv";

  std::size_t n = 1000;
  std::size_t bootstrap = 1000;
  std::size_t reps = 1;
  std::vector<std::string> params;
  std::string export_cohort;
  unsigned threads = 0;

  std::string input;
};

std::uint64_t resolve_seed(const Config& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("EVTV_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw evtv::DomainError(std::string("EVTV_SEED is not an unsigned integer: '") + env + "'");
  }
  return kReferenceSeed;
}

void emit(const Config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw evtv::InputError("cannot write '" + cfg.out + "'");
  f << text;
}

evtv::EffectEstimate to_estimate(const EstimateFlags& f) {
  const auto measure = evtv::parse_measure(f.measure);
  if (!measure) throw evtv::DomainError("--measure must be one of rr, or, hr");
  if (f.lo.has_value() != f.hi.has_value()) throw evtv::DomainError("--lo and --hi must be given together");
  return {*measure, f.value, f.lo, f.hi, f.rare};
}

void validate_bootstrap(std::size_t b) {
  if (b != 0 && b < 100) throw evtv::DomainError("--bootstrap must be 0 (off) or >= 100");
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string report_table(const evtv::EValueReport& r) {
  std::ostringstream out;
  out << "measure            " << evtv::to_string(r.input.measure) << " " << fixed2(r.input.value);
  if (r.input.has_ci()) out << " (" << fixed2(*r.input.ci_lower) << ", " << fixed2(*r.input.ci_upper) << ")";
  out << "\nnormalized RR      " << fixed2(r.normalized.rr) << (r.normalized.inverted ? " (inverted)" : "")
      << "\ntime points        " << r.timepoints << "\nE-value equal      " << fixed2(r.evalue_equal_split)
      << "\nE-value single     " << fixed2(r.evalue_single_timepoint) << "\n";
  if (r.ci_evalue_equal_split) out << "CI E-value equal   " << fixed2(*r.ci_evalue_equal_split) << "\n";
  if (r.ci_evalue_single_timepoint) out << "CI E-value single  " << fixed2(*r.ci_evalue_single_timepoint) << "\n";
  return out.str();
}

int cmd_evalue(const Config& cfg) {
  const auto report = evtv::build_report(to_estimate(cfg.estimate), cfg.timepoints, cfg.curve_points);
  emit(cfg, cfg.table ? report_table(report) : evtv::write_report_json(report));
  return kExitOk;
}

int cmd_convert(const Config& cfg) {
  const auto estimate = to_estimate(cfg.estimate);
  const auto n = evtv::normalize_estimate(estimate);
  evtv::Json doc;
  doc["input"] = evtv::report_to_json(evtv::build_report(estimate, 1))["input"];
  doc["normalized_rr"] = n.rr;
  doc["inverted"] = n.inverted;
  if (n.ci_limit_rr) {
    doc["ci_limit_rr"] = *n.ci_limit_rr;
    doc["ci_crosses_null"] = n.ci_crosses_null;
  }
  doc["tool_version"] = std::string(evtv::kToolVersion);
  emit(cfg, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_curve(const Config& cfg) {
  const bool limit = cfg.curve_limit.has_value();
  const double target = limit ? *cfg.curve_limit : *cfg.curve_rr;
  const auto doc = evtv::make_curve_document(
      target, limit ? evtv::CurveTarget::CiLimit : evtv::CurveTarget::PointEstimate, cfg.points);
  emit(cfg, evtv::write_curve(doc, cfg.format == "svg" ? evtv::CurveFormat::Svg : evtv::CurveFormat::Csv));
  return kExitOk;
}

evtv::SimulationParams simulation_params(const Config& cfg) {
  evtv::SimulationParams params;
  params.n = cfg.n;
  for (const auto& kv : cfg.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw evtv::DomainError("--param expects name=value, got '" + kv + "'");
    const std::string name = kv.substr(0, eq);
    const std::string text = kv.substr(eq + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) throw evtv::DomainError("--param " + name + ": not a number: '" + text + "'");
    evtv::set_param(params, name, value);
  }
  params.validate();
  return params;
}

int cmd_simulate(const Config& cfg) {
  const auto params = simulation_params(cfg);
  validate_bootstrap(cfg.bootstrap);
  const std::uint64_t seed = resolve_seed(cfg);
  evtv::ExperimentOptions options;
  options.bootstrap_replicates = cfg.bootstrap;
  options.curve_points = cfg.curve_points;
  options.threads = cfg.threads;

  if (cfg.reps <= 1) {
    if (!cfg.export_cohort.empty()) {
      std::ofstream f(cfg.export_cohort, std::ios::binary);
      if (!f) throw evtv::InputError("cannot write '" + cfg.export_cohort + "'");
      evtv::write_cohort_csv(f, evtv::generate_cohort(params, seed).records);
    }
    const auto record = evtv::run_experiment(params, seed, options);
    for (const auto& w : record.msm.warnings) std::cerr << "warning: " << w << "\n";
    emit(cfg, evtv::experiment_to_json(record).dump(2) + "\n");
    return kExitOk;
  }

  if (!cfg.export_cohort.empty()) throw evtv::DomainError("--export-cohort requires --reps 1");
  const auto study = evtv::run_replications(params, seed, cfg.reps, options);
  auto summary = [](const evtv::SampleSummary& s) {
    return evtv::Json{{"mean", s.mean}, {"sd", s.sd}, {"se", s.se}, {"q025", s.q025}, {"q975", s.q975}};
  };
  evtv::Json doc;
  doc["seed"] = seed;
  doc["replications"] = cfg.reps;
  doc["params"] = evtv::params_to_json(params);
  doc["oracle"] = {{"true_rr_intervened_l1", study.oracle_intervened},
                   {"true_rr_realized_l1", study.oracle_realized}};
  doc["summary"] = {{"rr_true", summary(study.rr_true)},
                    {"rr_obs", summary(study.rr_obs)},
                    {"weight_mean", summary(study.weight_mean)}};
  evtv::Json records = evtv::Json::array();
  for (const auto& r : study.records) records.push_back(evtv::experiment_to_json(r));
  doc["records"] = std::move(records);
  emit(cfg, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_analyze(const Config& cfg) {
  validate_bootstrap(cfg.bootstrap);
  const std::uint64_t seed = resolve_seed(cfg);
  const auto csv = evtv::read_cohort_csv(std::filesystem::path(cfg.input));
  if (!csv.ignored_columns.empty()) {
    std::cerr << "warning: ignoring column(s):";
    for (const auto& c : csv.ignored_columns) std::cerr << " " << c;
    std::cerr << "\n";
  }

  evtv::MsmResult msm = evtv::estimate_msm(csv.records);
  evtv::EffectEstimate estimate{evtv::Measure::RR, msm.rr_obs, std::nullopt, std::nullopt, false};
  std::optional<evtv::BootstrapResult> boot;
  if (cfg.bootstrap > 0) {
    evtv::BootstrapOptions bo;
    bo.replicates = cfg.bootstrap;
    bo.seed = seed;
    bo.threads = cfg.threads;
    boot = evtv::bootstrap_ci(csv.records, bo);
    msm.ci_lower = boot->ci_lower;
    msm.ci_upper = boot->ci_upper;
    estimate.ci_lower = std::min(boot->ci_lower, msm.rr_obs);
    estimate.ci_upper = std::max(boot->ci_upper, msm.rr_obs);
  }
  for (const auto& w : msm.warnings) std::cerr << "warning: " << w << "\n";
  const auto report = evtv::build_report(estimate, cfg.timepoints, cfg.curve_points);

  evtv::Json doc;
  doc["seed"] = seed;
  doc["n"] = csv.records.size();
  doc["rr_obs"] = msm.rr_obs;
  if (boot) {
    doc["ci_lower"] = boot->ci_lower;
    doc["ci_upper"] = boot->ci_upper;
    doc["bootstrap"] = {{"successful", boot->successful}, {"failed", boot->failed}};
  }
  doc["ignored_columns"] = csv.ignored_columns;
  doc["msm"] = evtv::msm_to_json(msm);
  doc["report"] = evtv::report_to_json(report);
  emit(cfg, doc.dump(2) + "\n");
  return kExitOk;
}

void add_estimate_flags(CLI::App* cmd, EstimateFlags& f) {
  cmd->add_option("--measure", f.measure, "Effect measure: rr, or, hr")->check(CLI::IsMember({"rr", "or", "hr"}, CLI::ignore_case));
  cmd->add_option("--value", f.value, "Point estimate")->required();
  cmd->add_option("--lo", f.lo, "Lower confidence limit");
  cmd->add_option("--hi", f.hi, "Upper confidence limit");
  cmd->add_flag("--rare", f.rare, "Outcome prevalence below 15%: use OR/HR directly as RR");
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"E-values for time-varying treatments and confounders"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(evtv::kToolVersion));

  auto* evalue = app.add_subcommand("evalue", "E-values for an observed estimate");
  add_estimate_flags(evalue, cfg.estimate);
  evalue->add_option("--timepoints", cfg.timepoints, "Number of time points")->check(CLI::PositiveNumber);
  evalue->add_option("--curve", cfg.curve_points, "Trade-off curve points (T = 2 only)");
  evalue->add_flag("--table", cfg.table, "Human-readable summary rounded to 2 decimals");
  evalue->add_option("--out", cfg.out, "Write output to PATH instead of stdout");

  auto* convert = app.add_subcommand("convert", "Normalize an estimate to the risk-ratio scale");
  add_estimate_flags(convert, cfg.estimate);
  convert->add_option("--out", cfg.out, "Write output to PATH instead of stdout");

  auto* curve = app.add_subcommand("curve", "Trade-off curve between the two time points");
  auto* rr_opt = curve->add_option("--rr", cfg.curve_rr, "Target risk ratio (point estimate)");
  auto* limit_opt = curve->add_option("--limit", cfg.curve_limit, "Target confidence limit");
  rr_opt->excludes(limit_opt);
  limit_opt->excludes(rr_opt);
  curve->add_option("--points", cfg.points, "Grid size")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  curve->add_option("--format", cfg.format, "csv or svg")->check(CLI::IsMember({"csv", "svg"}));
  curve->add_option("--out", cfg.out, "Write output to PATH instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "Run the simulation study");
  simulate->add_option("--n", cfg.n, "Cohort size");
  simulate->add_option("--seed", cfg.seed, "Seed (default: $EVTV_SEED, else 7)");
  simulate->add_option("--bootstrap", cfg.bootstrap, "Bootstrap replicates (0 = off)");
  simulate->add_option("--reps", cfg.reps, "Independent replications")->check(CLI::PositiveNumber);
  simulate->add_option("--param", cfg.params, "Coefficient override name=value (repeatable)");
  simulate->add_option("--export-cohort", cfg.export_cohort, "Write the observed cohort CSV (reps = 1)");
  simulate->add_option("--curve", cfg.curve_points, "Trade-off curve points in the report");
  simulate->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--out", cfg.out, "Write output to PATH instead of stdout");

  auto* analyze = app.add_subcommand("analyze", "Estimate and E-values for an observed cohort CSV");
  analyze->add_option("--input", cfg.input, "Cohort CSV with columns l0,a0,l1,a1,y")->required();
  analyze->add_option("--bootstrap", cfg.bootstrap, "Bootstrap replicates (0 = off)");
  analyze->add_option("--seed", cfg.seed, "Bootstrap seed (default: $EVTV_SEED, else 7)");
  analyze->add_option("--timepoints", cfg.timepoints, "Number of time points")->check(CLI::PositiveNumber);
  analyze->add_option("--curve", cfg.curve_points, "Trade-off curve points (T = 2 only)");
  analyze->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  analyze->add_option("--out", cfg.out, "Write output to PATH instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  if (curve->parsed() && !cfg.curve_rr && !cfg.curve_limit) {
    std::cerr << "error: curve needs --rr or --limit\n";
    return kExitInput;
  }

  try {
    if (evalue->parsed()) return cmd_evalue(cfg);
    if (convert->parsed()) return cmd_convert(cfg);
    if (curve->parsed()) return cmd_curve(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (analyze->parsed()) return cmd_analyze(cfg);
  } catch (const evtv::EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const evtv::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const evtv::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitInput;
}
