#include "evtv/io_report.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "evtv/errors.hpp"

namespace evtv {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

constexpr std::array<std::string_view, 5> kCohortColumns = {"l0", "a0", "l1", "a1", "y"};

template <class T>
T required(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw InputError(std::string("report JSON: missing key '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("report JSON: bad value for '") + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> optional_key(const Json& obj, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  return required<T>(obj, key);
}

Json curve_to_json(const std::vector<TradeoffPoint>& points) {
  Json arr = Json::array();
  for (const auto& p : points) {
    arr.push_back({{"strength_t0", p.strength_t0}, {"strength_t1", p.strength_t1}, {"b0", p.b0}, {"b1", p.b1}});
  }
  return arr;
}

std::vector<TradeoffPoint> curve_from_json(const Json& arr) {
  if (!arr.is_array()) throw InputError("report JSON: curve must be an array");
  std::vector<TradeoffPoint> out;
  for (const auto& p : arr) {
    out.push_back({required<double>(p, "strength_t0"), required<double>(p, "strength_t1"),
                   required<double>(p, "b0"), required<double>(p, "b1")});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

CohortCsv read_cohort_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw EmptyFile("cohort CSV is empty");

  std::array<std::size_t, 5> index{};
  std::array<bool, 5> found{};
  CohortCsv result;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = lowercase(header[c]);
    const auto it = std::find(kCohortColumns.begin(), kCohortColumns.end(), name);
    if (it == kCohortColumns.end()) {
      result.ignored_columns.push_back(header[c]);
      continue;
    }
    const auto k = static_cast<std::size_t>(it - kCohortColumns.begin());
    if (found[k]) throw InputError("cohort CSV: duplicate column '" + name + "'");
    found[k] = true;
    index[k] = c;
  }
  std::string missing;
  for (std::size_t k = 0; k < kCohortColumns.size(); ++k) {
    if (!found[k]) missing += (missing.empty() ? "" : ", ") + std::string(kCohortColumns[k]);
  }
  if (!missing.empty()) throw MissingColumn("cohort CSV: missing column(s): " + missing);

  const std::size_t needed = *std::max_element(index.begin(), index.end()) + 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < needed) {
      throw InputError("cohort CSV: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                       " fields, expected at least " + std::to_string(needed));
    }
    std::array<std::uint8_t, 5> v{};
    for (std::size_t k = 0; k < kCohortColumns.size(); ++k) {
      const std::string& cell = fields[index[k]];
      if (cell != "0" && cell != "1") {
        throw NonBinaryValue("cohort CSV: non-binary value '" + cell + "' in column " +
                                 std::string(kCohortColumns[k]) + " at row " + std::to_string(line_no),
                             line_no);
      }
      v[k] = cell == "1" ? 1 : 0;
    }
    result.records.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  if (result.records.empty()) throw EmptyFile("cohort CSV has a header but no data rows");
  return result;
}

CohortCsv read_cohort_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open cohort file '" + path.string() + "'");
  return read_cohort_csv(in);
}

void write_cohort_csv(std::ostream& out, std::span<const CohortRecord> cohort) {
  out << "l0,a0,l1,a1,y\n";
  for (const auto& r : cohort) {
    out << int{r.l0} << ',' << int{r.a0} << ',' << int{r.l1} << ',' << int{r.a1} << ',' << int{r.y} << '\n';
  }
}

// ---------------------------------------------------------------------------

Json report_to_json(const EValueReport& report, std::string_view tool_version) {
  Json input;
  input["measure"] = std::string(to_string(report.input.measure));
  input["value"] = report.input.value;
  if (report.input.ci_lower) input["ci_lower"] = *report.input.ci_lower;
  if (report.input.ci_upper) input["ci_upper"] = *report.input.ci_upper;
  input["outcome_rare"] = report.input.outcome_rare;

  Json doc;
  doc["input"] = std::move(input);
  doc["timepoints"] = report.timepoints;
  doc["normalized_rr"] = report.normalized.rr;
  doc["inverted"] = report.normalized.inverted;
  doc["evalue_equal_split"] = report.evalue_equal_split;
  doc["evalue_single"] = report.evalue_single_timepoint;
  if (report.ci_evalue_equal_split) doc["ci_evalue_equal_split"] = *report.ci_evalue_equal_split;
  if (report.ci_evalue_single_timepoint) doc["ci_evalue_single"] = *report.ci_evalue_single_timepoint;
  if (report.normalized.ci_limit_rr) {
    doc["ci_limit_rr"] = *report.normalized.ci_limit_rr;
    doc["ci_crosses_null"] = report.normalized.ci_crosses_null;
  }
  if (!report.curve.empty()) doc["curve"] = curve_to_json(report.curve);
  if (!report.ci_curve.empty()) doc["ci_curve"] = curve_to_json(report.ci_curve);
  doc["tool_version"] = std::string(tool_version);
  return doc;
}

EValueReport report_from_json(const Json& doc) {
  EValueReport r;
  if (!doc.is_object() || !doc.contains("input")) throw InputError("report JSON: missing key 'input'");
  const Json& input = doc.at("input");
  const auto measure = parse_measure(required<std::string>(input, "measure"));
  if (!measure) throw InputError("report JSON: unknown measure");
  r.input.measure = *measure;
  r.input.value = required<double>(input, "value");
  r.input.ci_lower = optional_key<double>(input, "ci_lower");
  r.input.ci_upper = optional_key<double>(input, "ci_upper");
  r.input.outcome_rare = required<bool>(input, "outcome_rare");

  r.timepoints = required<int>(doc, "timepoints");
  r.normalized.rr = required<double>(doc, "normalized_rr");
  r.normalized.inverted = required<bool>(doc, "inverted");
  r.evalue_equal_split = required<double>(doc, "evalue_equal_split");
  r.evalue_single_timepoint = required<double>(doc, "evalue_single");
  r.ci_evalue_equal_split = optional_key<double>(doc, "ci_evalue_equal_split");
  r.ci_evalue_single_timepoint = optional_key<double>(doc, "ci_evalue_single");
  r.normalized.ci_limit_rr = optional_key<double>(doc, "ci_limit_rr");
  r.normalized.ci_crosses_null = optional_key<bool>(doc, "ci_crosses_null").value_or(false);
  if (doc.contains("curve")) r.curve = curve_from_json(doc.at("curve"));
  if (doc.contains("ci_curve")) r.ci_curve = curve_from_json(doc.at("ci_curve"));
  return r;
}

std::string write_report_json(const EValueReport& report, std::string_view tool_version) {
  return report_to_json(report, tool_version).dump(2) + "\n";
}

EValueReport parse_report_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("report JSON: ") + e.what());
  }
  return report_from_json(doc);
}

Json msm_to_json(const MsmResult& msm) {
  Json j;
  j["rr_obs"] = msm.rr_obs;
  j["p11"] = msm.p11;
  j["p00"] = msm.p00;
  j["weight_mean"] = msm.weight_mean;
  j["weight_max"] = msm.weight_max;
  if (msm.ci_lower) j["ci_lower"] = *msm.ci_lower;
  if (msm.ci_upper) j["ci_upper"] = *msm.ci_upper;
  j["coefficients"] = msm.coefficients;
  j["separation"] = msm.separation;
  j["warnings"] = msm.warnings;
  return j;
}

Json experiment_to_json(const ExperimentRecord& record) {
  Json j;
  j["seed"] = record.seed;
  j["n"] = record.n;
  j["rr_true"] = record.rr_true;
  j["rr_obs"] = record.msm.rr_obs;
  if (record.bootstrap) {
    j["ci_lower"] = record.bootstrap->ci_lower;
    j["ci_upper"] = record.bootstrap->ci_upper;
    j["bootstrap"] = {{"successful", record.bootstrap->successful}, {"failed", record.bootstrap->failed}};
  }
  j["msm"] = msm_to_json(record.msm);
  j["report"] = report_to_json(record.report);
  return j;
}

Json params_to_json(const SimulationParams& params) {
  Json j;
  for (const auto& name : param_names()) j[name] = get_param(params, name);
  j["n"] = params.n;
  return j;
}

// ---------------------------------------------------------------------------

std::string_view to_string(CurveTarget t) {
  return t == CurveTarget::PointEstimate ? "point_estimate" : "ci_limit";
}

CurveDocument make_curve_document(double target_rr, CurveTarget label, std::size_t n_points) {
  CurveDocument doc;
  doc.target_rr = target_rr;
  doc.target_label = label;
  doc.axis_max = evalue_from_rr(target_rr);
  if (doc.axis_max <= 1.0) {
    doc.points = {TradeoffPoint{}};
  } else {
    doc.points = tradeoff_curve(target_rr, n_points);
  }
  return doc;
}

std::string format_full(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::string curve_csv(const CurveDocument& doc) {
  std::ostringstream out;
  out << "strength_t0,strength_t1,b0,b1\n";
  for (const auto& p : doc.points) {
    out << format_full(p.strength_t0) << ',' << format_full(p.strength_t1) << ',' << format_full(p.b0) << ','
        << format_full(p.b1) << '\n';
  }
  return out.str();
}

std::string write_curve(const CurveDocument& doc, CurveFormat format) {
  return format == CurveFormat::Csv ? curve_csv(doc) : curve_svg(doc);
}

}  // namespace evtv
