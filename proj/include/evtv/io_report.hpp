#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evtv/estimation.hpp"
#include "evtv/evalue.hpp"
#include "evtv/simulation.hpp"

namespace evtv {

#ifdef EVTV_VERSION
inline constexpr std::string_view kToolVersion = EVTV_VERSION;
#else
inline constexpr std::string_view kToolVersion = "0.0.0";
#endif

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Cohort CSV: header l0,a0,l1,a1,y in any order and case; cells 0/1.
// ---------------------------------------------------------------------------

struct CohortCsv {
  Cohort records;
  // Columns present in the header but not used.
  std::vector<std::string> ignored_columns;
};

// Throws MissingColumn, NonBinaryValue (1-based line number, header = 1) or
// EmptyFile.
CohortCsv read_cohort_csv(std::istream& in);
CohortCsv read_cohort_csv(const std::filesystem::path& path);

void write_cohort_csv(std::ostream& out, std::span<const CohortRecord> cohort);

// ---------------------------------------------------------------------------
// Report JSON
// ---------------------------------------------------------------------------

Json report_to_json(const EValueReport& report, std::string_view tool_version = kToolVersion);
// Throws InputError on schema violations.
EValueReport report_from_json(const Json& doc);

std::string write_report_json(const EValueReport& report, std::string_view tool_version = kToolVersion);
EValueReport parse_report_json(std::string_view text);

Json msm_to_json(const MsmResult& msm);
Json experiment_to_json(const ExperimentRecord& record);
Json params_to_json(const SimulationParams& params);

// ---------------------------------------------------------------------------
// Trade-off curves
// ---------------------------------------------------------------------------

enum class CurveTarget { PointEstimate, CiLimit };
enum class CurveFormat { Csv, Svg };

std::string_view to_string(CurveTarget t);

struct CurveDocument {
  double target_rr = 1.0;
  CurveTarget target_label = CurveTarget::PointEstimate;
  std::vector<TradeoffPoint> points;  // ascending strength_t0
  double axis_max = 1.0;              // single-time-point E-value
};

// A null target collapses to the single point (1, 1).
CurveDocument make_curve_document(double target_rr, CurveTarget label,
                                  std::size_t n_points = kDefaultCurvePoints);

std::string write_curve(const CurveDocument& doc, CurveFormat format);
std::string curve_csv(const CurveDocument& doc);
std::string curve_svg(const CurveDocument& doc);

// %.17g
std::string format_full(double v);

}  // namespace evtv
