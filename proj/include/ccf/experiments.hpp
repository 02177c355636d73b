#pragma once
// Initial-data library, run configuration and records, resumable parameter
// sweeps over JSONL storage, and CSV/SVG reporting.

#include "ccf/regularity.hpp"
#include "ccf/solver.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ccf::experiments {

using spectral::RealField;
using spectral::TorusGrid;

inline constexpr int kSchemaVersion = 1;

struct CosinePositive {
    double a = 1.0;
    double b = 1.0;
};  ///< a + b cos x, a >= b > 0
struct VonMisesBump {
    double kappa = 5.0;
};  ///< exp(kappa (cos x - 1))
struct LiRodrigoType {
    double scale = 1.0;
};  ///< -scale sin^2(x/2), the periodic analogue of even non-positive data vanishing at 0
struct CustomSamples {
    std::vector<double> samples;
};

struct InitialDatum {
    std::variant<CosinePositive, VonMisesBump, LiRodrigoType, CustomSamples> kind;

    /// cosine:a,b | vonmises:kappa | lirodrigo:scale | custom:v0;v1;...
    static InitialDatum parse(const std::string& spec);
    std::string label() const;
};

/// Samples the datum and checks its sign and symmetry invariants on the grid.
/// Throws ValidationError naming the violated constraint.
RealField make_datum(const InitialDatum& d, const TorusGrid& grid);

struct RunConfig {
    solver::ModelParams params;
    solver::StepControl control;
    regularity::RegularityConstants constants;
    InitialDatum datum{CosinePositive{}};
    /// Holder exponent for T* and the post-T* seminorm; defaults to alpha_policy(gamma).
    std::optional<double> alpha;
    std::vector<double> holder_alphas;  ///< empty: DiagnosticPlan::for_gamma

    double effective_alpha() const;
    solver::DiagnosticPlan plan() const;
};

struct RunRecord {
    RunConfig config;
    std::string config_hash;
    std::vector<regularity::DiagnosticsSample> samples;
    solver::Outcome outcome = solver::Outcome::Completed;
    std::string detail;
    std::size_t step_count = 0;
    std::optional<double> t_star_predicted;
    std::optional<double> t_local_predicted;
    double wall_time = 0.0;
};

nlohmann::ordered_json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

/// Stable hex digest of the full-precision serialization of every parameter.
std::string config_hash(const RunConfig& c);

nlohmann::ordered_json record_to_json(const RunRecord& r);
/// Throws SchemaError on a missing or unknown schema_version.
RunRecord record_from_json(const nlohmann::json& j);

/// Validates, samples the datum, integrates, and fills the predictions.
/// Solver faults become the record's outcome; invalid configs throw.
RunRecord execute(const RunConfig& cfg);

/// Appends/loads one JSON record per line.
void append_record(const std::filesystem::path& path, const RunRecord& r);
std::vector<RunRecord> load_records(const std::filesystem::path& path);

struct SweepPlan {
    std::vector<double> gamma_values;
    std::vector<InitialDatum> data;
    std::vector<std::size_t> resolutions;
    std::vector<regularity::RegularityConstants> constants{regularity::RegularityConstants{}};
    solver::StepControl control;
    bool dissipation_on = true;
    bool dealias_on = true;
    std::optional<double> alpha;
    unsigned parallelism = 1;

    void validate() const;
    /// Cells in gamma-major, then datum, resolution, constants order.
    std::vector<RunConfig> cells() const;
};

struct SweepSummary {
    std::vector<RunRecord> records;  ///< one per cell, in cell order
    std::size_t simulated = 0;       ///< cells run in this invocation
    std::size_t skipped = 0;         ///< cells already present in the store
};

/// Runs every cell not already stored in `store` (matched by config hash),
/// appending each record in cell order. Cell failures are recorded with
/// Outcome::Failed and never abort the sweep.
SweepSummary sweep(const SweepPlan& plan, const std::filesystem::path& store);

// ---------------------------------------------------------------------------
// Reporting

/// One CSV row; optional fields are empty when not applicable.
struct SummaryRow {
    std::string config_hash;
    double gamma = 0.0;
    std::size_t n = 0;
    std::string datum;
    std::string outcome;
    std::optional<double> alpha;
    std::optional<double> max_holder_after_tstar;
    std::optional<double> fitted_C;
    std::optional<double> t_star;
    std::optional<double> t_local;

    friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

inline constexpr const char* kSummaryHeader =
    "config_hash,gamma,n,datum,outcome,alpha,max_holder_after_tstar,fitted_C,t_star,t_local";

SummaryRow summarize(const RunRecord& r);
std::string emit_csv(const std::vector<SummaryRow>& rows);
/// Throws SchemaError on a wrong header or malformed row.
std::vector<SummaryRow> parse_csv(const std::string& text);

/// Norm histories tracked in the charts.
inline constexpr std::array<const char*, 5> kChartSeries = {"l2", "linf", "hdot_half", "hdot_three_half",
                                                            "hdot_mid"};

/// Standalone SVG with one polyline per tracked norm against time.
std::string emit_svg(const RunRecord& r);

struct ReportBundle {
    std::filesystem::path csv;
    std::vector<std::filesystem::path> charts;
};

/// Writes summary.csv and, when `charts` is set, one SVG per record into `out_dir`.
ReportBundle report(const std::vector<RunRecord>& records, const std::filesystem::path& out_dir, bool charts = true);

}  // namespace ccf::experiments
