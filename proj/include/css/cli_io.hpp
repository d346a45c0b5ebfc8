#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "css/branch_assembly.hpp"
#include "css/certificates.hpp"
#include "css/curve_model.hpp"

namespace css {

struct CliIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : CliIoError {
    ParseError(const std::string& msg, int line_, int column_)
        : CliIoError("parse error at " + std::to_string(line_) + ":" + std::to_string(column_) +
                     ": " + msg),
          line(line_),
          column(column_) {}
    int line = 0;
    int column = 0;
};
struct ValidationError : CliIoError {
    using CliIoError::CliIoError;
};

struct AnalysisConfig {
    int samples_per_period = 4096;
    double root_tol = 1e-12;
    int event_refine_factor = 8;
    double asymptote_band = 1e-7;
    std::vector<CausticKind> kinds = {CausticKind::css, CausticKind::wigner,
                                      CausticKind::secant};
    std::vector<double> equidistant_lambdas;
    unsigned seed = 0;
    int samples_per_segment = 512;
    bool run_genericity = true;
    bool include_timing = true;

    void validate() const;
};

struct AnalysisReport {
    std::optional<CurveGeometry> curve;
    CurveSpec spec;
    AnalysisConfig config;
    int rotation = 0;
    std::vector<InflexionRecord> inflexions;
    std::optional<ParallelDecomposition> decomposition;
    std::vector<GlueingScheme> schemes;
    std::vector<CausticBranch> branches;  // all kinds, ordered (kind, scheme)
    TheoremVerdicts verdicts;
    std::optional<GenericityReport> genericity;
    std::vector<std::string> stage_errors;  // "stage: message"
    std::map<std::string, double> timing_ms;

    const CausticBranch* find_branch(CausticKind kind, int scheme) const;
};

/// Parse the curve-spec JSON text into a validated CurveSpec.
CurveSpec parse_curve_file(const std::string& text);
CurveSpec load_curve_file(const std::string& path);

/// Full pipeline; deterministic for a fixed (spec, config). Stage failures
/// are collected in stage_errors and the partial report is returned.
AnalysisReport run_analysis(const CurveSpec& spec, const AnalysisConfig& config = {});

/// Deterministic report JSON (17 significant digits, fixed field order).
std::string report_to_json(const AnalysisReport& report);

/// Write report.json, one CSV per branch, and optionally figure.svg.
/// Returns the list of files written.
std::vector<std::string> emit_outputs(const AnalysisReport& report, const std::string& out_dir,
                                      bool svg);

/// CSV text for one branch (columns s1,s2,x,y,event; 12 significant digits).
std::string branch_to_csv(const CausticBranch& branch);

std::string render_svg(const AnalysisReport& report);

struct OracleComparison {
    int scheme = 0;
    double hausdorff = 0.0;    // oracle at n vs formula samples
    double hausdorff_2n = 0.0; // oracle at 2n
    double ratio = 0.0;        // hausdorff / hausdorff_2n
    double tolerance = 0.0;    // 1e-3 * curve diameter
    bool pass = false;
};

/// Envelope-oracle comparison per scheme at n and 2n chord samples.
std::vector<OracleComparison> compare_envelope_oracle(const CurveSpec& spec, int n_samples);

}  // namespace css
