#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "css/branch_assembly.hpp"
#include "css/caustic_maps.hpp"
#include "css/parallel_structure.hpp"

namespace css {

struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InflexionAtPair : CertificateError {
    using CertificateError::CertificateError;
};
struct HypothesesUnmet : CertificateError {
    explicit HypothesesUnmet(std::vector<std::string> failed_list)
        : CertificateError("certificate hypotheses unmet: " + join(failed_list)),
          failed(std::move(failed_list)) {}
    std::vector<std::string> failed;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const std::string& s : v) out += (out.empty() ? "" : ", ") + s;
        return out;
    }
};
struct DegenerateConstruction : CertificateError {
    using CertificateError::CertificateError;
};

enum class ConditionStatus { pass, fail, not_checkable };

struct GenericityEntry {
    std::string id;      // "i" .. "viii"
    ConditionStatus status = ConditionStatus::pass;
    std::string note;
    double min_margin = 0.0;          // smallest defect seen for the condition
    std::vector<double> witness;      // parameters at a violation (if any)
};

struct GenericityReport {
    std::vector<GenericityEntry> entries;
    bool overall = false;
    int resolution = 0;  // samples per correspondence used by the scan
};

/// Numerical check of the genericity conditions (i)-(viii) on a dense pair
/// grid plus every detected event parameter. Global-search conditions are
/// certified only at this resolution (the note says so).
GenericityReport check_genericity(const CurveGeometry& curve, const AngleFunction& angles,
                                  const ParallelDecomposition& decomposition,
                                  int resolution = 4096);

/// Germ side test: the translated germ at the partner lies on the same side
/// of the common tangent line iff sigma * kappa1 * kappa2 > 0.
bool curved_same_side(const PairSample& pair, double kappa_floor = 1e-10);

/// Endpoint data of two arcs P, Q with pairwise parallel endpoint tangents.
struct ArcEndpointData {
    Vec2 p0, p1, q0, q1;
    Vec2 tp0, tp1, tq0, tq1;  // unit tangents in each arc's own orientation
    double kP0 = 0.0, kP1 = 0.0, kQ0 = 0.0, kQ1 = 0.0;
};

enum class CertificateVerdict { asymptote_certified, inconclusive };

/// Curvature-sign certificate: with the sign pattern kappa_P <= 0 at p0 and
/// < 0 at p1, kappa_Q(q0) > 0, kappa_Q(q1) <= 0, an asymptote exists when
/// (kQ0 + kP0)(kQ1 + kP1) < 0.
CertificateVerdict certificate_curvature_sign(const ArcEndpointData& data);

/// Parallelogram certificate: tangent-line construction at the endpoints;
/// an asymptote exists when rho_max < 1 or rho_min > 1.
CertificateVerdict certificate_parallelogram(const ArcEndpointData& data);

/// Extract certificate input from a correspondence sub-range [u0, u1] of the
/// source arc (0..1). P is the source arc (reversed when flip is set), Q the
/// target traversed so the pairing runs in opposite directions.
ArcEndpointData extract_arc_pair(const CurveGeometry& curve, const Correspondence& corr,
                                 double u0 = 0.0, double u1 = 1.0, bool flip = false);

}  // namespace css
