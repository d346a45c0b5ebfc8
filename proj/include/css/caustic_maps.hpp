#pragma once

#include <stdexcept>
#include <vector>

#include "css/curve_model.hpp"
#include "css/parallel_structure.hpp"

namespace css {

struct CausticMapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// kappa1 - sigma*kappa2 vanishes: the chord is an asymptote, not a point.
struct AsymptoticPair : CausticMapError {
    using CausticMapError::CausticMapError;
};
/// CSS curvature requested at a singular point (cusp defect zero).
struct SingularPoint : CausticMapError {
    using CausticMapError::CausticMapError;
};
struct DegenerateChord : CausticMapError {
    using CausticMapError::CausticMapError;
};

/// A parallel pair with jets at both parameters.
///
/// Sign conventions (global forward parameterization throughout): with
/// sigma = sign<f'(s1), f'(s2)>, the opposite-direction local curvatures of
/// the chord construction are kappa_f = kappa(s1), kappa_g = -sigma*kappa(s2),
/// kappa_g' = +kappa_s(s2), kappa_g'' = -sigma*kappa_ss(s2).
struct PairSample {
    Jet a;  // jet at s1
    Jet b;  // jet at s2
    double sigma = -1.0;
    Line chord;
    bool standard = false;  // sigma == -1 and kappa(s2) != 0
};

PairSample make_pair_sample(const CurveGeometry& curve, double s1, double s2);

enum class EventKind { cusp, asymptote, double_tangent };

struct SingularEvent {
    EventKind kind = EventKind::cusp;
    double s1 = 0.0;
    double s2 = 0.0;
    Vec2 location;  // cusp / double-tangent point
    Line line;      // asymptote (also the chord for double tangents)
    bool degenerate = false;
    double witness1 = 0.0;  // second-order defect / cross-check value
    double witness2 = 0.0;
};

struct DetectionResult {
    std::vector<SingularEvent> events;
    /// The defect vanishes identically along the correspondence
    /// (centrally symmetric input or similar).
    bool degenerate_family = false;
};

/// Envelope point of the affine-chord family:
/// (kappa1*a - sigma*kappa2*b) / (kappa1 - sigma*kappa2).
Vec2 css_point(const PairSample& pair);

/// lambda*a + (1-lambda)*b; lambda = 0.5 is the Wigner caustic point.
Vec2 equidistant_point(const PairSample& pair, double lambda);

/// a - b.
Vec2 secant_point(const PairSample& pair);

/// Signed curvature of the CSS at the (regular) image of the pair.
double css_curvature(const PairSample& pair);

// Defect functions along a correspondence, s in the source arc range.
// Roots of cusp_defect are CSS singular points, roots of asymptote_defect
// are asymptotes (and secant-caustic cusps), roots of wigner_defect are
// Wigner-caustic cusps, roots of double_tangent_defect are double tangents.
double cusp_defect(const CurveGeometry& curve, double s1, double s2);
double asymptote_defect(const CurveGeometry& curve, double s1, double s2, double sigma);
double wigner_defect(const CurveGeometry& curve, double s1, double s2, double sigma);
double double_tangent_defect(const CurveGeometry& curve, double s1, double s2);

struct DetectorConfig {
    int scan_samples = 4096;
    double root_tol = 1e-12;  // bisection width in the parameter
    /// Events are not reported within this fraction of the arc length of an
    /// excluded traversal endpoint (shell endpoints carry structural roots).
    double skip_lo = 0.0;
    double skip_hi = 0.0;
};

DetectionResult detect_cusps(const CurveGeometry& curve, const Correspondence& corr,
                             const DetectorConfig& cfg = {});
DetectionResult detect_asymptotes(const CurveGeometry& curve, const Correspondence& corr,
                                  const DetectorConfig& cfg = {});
DetectionResult detect_double_tangents(const CurveGeometry& curve, const Correspondence& corr,
                                       const DetectorConfig& cfg = {});

struct EnvelopeVertex {
    Vec2 point;
    double s_mid = 0.0;  // parameter between the two generating chords
    bool gap_before = false;  // consecutive chords were parallel (asymptote)
};

/// Brute-force envelope: intersections of consecutive chords of the sampled
/// family. Independent oracle for css_point.
std::vector<EnvelopeVertex> envelope_oracle(const CurveGeometry& curve,
                                            const Correspondence& corr, int n_samples);

}  // namespace css
