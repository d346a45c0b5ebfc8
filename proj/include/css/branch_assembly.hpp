#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "css/caustic_maps.hpp"
#include "css/parallel_structure.hpp"

namespace css {

struct BranchAssemblyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// The unique-prolongation step failed; the input is numerically non-generic.
struct ProlongationAmbiguous : BranchAssemblyError {
    using BranchAssemblyError::BranchAssemblyError;
};
/// Two distinct parallel pairs produce the same asymptote line.
struct DoubleAsymptote : BranchAssemblyError {
    using BranchAssemblyError::BranchAssemblyError;
};
struct OpenBranch : BranchAssemblyError {
    using BranchAssemblyError::BranchAssemblyError;
};

/// One arc-over-arc piece of a glueing scheme; traversal order matters.
struct SchemeSegment {
    int top_arc = -1;
    bool top_forward = true;  // traversed in increasing curve parameter
    int bottom_arc = -1;
    bool bottom_forward = true;
};

enum class SchemeEndpoints { inflexion_to_inflexion, closed_same_pair, closed_swapped_pair };

struct GlueingScheme {
    int index = 0;
    std::vector<SchemeSegment> segments;
    SchemeEndpoints endpoints = SchemeEndpoints::closed_same_pair;
    bool maximal = true;
    int inflexion_start = -1;  // division point indices (inflexion schemes)
    int inflexion_end = -1;
};

enum class CausticKind { css, wigner, secant, equidistant };

inline const char* caustic_kind_name(CausticKind kind) {
    switch (kind) {
        case CausticKind::css: return "css";
        case CausticKind::wigner: return "wigner";
        case CausticKind::secant: return "secant";
        default: return "equidistant";
    }
}

struct BranchSample {
    double s1 = 0.0;
    double s2 = 0.0;
    Vec2 point;
    bool gap_before = false;  // asymptote passage before this sample
};

struct AsymptoteApproach {
    int event_index = 0;  // into CausticBranch::asymptotes
    bool opposite_sides = false;
    bool opposite_ends = false;
};

struct CausticBranch {
    CausticKind kind = CausticKind::css;
    double lambda = 0.5;  // equidistant only
    int scheme_index = -1;
    SchemeEndpoints endpoints = SchemeEndpoints::closed_same_pair;
    double sigma = -1.0;
    bool closed = true;
    bool doubled = false;  // secant traversal prolonged to close the image
    bool degenerate_family = false;  // a defect vanished identically (non-generic)
    std::optional<std::pair<int, int>> connects_inflexions;  // division point indices
    std::vector<BranchSample> samples;
    std::vector<SingularEvent> cusps;
    std::vector<SingularEvent> asymptotes;
    std::vector<SingularEvent> double_tangents;
    std::optional<double> rotation;  // integer or half-integer, closed branches
    std::vector<AsymptoteApproach> approaches;  // merge record, css only
};

struct SamplingConfig {
    int samples_per_segment = 512;
    double root_tol = 1e-12;
    int event_refine_factor = 8;
    double event_refine_radius = 1e-2;
    double asymptote_band = 1e-7;  // relative to max |kappa|
    int detector_scan_samples = 4096;
};

/// Every unordered pair of distinct arcs within each family appears in
/// exactly one returned scheme (total segment count = sum_i C(#Phi_i, 2)).
std::vector<GlueingScheme> enumerate_maximal_schemes(const ParallelDecomposition& decomposition);

CausticBranch assemble_branch(const CurveGeometry& curve, const AngleFunction& angles,
                              const ParallelDecomposition& decomposition,
                              const GlueingScheme& scheme, CausticKind kind,
                              const SamplingConfig& cfg = {}, double lambda = 0.5);

/// Glue semi-branch pieces across shared asymptote lines, record the approach
/// geometry, and reject double asymptotes.
std::vector<CausticBranch> merge_semibranches(std::vector<CausticBranch> branches,
                                              double scale);

/// Winding number of the continuous unit normal along a closed branch.
double branch_rotation_number(const CausticBranch& branch);

struct VerdictEntry {
    std::string name;
    bool pass = true;
    std::string witness;
};

struct TheoremVerdicts {
    std::vector<VerdictEntry> entries;
    bool all_pass() const {
        for (const VerdictEntry& e : entries)
            if (!e.pass) return false;
        return true;
    }
};

/// Mechanical checks of the branch-structure theorems on assembled branches
/// (css, wigner and secant branches indexed by scheme).
TheoremVerdicts classify_and_count(const CurveGeometry& curve,
                                   const ParallelDecomposition& decomposition,
                                   const std::vector<GlueingScheme>& schemes,
                                   const std::vector<CausticBranch>& css_branches,
                                   const std::vector<CausticBranch>& wigner_branches,
                                   const std::vector<CausticBranch>& secant_branches);

}  // namespace css
