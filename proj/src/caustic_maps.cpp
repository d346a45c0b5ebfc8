#include "css/caustic_maps.hpp"

#include <algorithm>
#include <cmath>

#include "css/roots.hpp"

namespace css {

namespace {
constexpr double kAsymptoticTol = 1e-10;  // relative, css_point precondition
}

PairSample make_pair_sample(const CurveGeometry& curve, double s1, double s2) {
    PairSample pair;
    pair.a = curve.eval_jet(s1);
    pair.b = curve.eval_jet(s2);
    pair.sigma = dot(pair.a.d1, pair.b.d1) >= 0.0 ? 1.0 : -1.0;
    pair.chord = Line::through(pair.a.position, pair.b.position);
    pair.standard =
        pair.sigma < 0.0 && std::fabs(pair.b.kappa) > 1e-12 * std::max(1.0, curve.max_abs_kappa());
    return pair;
}

Vec2 css_point(const PairSample& pair) {
    double k1 = pair.a.kappa;
    double k2s = pair.sigma * pair.b.kappa;
    double denom = k1 - k2s;
    if (std::fabs(denom) <= kAsymptoticTol * std::max(std::fabs(k1), std::fabs(pair.b.kappa)))
        throw AsymptoticPair("kappa1 - sigma*kappa2 vanishes; the chord is an asymptote");
    return (pair.a.position * k1 - pair.b.position * k2s) / denom;
}

Vec2 equidistant_point(const PairSample& pair, double lambda) {
    return pair.a.position * lambda + pair.b.position * (1.0 - lambda);
}

Vec2 secant_point(const PairSample& pair) { return pair.a.position - pair.b.position; }

double css_curvature(const PairSample& pair) {
    // Paper formula in local opposite-direction convention, converted:
    // kappa_b(local) = -sigma*kappa2, kappa'_a = kappa_s1, kappa'_b = +kappa_s2.
    double k1 = pair.a.kappa;
    double k2 = pair.b.kappa;
    double local_kb = -pair.sigma * k2;
    Vec2 ab = pair.a.position - pair.b.position;
    double chord_len = ab.norm();
    if (chord_len < 1e-12) throw DegenerateChord("pair positions coincide");
    double defect = pair.a.kappa_s * k2 * k2 - k1 * k1 * pair.b.kappa_s;
    if (std::fabs(defect) < 1e-14 * (std::fabs(pair.a.kappa_s * k2 * k2) +
                                     std::fabs(k1 * k1 * pair.b.kappa_s) + 1e-300))
        throw SingularPoint("cusp defect vanishes; CSS point is singular");
    double sum = k1 + local_kb;
    double sgn = local_kb >= 0.0 ? 1.0 : -1.0;
    return sgn * (sum * sum * sum) / std::fabs(defect) *
           det(ab, pair.a.tangent_unit) / (chord_len * chord_len * chord_len);
}

double cusp_defect(const CurveGeometry& curve, double s1, double s2) {
    Jet a = curve.eval_jet(s1);
    Jet b = curve.eval_jet(s2);
    return a.kappa_s * b.kappa * b.kappa - a.kappa * a.kappa * b.kappa_s;
}

double asymptote_defect(const CurveGeometry& curve, double s1, double s2, double sigma) {
    return curve.kappa(s1) - sigma * curve.kappa(s2);
}

double wigner_defect(const CurveGeometry& curve, double s1, double s2, double sigma) {
    return curve.kappa(s1) + sigma * curve.kappa(s2);
}

double double_tangent_defect(const CurveGeometry& curve, double s1, double s2) {
    Vec2 a = curve.position(s1);
    Vec2 b = curve.position(s2);
    Vec2 v = curve.velocity(s1);
    return det(a - b, v / v.norm());
}

namespace {

struct DefectScan {
    std::vector<double> roots;
    bool degenerate_family = false;
};

DefectScan scan_defect(const std::function<double(double)>& f, double lo, double hi,
                       const DetectorConfig& cfg, double scale_floor) {
    DefectScan out;
    double span = hi - lo;
    double a = lo + cfg.skip_lo * span;
    double b = hi - cfg.skip_hi * span;
    double max_abs = 0.0;
    const int n = cfg.scan_samples;
    for (int i = 0; i <= n; ++i)
        max_abs = std::max(max_abs, std::fabs(f(a + (b - a) * static_cast<double>(i) / n)));
    if (max_abs < 1e-10 * scale_floor) {
        out.degenerate_family = true;
        return out;
    }
    for (const Bracket& br : scan_brackets(f, a, b, n))
        out.roots.push_back(bisect(f, br, cfg.root_tol));
    return out;
}

}  // namespace

DetectionResult detect_cusps(const CurveGeometry& curve, const Correspondence& corr,
                             const DetectorConfig& cfg) {
    DetectionResult result;
    const Arc& src = corr.source();
    auto C = [&](double s) { return cusp_defect(curve, s, corr.map(s)); };
    double k = curve.max_abs_kappa();
    double ks_scale = k * k * k + 1e-300;  // magnitude scale of kappa_s*kappa^2
    DefectScan scan = scan_defect(C, src.t_lo, src.t_hi, cfg, ks_scale);
    result.degenerate_family = scan.degenerate_family;
    for (double r : scan.roots) {
        double s2 = corr.map(r);
        PairSample pair = make_pair_sample(curve, r, s2);
        SingularEvent ev;
        ev.kind = EventKind::cusp;
        ev.s1 = r;
        ev.s2 = s2;
        // Second-order nondegeneracy (sigma-free) and chord-tangent witness,
        // each measured against its own local terms so heterogeneous
        // curvature magnitudes cannot mask a healthy root.
        double term1 = pair.a.kappa_ss * std::pow(pair.b.kappa, 3);
        double term2 = std::pow(pair.a.kappa, 3) * pair.b.kappa_ss;
        ev.witness1 = term1 - term2;
        ev.witness2 = det(pair.a.position - pair.b.position, pair.b.tangent_unit);
        double chord_len = (pair.a.position - pair.b.position).norm();
        bool nondeg =
            std::fabs(ev.witness1) > 1e-8 * (std::fabs(term1) + std::fabs(term2) + 1e-300) &&
            std::fabs(ev.witness2) > 1e-8 * (chord_len + 1e-300);
        ev.degenerate = !nondeg;
        try {
            ev.location = css_point(pair);
        } catch (const AsymptoticPair&) {
            ev.degenerate = true;  // cusp coinciding with an asymptote: non-generic
        }
        ev.line = pair.chord;
        result.events.push_back(ev);
    }
    return result;
}

DetectionResult detect_asymptotes(const CurveGeometry& curve, const Correspondence& corr,
                                  const DetectorConfig& cfg) {
    DetectionResult result;
    const Arc& src = corr.source();
    double sigma = corr.sigma();
    auto A = [&](double s) { return asymptote_defect(curve, s, corr.map(s), sigma); };
    DefectScan scan = scan_defect(A, src.t_lo, src.t_hi, cfg, curve.max_abs_kappa() + 1e-300);
    result.degenerate_family = scan.degenerate_family;
    for (double r : scan.roots) {
        double s2 = corr.map(r);
        PairSample pair = make_pair_sample(curve, r, s2);
        SingularEvent ev;
        ev.kind = EventKind::asymptote;
        ev.s1 = r;
        ev.s2 = s2;
        ev.line = pair.chord;
        ev.location = pair.chord.origin_foot();
        // Cross-check: the secant-caustic velocity vanishes here. Central
        // finite difference of the secant point along the correspondence.
        double h = 1e-6 * (src.t_hi - src.t_lo);
        Vec2 sp = curve.position(r + h) - curve.position(corr.map(r + h));
        Vec2 sm = curve.position(r - h) - curve.position(corr.map(r - h));
        ev.witness1 = (sp - sm).norm() / (2.0 * h);
        result.events.push_back(ev);
    }
    return result;
}

DetectionResult detect_double_tangents(const CurveGeometry& curve, const Correspondence& corr,
                                       const DetectorConfig& cfg) {
    DetectionResult result;
    const Arc& src = corr.source();
    auto D = [&](double s) { return double_tangent_defect(curve, s, corr.map(s)); };
    DefectScan scan = scan_defect(D, src.t_lo, src.t_hi, cfg, curve.scale());
    result.degenerate_family = scan.degenerate_family;
    for (double r : scan.roots) {
        double s2 = corr.map(r);
        PairSample pair = make_pair_sample(curve, r, s2);
        SingularEvent ev;
        ev.kind = EventKind::double_tangent;
        ev.s1 = r;
        ev.s2 = s2;
        ev.line = pair.chord;
        try {
            ev.location = css_point(pair);
        } catch (const AsymptoticPair&) {
            ev.degenerate = true;  // double tangent equal to an asymptote: non-generic
            ev.location = pair.chord.origin_foot();
        }
        result.events.push_back(ev);
    }
    return result;
}

std::vector<EnvelopeVertex> envelope_oracle(const CurveGeometry& curve,
                                            const Correspondence& corr, int n_samples) {
    if (n_samples < 3) throw CausticMapError("envelope oracle needs at least 3 samples");
    const Arc& src = corr.source();
    std::vector<Line> chords(n_samples + 1);
    std::vector<double> params(n_samples + 1);
    for (int i = 0; i <= n_samples; ++i) {
        double s = src.t_lo + (src.t_hi - src.t_lo) * static_cast<double>(i) / n_samples;
        params[i] = s;
        chords[i] = Line::through(curve.position(s), curve.position(corr.map(s)));
    }
    // Consecutive chords are parallel where the chord rotation stalls: at
    // asymptotes (parallel distinct lines) and at double tangents (the chord
    // slides along itself). Both make the intersection ill-conditioned, so
    // the stall threshold is taken relative to the typical rotation step.
    std::vector<double> turn(n_samples);
    double mean_turn = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        turn[i] = std::fabs(det(chords[i].dir, chords[i + 1].dir));
        mean_turn += turn[i];
    }
    mean_turn /= std::max(1, n_samples);
    const double stall = 0.02 * mean_turn;

    std::vector<EnvelopeVertex> out;
    bool pending_gap = false;
    for (int i = 0; i + 1 <= n_samples; ++i) {
        auto hit = intersect_lines(chords[i], chords[i + 1], 1e-14);
        if (!hit || turn[i] < stall) {
            pending_gap = true;  // parallel consecutive chords
            continue;
        }
        EnvelopeVertex v;
        v.point = *hit;
        v.s_mid = 0.5 * (params[i] + params[i + 1]);
        v.gap_before = pending_gap;
        pending_gap = false;
        out.push_back(v);
    }
    return out;
}

}  // namespace css
