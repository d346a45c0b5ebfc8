#include "css/branch_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "css/roots.hpp"

namespace css {

namespace {

struct WalkState {
    int top_arc = -1;
    bool top_fwd = true;
    int bot_arc = -1;
    bool bot_fwd = true;

    bool operator==(const WalkState& o) const {
        return top_arc == o.top_arc && top_fwd == o.top_fwd && bot_arc == o.bot_arc &&
               bot_fwd == o.bot_fwd;
    }
};

WalkState swapped(const WalkState& s) { return {s.bot_arc, s.bot_fwd, s.top_arc, s.top_fwd}; }
WalkState flipped(const WalkState& s) { return {s.top_arc, !s.top_fwd, s.bot_arc, !s.bot_fwd}; }

class SchemeWalker {
  public:
    explicit SchemeWalker(const ParallelDecomposition& dec)
        : dec_(&dec), m2_(static_cast<int>(dec.division.arcs.size())) {}

    int end_index(int arc, bool fwd) const { return fwd ? (arc + 1) % m2_ : arc; }
    int start_index(int arc, bool fwd) const { return fwd ? arc : (arc + 1) % m2_; }

    bool is_extremum(int point_index) const {
        return dec_->division.points[point_index].tag == DivisionTag::inflexion;
    }

    bool sweep_up(int arc, bool fwd) const {
        return fwd == dec_->division.arcs[arc].phi_up;
    }

    /// End boundary is a degenerate pair (both sides at the same division
    /// point); only inflexion points terminate chains this way.
    bool terminal_end(const WalkState& s) const {
        return end_index(s.top_arc, s.top_fwd) == end_index(s.bot_arc, s.bot_fwd);
    }
    bool terminal_start(const WalkState& s) const {
        return start_index(s.top_arc, s.top_fwd) == start_index(s.bot_arc, s.bot_fwd);
    }

    WalkState step(const WalkState& s) const {
        int p = end_index(s.top_arc, s.top_fwd);
        int q = end_index(s.bot_arc, s.bot_fwd);
        bool p_ext = is_extremum(p);
        bool q_ext = is_extremum(q);
        if (p_ext && q_ext)
            throw ProlongationAmbiguous("two inflexions form a parallel pair at division points " +
                                        std::to_string(p) + ", " + std::to_string(q));
        WalkState n = s;
        auto advance = [&](int& arc, bool fwd) { arc = fwd ? (arc + 1) % m2_ : (arc + m2_ - 1) % m2_; };
        if (p_ext) {
            // The inflexion side passes through; the partner turns back.
            advance(n.top_arc, n.top_fwd);
            n.bot_fwd = !n.bot_fwd;
        } else if (q_ext) {
            advance(n.bot_arc, n.bot_fwd);
            n.top_fwd = !n.top_fwd;
        } else {
            advance(n.top_arc, n.top_fwd);
            advance(n.bot_arc, n.bot_fwd);
        }
        const auto& arcs = dec_->division.arcs;
        if (arcs[n.top_arc].family != arcs[n.bot_arc].family ||
            sweep_up(n.top_arc, n.top_fwd) != sweep_up(n.bot_arc, n.bot_fwd))
            throw ProlongationAmbiguous("prolongation left the parallel-arc family");
        return n;
    }

    WalkState step_back(const WalkState& s) const { return flipped(step(flipped(s))); }

  private:
    const ParallelDecomposition* dec_;
    int m2_;
};

}  // namespace

std::vector<GlueingScheme> enumerate_maximal_schemes(const ParallelDecomposition& dec) {
    SchemeWalker walker(dec);
    const auto& arcs = dec.division.arcs;

    long total_pairs = 0;
    for (const ParallelArcSet& family : dec.families) {
        long k = static_cast<long>(family.arcs.size());
        total_pairs += k * (k - 1) / 2;
    }
    const long guard = 4 * total_pairs + 16;

    std::set<std::pair<int, int>> used;
    std::vector<GlueingScheme> schemes;

    auto mark_used = [&](const WalkState& s) {
        used.insert({std::min(s.top_arc, s.bot_arc), std::max(s.top_arc, s.bot_arc)});
    };

    for (const ParallelArcSet& family : dec.families) {
        for (std::size_t ia = 0; ia < family.arcs.size(); ++ia) {
            for (std::size_t ib = ia + 1; ib < family.arcs.size(); ++ib) {
                int a = family.arcs[ia];
                int b = family.arcs[ib];
                if (used.count({std::min(a, b), std::max(a, b)})) continue;

                WalkState s0{a, arcs[a].phi_up, b, arcs[b].phi_up};
                // Forward walk: find a terminal end or close the orbit.
                std::vector<WalkState> chain{s0};
                bool cycle = false;
                {
                    WalkState cur = s0;
                    long iter = 0;
                    while (!walker.terminal_end(cur)) {
                        if (++iter > guard)
                            throw ProlongationAmbiguous("glueing scheme walk did not terminate");
                        WalkState nxt = walker.step(cur);
                        if (nxt == s0) {
                            cycle = true;
                            break;
                        }
                        chain.push_back(nxt);
                        cur = nxt;
                    }
                }

                GlueingScheme scheme;
                scheme.index = static_cast<int>(schemes.size());
                if (cycle) {
                    std::size_t cut = chain.size();
                    for (std::size_t c = 1; c < chain.size(); ++c) {
                        if (chain[c] == swapped(chain[0])) {
                            cut = c;
                            break;
                        }
                    }
                    if (cut < chain.size()) {
                        scheme.endpoints = SchemeEndpoints::closed_swapped_pair;
                        chain.resize(cut);
                    } else {
                        scheme.endpoints = SchemeEndpoints::closed_same_pair;
                    }
                } else {
                    // Walk backward to the chain start (an inflexion pair).
                    std::vector<WalkState> back;
                    WalkState cur = s0;
                    long iter = 0;
                    while (!walker.terminal_start(cur)) {
                        if (++iter > guard)
                            throw ProlongationAmbiguous("glueing scheme walk did not terminate");
                        cur = walker.step_back(cur);
                        back.push_back(cur);
                    }
                    std::reverse(back.begin(), back.end());
                    back.insert(back.end(), chain.begin(), chain.end());
                    chain = std::move(back);
                    scheme.endpoints = SchemeEndpoints::inflexion_to_inflexion;
                    scheme.inflexion_start =
                        walker.start_index(chain.front().top_arc, chain.front().top_fwd);
                    scheme.inflexion_end =
                        walker.end_index(chain.back().top_arc, chain.back().top_fwd);
                }
                for (const WalkState& s : chain) {
                    scheme.segments.push_back({s.top_arc, s.top_fwd, s.bot_arc, s.bot_fwd});
                    mark_used(s);
                }
                schemes.push_back(std::move(scheme));
            }
        }
    }

    return schemes;
}

namespace {

struct SegmentEvents {
    std::vector<SingularEvent> cusps, asymptotes, double_tangents;
    bool degenerate_family = false;
};

double normalize_param(double t, double period) {
    double u = std::fmod(t, period);
    if (u < 0.0) u += period;
    return u;
}

/// Unordered-pair identity of two events modulo the period.
bool same_event_pair(const SingularEvent& x, const SingularEvent& y, double period, double tol) {
    double a1 = normalize_param(x.s1, period), a2 = normalize_param(x.s2, period);
    double b1 = normalize_param(y.s1, period), b2 = normalize_param(y.s2, period);
    auto close = [&](double u, double v) {
        double d = std::fabs(u - v);
        return std::min(d, period - d) < tol;
    };
    return (close(a1, b1) && close(a2, b2)) || (close(a1, b2) && close(a2, b1));
}

void append_events(std::vector<SingularEvent>& dst, const std::vector<SingularEvent>& src,
                   double period, double tol) {
    for (const SingularEvent& ev : src) {
        bool dup = false;
        for (const SingularEvent& have : dst)
            if (same_event_pair(have, ev, period, tol)) dup = true;
        if (!dup) dst.push_back(ev);
    }
}

}  // namespace

CausticBranch assemble_branch(const CurveGeometry& curve, const AngleFunction& angles,
                              const ParallelDecomposition& dec, const GlueingScheme& scheme,
                              CausticKind kind, const SamplingConfig& cfg, double lambda) {
    CausticBranch branch;
    branch.kind = kind;
    branch.lambda = kind == CausticKind::wigner ? 0.5 : lambda;
    branch.scheme_index = scheme.index;
    branch.endpoints = scheme.endpoints;
    branch.closed = scheme.endpoints != SchemeEndpoints::inflexion_to_inflexion;
    if (scheme.endpoints == SchemeEndpoints::inflexion_to_inflexion)
        branch.connects_inflexions = {scheme.inflexion_start, scheme.inflexion_end};

    const double period = curve.period();
    const double dedupe_tol = 1e-8 * period;
    const bool shell = scheme.endpoints == SchemeEndpoints::inflexion_to_inflexion;
    const double band = cfg.asymptote_band * std::max(curve.max_abs_kappa(), 1e-300);

    bool first_sigma = true;
    bool pending_gap = false;
    std::vector<SingularEvent> all_cusps, all_asymptotes, all_dts;
    bool degenerate_family = false;
    std::vector<Correspondence> correspondences;
    correspondences.reserve(scheme.segments.size());
    for (const SchemeSegment& seg : scheme.segments)
        correspondences.push_back(solve_correspondence(angles, dec, seg.top_arc, seg.bottom_arc));

    for (std::size_t k = 0; k < scheme.segments.size(); ++k) {
        const SchemeSegment& seg = scheme.segments[k];
        const Correspondence& corr = correspondences[k];
        if (first_sigma) {
            branch.sigma = corr.sigma();
            first_sigma = false;
        }

        DetectorConfig det;
        det.scan_samples = cfg.detector_scan_samples;
        det.root_tol = cfg.root_tol;
        // Shell endpoints carry structural roots of every defect; exclude a
        // thin band at the traversal start of the first segment and the
        // traversal end of the last one.
        const double shell_skip = 1e-3;
        if (shell && k == 0) (seg.top_forward ? det.skip_lo : det.skip_hi) = shell_skip;
        if (shell && k + 1 == scheme.segments.size())
            (seg.top_forward ? det.skip_hi : det.skip_lo) = shell_skip;

        SegmentEvents events;
        if (kind == CausticKind::css) {
            DetectionResult c = detect_cusps(curve, corr, det);
            DetectionResult a = detect_asymptotes(curve, corr, det);
            DetectionResult d = detect_double_tangents(curve, corr, det);
            events.cusps = c.events;
            events.asymptotes = a.events;
            events.double_tangents = d.events;
            events.degenerate_family = c.degenerate_family;
        }
        // Wigner and secant cusps come from scalar defect roots.
        if (kind == CausticKind::wigner || kind == CausticKind::secant) {
            double sig = corr.sigma();
            const Arc& src = corr.source();
            auto defect = [&](double s) {
                return kind == CausticKind::wigner ? wigner_defect(curve, s, corr.map(s), sig)
                                                   : asymptote_defect(curve, s, corr.map(s), sig);
            };
            double span = src.t_hi - src.t_lo;
            double a = src.t_lo + det.skip_lo * span;
            double b = src.t_hi - det.skip_hi * span;
            double max_abs = 0.0;
            for (int i = 0; i <= det.scan_samples; ++i)
                max_abs = std::max(
                    max_abs, std::fabs(defect(a + (b - a) * static_cast<double>(i) /
                                              det.scan_samples)));
            if (max_abs < 1e-10 * (curve.max_abs_kappa() + 1e-300)) {
                events.degenerate_family = true;
            } else {
                std::function<double(double)> f = defect;
                for (const Bracket& br : scan_brackets(f, a, b, det.scan_samples)) {
                    double r = bisect(f, br, det.root_tol);
                    SingularEvent ev;
                    ev.kind = EventKind::cusp;
                    ev.s1 = r;
                    ev.s2 = corr.map(r);
                    PairSample pair = make_pair_sample(curve, ev.s1, ev.s2);
                    ev.location = kind == CausticKind::wigner ? equidistant_point(pair, 0.5)
                                                              : secant_point(pair);
                    events.cusps.push_back(ev);
                }
            }
        }
        degenerate_family = degenerate_family || events.degenerate_family;
        append_events(all_cusps, events.cusps, period, dedupe_tol);
        append_events(all_asymptotes, events.asymptotes, period, dedupe_tol);
        append_events(all_dts, events.double_tangents, period, dedupe_tol);

        // Sampling grid along the traversal of the top arc.
        const Arc& src = corr.source();
        double from = seg.top_forward ? src.t_lo : src.t_hi;
        double to = seg.top_forward ? src.t_hi : src.t_lo;
        std::vector<double> params;
        params.reserve(cfg.samples_per_segment + 1);
        for (int i = 0; i <= cfg.samples_per_segment; ++i)
            params.push_back(from + (to - from) * static_cast<double>(i) / cfg.samples_per_segment);
        auto refine_near = [&](double s_ev) {
            double step = std::fabs(to - from) / cfg.samples_per_segment /
                          cfg.event_refine_factor;
            double lo = std::max(std::min(from, to), s_ev - cfg.event_refine_radius);
            double hi = std::min(std::max(from, to), s_ev + cfg.event_refine_radius);
            for (double s = lo; s <= hi; s += step) params.push_back(s);
        };
        for (const SingularEvent& ev : events.cusps) refine_near(ev.s1);
        for (const SingularEvent& ev : events.asymptotes) refine_near(ev.s1);
        for (const SingularEvent& ev : events.double_tangents) refine_near(ev.s1);
        std::sort(params.begin(), params.end());
        if (to < from) std::reverse(params.begin(), params.end());
        params.erase(std::unique(params.begin(), params.end()), params.end());

        std::vector<double> gap_roots;
        for (const SingularEvent& ev : events.asymptotes) gap_roots.push_back(ev.s1);

        bool have_prev_param = false;
        double prev_param = 0.0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (k > 0 && i == 0) continue;  // shared junction sample
            double s1 = params[i];
            double s2 = corr.map(s1);
            // An asymptote root between consecutive samples is a passage
            // through infinity: mark the gap.
            if (have_prev_param)
                for (double r : gap_roots)
                    if ((prev_param - r) * (s1 - r) < 0.0) pending_gap = true;
            prev_param = s1;
            have_prev_param = true;
            PairSample pair = make_pair_sample(curve, s1, s2);
            BranchSample sample;
            sample.s1 = s1;
            sample.s2 = s2;
            sample.gap_before = pending_gap;
            switch (kind) {
                case CausticKind::css: {
                    double a_val = pair.a.kappa - pair.sigma * pair.b.kappa;
                    if (std::fabs(a_val) < band) {
                        pending_gap = true;  // landed inside the asymptote band
                        continue;
                    }
                    sample.point = css_point(pair);
                    break;
                }
                case CausticKind::wigner:
                    sample.point = equidistant_point(pair, 0.5);
                    break;
                case CausticKind::secant:
                    sample.point = secant_point(pair);
                    break;
                case CausticKind::equidistant:
                    sample.point = equidistant_point(pair, lambda);
                    break;
            }
            pending_gap = false;
            branch.samples.push_back(sample);
        }
    }

    // Shell branches begin and end exactly at the inflexion points
    // (both pair parameters converge there; the secant image reaches 0).
    if (shell && !branch.samples.empty()) {
        double p = dec.division.points[scheme.inflexion_start].t;
        double q = dec.division.points[scheme.inflexion_end].t;
        branch.samples.front().s1 = branch.samples.front().s2 = p;
        branch.samples.back().s1 = branch.samples.back().s2 = q;
        if (kind == CausticKind::secant) {
            branch.samples.front().point = {0.0, 0.0};
            branch.samples.back().point = {0.0, 0.0};
        } else {
            branch.samples.front().point = curve.position(p);
            branch.samples.back().point = curve.position(q);
        }
    }

    // Defect roots can sit exactly on a segment junction (a division-point
    // pair), where the per-segment sign scan cannot bracket them. Probe each
    // junction, confirming the crossing from both flanking segments; a
    // vanishing defect that does not change sign is flagged degenerate.
    if (!degenerate_family) {
        double kmax = std::max(curve.max_abs_kappa(), 1e-300);
        double c_tol = 1e-9 * kmax * kmax * kmax;
        double a_tol = 1e-9 * kmax;
        double d_tol = 1e-9 * curve.scale();
        const double probe_frac = 1e-5;
        std::size_t count = scheme.segments.size();
        for (std::size_t k = 0; k < count; ++k) {
            if (shell && k == 0) continue;  // shell start is a structural root
            const SchemeSegment& seg = scheme.segments[k];
            const Correspondence& corr = correspondences[k];
            const Arc& src = corr.source();
            double from = seg.top_forward ? src.t_lo : src.t_hi;
            double to = seg.top_forward ? src.t_hi : src.t_lo;
            double s1 = from;
            double s2 = corr.map(s1);
            double s_plus = from + (to - from) * probe_frac;

            std::size_t prev_k = (k + count - 1) % count;
            const SchemeSegment& prev_seg = scheme.segments[prev_k];
            const Correspondence& prev_corr = correspondences[prev_k];
            const Arc& prev_src = prev_corr.source();
            double prev_from = prev_seg.top_forward ? prev_src.t_lo : prev_src.t_hi;
            double prev_to = prev_seg.top_forward ? prev_src.t_hi : prev_src.t_lo;
            double s_minus = prev_to - (prev_to - prev_from) * probe_frac;

            PairSample pair = make_pair_sample(curve, s1, s2);
            // Before the first segment of a swapped scheme the branch visits
            // the swapped pairs, so the continuation evaluates the defect
            // with the arguments exchanged.
            bool swap_before =
                k == 0 && scheme.endpoints == SchemeEndpoints::closed_swapped_pair;
            auto try_add = [&](std::vector<SingularEvent>& dst, EventKind ev_kind,
                              auto&& defect_fn, double value, double tol) {
                if (std::fabs(value) >= tol) return;
                SingularEvent ev;
                ev.kind = ev_kind;
                ev.s1 = s1;
                ev.s2 = s2;
                ev.line = pair.chord;
                // Crossing check: the defect is continuous along the branch
                // through the junction; a simple root changes sign.
                double before = defect_fn(prev_corr, s_minus, swap_before);
                double after = defect_fn(corr, s_plus, false);
                ev.degenerate = !(before * after < 0.0);
                switch (ev_kind) {
                    case EventKind::asymptote:
                        ev.location = pair.chord.origin_foot();
                        break;
                    default:
                        try {
                            ev.location = css_point(pair);
                        } catch (const AsymptoticPair&) {
                            ev.degenerate = true;
                            ev.location = pair.chord.origin_foot();
                        }
                }
                if (kind == CausticKind::wigner) ev.location = equidistant_point(pair, 0.5);
                if (kind == CausticKind::secant) ev.location = secant_point(pair);
                if (ev_kind == EventKind::cusp && kind == CausticKind::css) {
                    Jet a = curve.eval_jet(ev.s1), b = curve.eval_jet(ev.s2);
                    double term1 = a.kappa_ss * std::pow(b.kappa, 3);
                    double term2 = std::pow(a.kappa, 3) * b.kappa_ss;
                    ev.witness1 = term1 - term2;
                    ev.witness2 = det(a.position - b.position, b.tangent_unit);
                    double chord_len = (a.position - b.position).norm();
                    if (std::fabs(ev.witness1) <=
                            1e-8 * (std::fabs(term1) + std::fabs(term2) + 1e-300) ||
                        std::fabs(ev.witness2) <= 1e-8 * (chord_len + 1e-300))
                        ev.degenerate = true;
                }
                std::vector<SingularEvent> one{ev};
                append_events(dst, one, period, dedupe_tol);
            };
            double sig = branch.sigma;
            auto C_fn = [&](const Correspondence& c, double s, bool swapped) {
                double t = c.map(s);
                return swapped ? cusp_defect(curve, t, s) : cusp_defect(curve, s, t);
            };
            auto A_fn = [&](const Correspondence& c, double s, bool swapped) {
                double t = c.map(s);
                return swapped ? asymptote_defect(curve, t, s, sig)
                               : asymptote_defect(curve, s, t, sig);
            };
            auto W_fn = [&](const Correspondence& c, double s, bool swapped) {
                double t = c.map(s);
                return swapped ? wigner_defect(curve, t, s, sig)
                               : wigner_defect(curve, s, t, sig);
            };
            auto D_fn = [&](const Correspondence& c, double s, bool swapped) {
                double t = c.map(s);
                return swapped ? double_tangent_defect(curve, t, s)
                               : double_tangent_defect(curve, s, t);
            };
            switch (kind) {
                case CausticKind::css:
                    try_add(all_cusps, EventKind::cusp, C_fn, cusp_defect(curve, s1, s2), c_tol);
                    try_add(all_asymptotes, EventKind::asymptote, A_fn,
                            asymptote_defect(curve, s1, s2, sig), a_tol);
                    try_add(all_dts, EventKind::double_tangent, D_fn,
                            double_tangent_defect(curve, s1, s2), d_tol);
                    break;
                case CausticKind::wigner:
                    try_add(all_cusps, EventKind::cusp, W_fn,
                            wigner_defect(curve, s1, s2, sig), a_tol);
                    break;
                case CausticKind::secant:
                    try_add(all_cusps, EventKind::cusp, A_fn,
                            asymptote_defect(curve, s1, s2, sig), a_tol);
                    break;
                default:
                    break;
            }
        }
    }

    branch.cusps = std::move(all_cusps);
    branch.asymptotes = std::move(all_asymptotes);
    branch.double_tangents = std::move(all_dts);
    branch.degenerate_family = degenerate_family;

    // The secant map is antisymmetric: swapped and shell schemes must be
    // prolonged (doubled) for the image to close.
    if (kind == CausticKind::secant &&
        scheme.endpoints != SchemeEndpoints::closed_same_pair) {
        branch.doubled = true;
        branch.closed = true;
        std::size_t n = branch.samples.size();
        if (scheme.endpoints == SchemeEndpoints::closed_swapped_pair) {
            for (std::size_t i = 1; i < n; ++i) {
                BranchSample s = branch.samples[i];
                std::swap(s.s1, s.s2);
                s.point = -s.point;
                branch.samples.push_back(s);
            }
        } else {
            for (std::size_t i = n - 1; i-- > 0;) {
                BranchSample s = branch.samples[i];
                std::swap(s.s1, s.s2);
                s.point = -s.point;
                branch.samples.push_back(s);
            }
        }
        std::vector<SingularEvent> mirrored;
        for (const SingularEvent& ev : branch.cusps) {
            SingularEvent m = ev;
            std::swap(m.s1, m.s2);
            m.location = -m.location;
            mirrored.push_back(m);
        }
        branch.cusps.insert(branch.cusps.end(), mirrored.begin(), mirrored.end());
    }
    return branch;
}

double branch_rotation_number(const CausticBranch& branch) {
    if (!branch.closed) throw OpenBranch("rotation number needs a closed branch");
    // Chord directions of the sampled polyline; the unit normal is transported
    // by picking, at each step, the perpendicular closer to the previous one.
    // Cusps flip the tangent but not the normal, which this rule preserves;
    // across asymptote gaps both tangents align with the asymptote direction.
    std::vector<Vec2> pts;
    pts.reserve(branch.samples.size());
    for (const BranchSample& s : branch.samples) pts.push_back(s.point);
    if (pts.size() >= 2 && distance(pts.front(), pts.back()) < 1e-12) pts.pop_back();
    if (pts.size() < 3) throw OpenBranch("branch polyline too short for a rotation number");

    std::size_t n = pts.size();
    std::vector<Vec2> dirs;
    dirs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 chord = pts[(i + 1) % n] - pts[i];
        double len = chord.norm();
        if (len > 1e-13) dirs.push_back(chord / len);
    }
    if (dirs.size() < 3) throw OpenBranch("degenerate branch polyline");
    Vec2 normal = perp(dirs[0]);
    double total = 0.0;
    for (std::size_t j = 1; j <= dirs.size(); ++j) {
        Vec2 cand = perp(dirs[j % dirs.size()]);
        if (dot(cand, normal) < 0.0) cand = -cand;
        total += std::atan2(det(normal, cand), dot(normal, cand));
        normal = cand;
    }
    // After re-processing the first chord the normal is +-its start value,
    // so the accumulated angle is a multiple of pi; snap to half turns.
    double turns = total / kTwoPi;
    return std::round(turns * 2.0) / 2.0;
}

std::vector<CausticBranch> merge_semibranches(std::vector<CausticBranch> branches, double scale) {
    // Asymptote lines must pair up the two semi-branch ends flanking each
    // asymptote parameter; a line shared by two distinct pair parameters is a
    // double asymptote (non-generic).
    const double angle_tol = 1e-8;
    const double offset_tol = 1e-8 * scale;
    struct Ref {
        std::size_t branch;
        std::size_t event;
    };
    std::vector<Ref> refs;
    for (std::size_t b = 0; b < branches.size(); ++b)
        for (std::size_t e = 0; e < branches[b].asymptotes.size(); ++e) refs.push_back({b, e});
    for (std::size_t i = 0; i < refs.size(); ++i) {
        for (std::size_t j = i + 1; j < refs.size(); ++j) {
            const SingularEvent& x = branches[refs[i].branch].asymptotes[refs[i].event];
            const SingularEvent& y = branches[refs[j].branch].asymptotes[refs[j].event];
            if (same_line(x.line, y.line, angle_tol, offset_tol))
                throw DoubleAsymptote("two parallel pairs share one asymptote line");
        }
    }
    // Record the approach geometry at every asymptote gap.
    for (CausticBranch& branch : branches) {
        branch.approaches.clear();
        for (std::size_t e = 0; e < branch.asymptotes.size(); ++e) {
            const SingularEvent& ev = branch.asymptotes[e];
            // Find the gap nearest the event in traversal order.
            std::size_t gap_index = branch.samples.size();
            for (std::size_t i = 1; i < branch.samples.size(); ++i) {
                if (!branch.samples[i].gap_before) continue;
                if (gap_index == branch.samples.size() ||
                    std::fabs(branch.samples[i].s1 - ev.s1) <
                        std::fabs(branch.samples[gap_index].s1 - ev.s1))
                    gap_index = i;
            }
            if (gap_index == branch.samples.size() || gap_index == 0) continue;
            const Vec2 before = branch.samples[gap_index - 1].point;
            const Vec2 after = branch.samples[gap_index].point;
            AsymptoteApproach approach;
            approach.event_index = static_cast<int>(e);
            approach.opposite_sides =
                ev.line.signed_offset(before) * ev.line.signed_offset(after) < 0.0;
            approach.opposite_ends =
                dot(ev.line.dir, before - ev.line.point) * dot(ev.line.dir, after - ev.line.point) <
                0.0;
            branch.approaches.push_back(approach);
        }
    }
    return branches;
}

TheoremVerdicts classify_and_count(const CurveGeometry& curve,
                                   const ParallelDecomposition& dec,
                                   const std::vector<GlueingScheme>& schemes,
                                   const std::vector<CausticBranch>& css_branches,
                                   const std::vector<CausticBranch>& wigner_branches,
                                   const std::vector<CausticBranch>& secant_branches) {
    TheoremVerdicts verdicts;
    auto add = [&](const std::string& name, bool pass, const std::string& witness) {
        verdicts.entries.push_back({name, pass, witness});
    };
    // Theorem counts use verified events only; degenerate-flagged ones are
    // diagnostics of non-generic input.
    auto verified = [](const std::vector<SingularEvent>& events) {
        std::size_t n = 0;
        for (const SingularEvent& ev : events)
            if (!ev.degenerate) ++n;
        return n;
    };

    // Scheme coverage: sum of segment counts == sum_i C(#Phi_i, 2).
    long expected = 0;
    for (const ParallelArcSet& family : dec.families) {
        long k = static_cast<long>(family.arcs.size());
        expected += k * (k - 1) / 2;
    }
    long got = 0;
    for (const GlueingScheme& s : schemes) got += static_cast<long>(s.segments.size());
    add("scheme_arc_pair_total", got == expected,
        "segments=" + std::to_string(got) + " expected=" + std::to_string(expected));

    // Inflexion bookkeeping.
    std::vector<int> inflexion_points;
    for (std::size_t i = 0; i < dec.division.points.size(); ++i)
        if (dec.division.points[i].tag == DivisionTag::inflexion)
            inflexion_points.push_back(static_cast<int>(i));
    int shell_schemes = 0;
    std::map<int, int> endpoint_uses;
    for (const GlueingScheme& s : schemes) {
        if (s.endpoints != SchemeEndpoints::inflexion_to_inflexion) continue;
        ++shell_schemes;
        endpoint_uses[s.inflexion_start] += 1;
        endpoint_uses[s.inflexion_end] += 1;
    }
    int n_infl = static_cast<int>(inflexion_points.size());
    add("inflexion_branch_count", shell_schemes * 2 == n_infl,
        "shell schemes=" + std::to_string(shell_schemes) +
            " inflexions=" + std::to_string(n_infl));
    bool each_once = true;
    for (int ip : inflexion_points)
        if (endpoint_uses[ip] != 1) each_once = false;
    add("each_inflexion_bounds_one_branch", each_once, "");

    // Even interior inflexion count on every connecting arc.
    bool interior_even = true;
    std::string interior_witness;
    for (const GlueingScheme& s : schemes) {
        if (s.endpoints != SchemeEndpoints::inflexion_to_inflexion) continue;
        double t1 = dec.division.points[s.inflexion_start].t;
        double t2 = dec.division.points[s.inflexion_end].t;
        double period = curve.period();
        double span = normalize_param(t2 - t1, period);
        int inside = 0;
        for (int ip : inflexion_points) {
            double off = normalize_param(dec.division.points[ip].t - t1, period);
            if (off > 1e-9 && off < span - 1e-9) ++inside;
        }
        if (inside % 2 != 0) {
            interior_even = false;
            interior_witness = "scheme " + std::to_string(s.index) + " has " +
                               std::to_string(inside) + " interior inflexions";
        }
    }
    add("interior_inflexions_even", interior_even, interior_witness);

    // Duality: per closed scheme, CSS asymptote count vs secant cusp count.
    bool duality = true;
    std::string duality_witness;
    for (const GlueingScheme& s : schemes) {
        if (s.endpoints == SchemeEndpoints::inflexion_to_inflexion) continue;
        const CausticBranch* css = nullptr;
        const CausticBranch* sc = nullptr;
        for (const CausticBranch& b : css_branches)
            if (b.scheme_index == s.index) css = &b;
        for (const CausticBranch& b : secant_branches)
            if (b.scheme_index == s.index) sc = &b;
        if (!css || !sc) continue;
        long asym = static_cast<long>(verified(css->asymptotes));
        long cusps = static_cast<long>(verified(sc->cusps));
        bool ok = s.endpoints == SchemeEndpoints::closed_same_pair ? cusps == asym
                                                                   : cusps == 2 * asym;
        if (!ok) {
            duality = false;
            duality_witness = "scheme " + std::to_string(s.index) +
                              ": asymptotes=" + std::to_string(asym) +
                              " secant cusps=" + std::to_string(cusps);
        }
    }
    add("secant_duality", duality, duality_witness);

    // Cusp parity vs rotation number on every closed branch.
    bool parity = true;
    std::string parity_witness;
    auto check_parity = [&](const CausticBranch& b, const char* kind) {
        if (!b.closed || !b.rotation.has_value() || b.degenerate_family) return;
        double two_rho = 2.0 * *b.rotation;
        long snapped = std::lround(two_rho);
        bool half = std::llabs(snapped) % 2 == 1;
        bool odd_cusps = verified(b.cusps) % 2 == 1;
        if (half != odd_cusps) {
            parity = false;
            parity_witness = std::string(kind) + " scheme " + std::to_string(b.scheme_index) +
                             ": rotation=" + std::to_string(*b.rotation) +
                             " cusps=" + std::to_string(verified(b.cusps));
        }
    };
    for (const CausticBranch& b : css_branches) check_parity(b, "css");
    for (const CausticBranch& b : wigner_branches) check_parity(b, "wigner");
    for (const CausticBranch& b : secant_branches) check_parity(b, "secant");
    add("cusp_parity", parity, parity_witness);

    // Scheme-type parity of CSS cusps (swapped: odd; same-pair: even).
    bool scheme_parity = true;
    std::string scheme_parity_witness;
    for (const CausticBranch& b : css_branches) {
        if (b.degenerate_family) continue;
        if (b.endpoints == SchemeEndpoints::closed_same_pair && verified(b.cusps) % 2 != 0) {
            scheme_parity = false;
            scheme_parity_witness = "same-pair scheme " + std::to_string(b.scheme_index) +
                                    " has odd cusps";
        }
        if (b.endpoints == SchemeEndpoints::closed_swapped_pair && verified(b.cusps) % 2 != 1) {
            scheme_parity = false;
            scheme_parity_witness = "swapped scheme " + std::to_string(b.scheme_index) +
                                    " has even cusps";
        }
    }
    add("scheme_cusp_parity", scheme_parity, scheme_parity_witness);

    // Rosette pack (convex curves; needs assembled css branches).
    if (dec.convex && !css_branches.empty()) {
        int n = std::abs(rotation_number(curve));
        add("rosette_branch_count", static_cast<int>(schemes.size()) == n,
            "branches=" + std::to_string(schemes.size()) + " n=" + std::to_string(n));
        int odd_branches = 0;
        int asym_branches = 0;
        bool any_degenerate = false;
        for (const CausticBranch& b : css_branches) {
            any_degenerate = any_degenerate || b.degenerate_family;
            if (verified(b.cusps) % 2 == 1) ++odd_branches;
            if (verified(b.asymptotes) > 0) ++asym_branches;
        }
        if (!any_degenerate) {
            add("rosette_one_odd_cusp_branch", odd_branches == 1,
                "odd-cusp branches=" + std::to_string(odd_branches));
            add("rosette_asymptote_branches", asym_branches == n / 2,
                "asymptote-bearing=" + std::to_string(asym_branches) +
                    " expected=" + std::to_string(n / 2));
        }
        bool css_ge_wigner = true;
        std::string w;
        for (const CausticBranch& b : css_branches) {
            if (!b.asymptotes.empty() || b.degenerate_family) continue;
            for (const CausticBranch& wb : wigner_branches) {
                if (wb.scheme_index != b.scheme_index) continue;
                if (verified(b.cusps) < verified(wb.cusps)) {
                    css_ge_wigner = false;
                    w = "scheme " + std::to_string(b.scheme_index) + ": css=" +
                        std::to_string(verified(b.cusps)) + " wigner=" +
                        std::to_string(verified(wb.cusps));
                }
            }
        }
        if (!wigner_branches.empty())
            add("rosette_css_cusps_ge_wigner", css_ge_wigner, w);
    }
    return verdicts;
}

}  // namespace css
