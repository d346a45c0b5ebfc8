#include "css/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace css {

namespace {

double lerp(double a, double b, double u) { return a + (b - a) * u; }

/// Proper intersection test of segments [a1,a2], [b1,b2].
bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2,
                        double& ua, double& ub) {
    Vec2 r = a2 - a1;
    Vec2 s = b2 - b1;
    double d = det(r, s);
    if (std::fabs(d) < 1e-30) return false;
    Vec2 qp = b1 - a1;
    ua = det(qp, s) / d;
    ub = det(qp, r) / d;
    return ua > 0.0 && ua < 1.0 && ub > 0.0 && ub < 1.0;
}

struct PolySegment {
    Vec2 a, b;
    double s1_a = 0.0, s1_b = 0.0;  // source parameters of the endpoints
    int corr_index = -1;
};

struct CrossHit {
    double s_i = 0.0, s_j = 0.0;  // refined source parameters
    int corr_i = -1, corr_j = -1;
    Vec2 where;
};

/// All pairwise intersections between polyline segments, bucketed on a grid.
std::vector<CrossHit> find_crossings(const std::vector<PolySegment>& segs, double cell,
                                     double param_gap, double period) {
    std::map<std::pair<long, long>, std::vector<int>> grid;
    auto keys_of = [&](const PolySegment& s, std::vector<std::pair<long, long>>& out) {
        out.clear();
        long x0 = static_cast<long>(std::floor(std::min(s.a.x, s.b.x) / cell));
        long x1 = static_cast<long>(std::floor(std::max(s.a.x, s.b.x) / cell));
        long y0 = static_cast<long>(std::floor(std::min(s.a.y, s.b.y) / cell));
        long y1 = static_cast<long>(std::floor(std::max(s.a.y, s.b.y) / cell));
        for (long x = x0; x <= x1; ++x)
            for (long y = y0; y <= y1; ++y) out.push_back({x, y});
    };
    std::vector<std::pair<long, long>> keys;
    std::vector<CrossHit> hits;
    auto param_close = [&](double a, double b) {
        double d = std::fabs(a - b);
        d = std::fmod(d, period);
        d = std::min(d, period - d);
        return d < param_gap;
    };
    for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
        keys_of(segs[i], keys);
        std::set<int> candidates;
        for (const auto& key : keys) {
            auto it = grid.find(key);
            if (it != grid.end())
                for (int j : it->second) candidates.insert(j);
        }
        for (int j : candidates) {
            const PolySegment& A = segs[i];
            const PolySegment& B = segs[j];
            if (A.corr_index == B.corr_index && param_close(A.s1_a, B.s1_a)) continue;
            double ua, ub;
            if (!segments_intersect(A.a, A.b, B.a, B.b, ua, ub)) continue;
            CrossHit hit;
            hit.s_i = lerp(A.s1_a, A.s1_b, ua);
            hit.s_j = lerp(B.s1_a, B.s1_b, ub);
            hit.corr_i = A.corr_index;
            hit.corr_j = B.corr_index;
            hit.where = A.a + (A.b - A.a) * ua;
            hits.push_back(hit);
        }
        for (const auto& key : keys) grid[key].push_back(i);
    }
    return hits;
}

}  // namespace

bool curved_same_side(const PairSample& pair, double kappa_floor) {
    double floor = kappa_floor * std::max(std::fabs(pair.a.kappa), std::fabs(pair.b.kappa));
    floor = std::max(floor, 1e-300);
    if (std::fabs(pair.a.kappa) <= floor || std::fabs(pair.b.kappa) <= floor ||
        std::fabs(pair.a.kappa) <= kappa_floor || std::fabs(pair.b.kappa) <= kappa_floor)
        throw InflexionAtPair("curved_same_side at a vanishing-curvature point");
    return pair.sigma * pair.a.kappa * pair.b.kappa > 0.0;
}

GenericityReport check_genericity(const CurveGeometry& curve, const AngleFunction& angles,
                                  const ParallelDecomposition& dec, int resolution) {
    GenericityReport report;
    report.resolution = resolution;
    const double period = curve.period();
    const double scale = curve.scale();
    const double kmax = std::max(curve.max_abs_kappa(), 1e-300);
    std::string res_note = "no violation found at resolution " + std::to_string(resolution);

    auto add = [&](const std::string& id, ConditionStatus status, const std::string& note,
                   double margin, std::vector<double> witness = {}) {
        report.entries.push_back({id, status, note, margin, std::move(witness)});
    };

    // Correspondences of every unordered arc pair, via the maximal schemes.
    std::vector<GlueingScheme> schemes = enumerate_maximal_schemes(dec);
    struct CorrSlot {
        Correspondence corr;
        bool shell_first = false;
        bool shell_last = false;
    };
    std::vector<CorrSlot> slots;
    for (const GlueingScheme& scheme : schemes) {
        bool shell = scheme.endpoints == SchemeEndpoints::inflexion_to_inflexion;
        for (std::size_t k = 0; k < scheme.segments.size(); ++k) {
            const SchemeSegment& seg = scheme.segments[k];
            CorrSlot slot{solve_correspondence(angles, dec, seg.top_arc, seg.bottom_arc),
                          shell && k == 0, shell && k + 1 == scheme.segments.size()};
            slots.push_back(std::move(slot));
        }
    }

    // --- (i) regularity, transversal self-crossings, nondegenerate inflexions.
    {
        bool ok = true;
        std::string note;
        double margin = curve.min_speed();
        std::vector<double> witness;
        for (const InflexionRecord& rec : find_inflexions(curve)) {
            if (rec.kind != InflexionKind::nondegenerate_inflexion) {
                ok = false;
                note = "undulation or degenerate curvature root at t=" + std::to_string(rec.t);
                witness = {rec.t};
            }
        }
        // Self-crossings of the curve: polyline intersections refined by Newton.
        const int n = 8192;
        std::vector<PolySegment> segs(n);
        for (int i = 0; i < n; ++i) {
            double s0 = period * static_cast<double>(i) / n;
            double s1 = period * static_cast<double>(i + 1) / n;
            segs[i] = {curve.position(s0), curve.position(s1), s0, s1, 0};
        }
        double cross_margin = 1.0;
        for (const CrossHit& hit : find_crossings(segs, scale / 16.0, 16.0 * period / n, period)) {
            double s = hit.s_i, t = hit.s_j;
            for (int iter = 0; iter < 30; ++iter) {
                Vec2 F = curve.position(s) - curve.position(t);
                Vec2 ds = curve.velocity(s), dt = curve.velocity(t);
                double d = det(ds, -dt);
                if (std::fabs(d) < 1e-30) break;
                // Solve [ds, -dt] * (hs, ht) = -F.
                double hs = det(-F, -dt) / d;
                double ht = det(ds, -F) / d;
                s += hs;
                t += ht;
                if (std::fabs(hs) + std::fabs(ht) < 1e-14) break;
            }
            Vec2 t1 = curve.velocity(s), t2 = curve.velocity(t);
            double transversality = std::fabs(det(t1 / t1.norm(), t2 / t2.norm()));
            cross_margin = std::min(cross_margin, transversality);
            if (transversality < 1e-7) {
                ok = false;
                note = "tangential self-crossing near s=" + std::to_string(s);
                witness = {s, t};
            }
        }
        add("i", ok ? ConditionStatus::pass : ConditionStatus::fail,
            ok ? res_note : note, std::min(margin, cross_margin), witness);
    }

    // --- (ii) no parallel pair of two inflexions.
    {
        std::vector<double> infl;
        for (const DivisionPoint& p : dec.division.points)
            if (p.tag == DivisionTag::inflexion) infl.push_back(p.t);
        bool ok = true;
        double margin = kPi;
        std::vector<double> witness;
        for (std::size_t i = 0; i < infl.size(); ++i) {
            for (std::size_t j = i + 1; j < infl.size(); ++j) {
                double d = mod_pi_distance(angles.lift(infl[i]) - angles.lift(infl[j]));
                margin = std::min(margin, d);
                if (d < 1e-7) {
                    ok = false;
                    witness = {infl[i], infl[j]};
                }
            }
        }
        add("ii", ok ? ConditionStatus::pass : ConditionStatus::fail,
            ok ? res_note : "two inflexions have parallel tangents", margin, witness);
    }

    // Detector passes per correspondence.
    struct EventSets {
        std::vector<SingularEvent> cusps, asymptotes, dts;
        bool c_degenerate = false, d_degenerate = false;
    };
    std::vector<EventSets> events(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        DetectorConfig det;
        det.scan_samples = resolution;
        const double shell_skip = 1e-3;
        if (slots[i].shell_first) det.skip_lo = shell_skip;
        if (slots[i].shell_last) det.skip_hi = shell_skip;
        DetectionResult c = detect_cusps(curve, slots[i].corr, det);
        DetectionResult a = detect_asymptotes(curve, slots[i].corr, det);
        DetectionResult d = detect_double_tangents(curve, slots[i].corr, det);
        events[i] = {c.events, a.events, d.events, c.degenerate_family, d.degenerate_family};
    }

    // --- (iii) double-tangent pairs have nonzero curvatures.
    {
        bool ok = true;
        double margin = 1.0;
        std::string note;
        std::vector<double> witness;
        for (const EventSets& ev : events) {
            for (const SingularEvent& e : ev.dts) {
                double m = std::fabs(curve.kappa(e.s1) * curve.kappa(e.s2)) / (kmax * kmax);
                margin = std::min(margin, m);
                if (m < 1e-7) {
                    ok = false;
                    note = "double tangent with vanishing curvature";
                    witness = {e.s1, e.s2};
                }
            }
        }
        add("iii", ok ? ConditionStatus::pass : ConditionStatus::fail, ok ? res_note : note,
            margin, witness);
    }

    // --- (iv) cusp roots are first-order (second-order defect nonzero).
    {
        bool ok = true;
        double margin = 1.0;
        std::string note;
        std::vector<double> witness;
        for (const EventSets& ev : events) {
            if (ev.c_degenerate) {
                ok = false;
                note = "cusp defect vanishes identically (degenerate family)";
                margin = 0.0;
            }
            for (const SingularEvent& e : ev.cusps) {
                Jet a = curve.eval_jet(e.s1), b = curve.eval_jet(e.s2);
                double term1 = a.kappa_ss * b.kappa * b.kappa * b.kappa;
                double term2 = a.kappa * a.kappa * a.kappa * b.kappa_ss;
                double m = std::fabs(e.witness1) /
                           (std::fabs(term1) + std::fabs(term2) + 1e-300);
                margin = std::min(margin, m);
                if (e.degenerate) {
                    ok = false;
                    note = "degenerate cusp root at s1=" + std::to_string(e.s1);
                    witness = {e.s1, e.s2};
                }
            }
        }
        add("iv", ok ? ConditionStatus::pass : ConditionStatus::fail, ok ? res_note : note,
            margin, witness);
    }

    auto relative_cusp_defect = [&](double s1, double s2) {
        Jet a = curve.eval_jet(s1), b = curve.eval_jet(s2);
        double term1 = a.kappa_s * b.kappa * b.kappa;
        double term2 = a.kappa * a.kappa * b.kappa_s;
        return std::fabs(term1 - term2) / (std::fabs(term1) + std::fabs(term2) + 1e-300);
    };

    // --- (v) asymptote roots are not cusp roots.
    {
        bool ok = true;
        double margin = 1.0;
        std::string note;
        std::vector<double> witness;
        for (const EventSets& ev : events) {
            for (const SingularEvent& e : ev.asymptotes) {
                double m = relative_cusp_defect(e.s1, e.s2);
                margin = std::min(margin, m);
                if (m < 1e-7) {
                    ok = false;
                    note = "asymptote coincides with a singular point";
                    witness = {e.s1, e.s2};
                }
            }
        }
        add("v", ok ? ConditionStatus::pass : ConditionStatus::fail, ok ? res_note : note,
            margin, witness);
    }

    // --- (vi) cusp roots and double-tangent roots never coincide.
    {
        bool ok = true;
        double margin = 1.0;
        std::string note;
        std::vector<double> witness;
        for (const EventSets& ev : events) {
            for (const SingularEvent& e : ev.cusps) {
                double chord =
                    (curve.position(e.s1) - curve.position(e.s2)).norm() + 1e-300;
                double m = std::fabs(double_tangent_defect(curve, e.s1, e.s2)) / chord;
                margin = std::min(margin, m);
                if (m < 1e-7) {
                    ok = false;
                    note = "cusp lies on a double tangent";
                    witness = {e.s1, e.s2};
                }
            }
            for (const SingularEvent& e : ev.dts) {
                double m = relative_cusp_defect(e.s1, e.s2);
                margin = std::min(margin, m);
                if (m < 1e-7) {
                    ok = false;
                    note = "double tangent at a singular point";
                    witness = {e.s1, e.s2};
                }
            }
        }
        add("vi", ok ? ConditionStatus::pass : ConditionStatus::fail, ok ? res_note : note,
            margin, witness);
    }

    // --- (vii) no double asymptotes.
    {
        bool ok = true;
        double margin = 1.0;
        std::string note;
        std::vector<double> witness;
        std::vector<const SingularEvent*> asym;
        for (const EventSets& ev : events)
            for (const SingularEvent& e : ev.asymptotes) asym.push_back(&e);
        for (std::size_t i = 0; i < asym.size(); ++i) {
            for (std::size_t j = i + 1; j < asym.size(); ++j) {
                double pd = std::fabs(asym[i]->s1 - asym[j]->s1);
                pd = std::min(std::fmod(pd, period), period - std::fmod(pd, period));
                if (pd < 1e-8 * period) continue;  // the same pair seen twice
                double ang = std::fabs(det(asym[i]->line.dir, asym[j]->line.dir));
                double off = std::fabs(asym[i]->line.signed_offset(asym[j]->line.point)) / scale;
                double m = std::max(ang, off);
                margin = std::min(margin, m);
                if (same_line(asym[i]->line, asym[j]->line, 1e-8, 1e-8 * scale)) {
                    ok = false;
                    note = "double asymptote";
                    witness = {asym[i]->s1, asym[j]->s1};
                }
            }
        }
        add("vii", ok ? ConditionStatus::pass : ConditionStatus::fail, ok ? res_note : note,
            margin, witness);
    }

    // --- (viii) CSS self-crossings are transversal and away from cusp roots.
    {
        bool ok = true;
        double margin = 1.0;
        std::string note;
        std::vector<double> witness;
        std::vector<PolySegment> segs;
        const double band = 1e-6 * kmax;
        for (std::size_t ci = 0; ci < slots.size(); ++ci) {
            const Correspondence& corr = slots[ci].corr;
            const Arc& src = corr.source();
            int n = std::max(256, resolution / 4);
            Vec2 prev;
            double prev_s = 0.0;
            bool have_prev = false;
            for (int i = 0; i <= n; ++i) {
                double u = static_cast<double>(i) / n;
                if (slots[ci].shell_first) u = 1e-3 + u * (1.0 - 1e-3);
                if (slots[ci].shell_last) u = u * (1.0 - 1e-3);
                double s = lerp(src.t_lo, src.t_hi, u);
                PairSample pair = make_pair_sample(curve, s, corr.map(s));
                double a_val = pair.a.kappa - pair.sigma * pair.b.kappa;
                if (std::fabs(a_val) < band) {
                    have_prev = false;
                    continue;
                }
                Vec2 point = css_point(pair);
                if (point.norm() > 64.0 * scale) {
                    have_prev = false;  // asymptote neighbourhood
                    continue;
                }
                if (have_prev)
                    segs.push_back({prev, point, prev_s, s, static_cast<int>(ci)});
                prev = point;
                prev_s = s;
                have_prev = true;
            }
        }
        const Arc* first_arc = dec.division.arcs.empty() ? nullptr : &dec.division.arcs[0];
        double arc_span = first_arc ? (first_arc->t_hi - first_arc->t_lo) : period;
        for (const CrossHit& hit : find_crossings(segs, scale / 16.0, 0.05 * arc_span, period)) {
            double s_i = hit.s_i, s_j = hit.s_j;
            int ci = hit.corr_i, cj = hit.corr_j;
            Vec2 chord_i = curve.position(slots[ci].corr.map(s_i)) - curve.position(s_i);
            Vec2 chord_j = curve.position(slots[cj].corr.map(s_j)) - curve.position(s_j);
            double trans = std::fabs(det(chord_i / chord_i.norm(), chord_j / chord_j.norm()));
            double c_i = relative_cusp_defect(s_i, slots[ci].corr.map(s_i));
            double c_j = relative_cusp_defect(s_j, slots[cj].corr.map(s_j));
            double m = std::min({trans, c_i, c_j});
            margin = std::min(margin, m);
            if (m < 1e-7) {
                ok = false;
                note = "non-transversal CSS self-crossing or crossing at a cusp";
                witness = {s_i, s_j};
            }
        }
        add("viii", ok ? ConditionStatus::pass : ConditionStatus::fail, ok ? res_note : note,
            margin, witness);
    }

    report.overall = true;
    for (const GenericityEntry& e : report.entries)
        if (e.status != ConditionStatus::pass) report.overall = false;
    return report;
}

ArcEndpointData extract_arc_pair(const CurveGeometry& curve, const Correspondence& corr,
                                 double u0, double u1, bool flip) {
    const Arc& src = corr.source();
    double sa0 = lerp(src.t_lo, src.t_hi, flip ? u1 : u0);
    double sa1 = lerp(src.t_lo, src.t_hi, flip ? u0 : u1);
    double p_sign = flip ? -1.0 : 1.0;

    ArcEndpointData data;
    data.p0 = curve.position(sa0);
    data.p1 = curve.position(sa1);
    Vec2 va0 = curve.velocity(sa0), va1 = curve.velocity(sa1);
    data.tp0 = normalized(va0) * p_sign;
    data.tp1 = normalized(va1) * p_sign;
    data.kP0 = curve.kappa(sa0) * p_sign;
    data.kP1 = curve.kappa(sa1) * p_sign;

    double tb0 = corr.map(sa0), tb1 = corr.map(sa1);
    data.q0 = curve.position(tb0);
    data.q1 = curve.position(tb1);
    Vec2 vb0 = curve.velocity(tb0), vb1 = curve.velocity(tb1);
    // Orient Q so the pairing runs in opposite directions: t_Q = -t_P.
    double q_sign = dot(data.tp0, normalized(vb0)) > 0.0 ? -1.0 : 1.0;
    data.tq0 = normalized(vb0) * q_sign;
    data.tq1 = normalized(vb1) * q_sign;
    data.kQ0 = curve.kappa(tb0) * q_sign;
    data.kQ1 = curve.kappa(tb1) * q_sign;
    return data;
}

namespace {

void require(std::vector<std::string>& failed, bool ok, const char* what) {
    if (!ok) failed.push_back(what);
}

}  // namespace

CertificateVerdict certificate_curvature_sign(const ArcEndpointData& data) {
    std::vector<std::string> failed;
    const double tol = 1e-9;
    require(failed, std::fabs(det(data.tp0, data.tq0)) <= 1e-7, "i: endpoint tangents parallel at p0,q0");
    require(failed, std::fabs(det(data.tp1, data.tq1)) <= 1e-7, "i: endpoint tangents parallel at p1,q1");
    require(failed, dot(data.tp0, data.tq0) < 0.0, "pairing: opposite directions at p0,q0");
    require(failed, dot(data.tp1, data.tq1) < 0.0, "pairing: opposite directions at p1,q1");
    require(failed, data.kP0 <= tol, "iii: kappa_P(p0) <= 0");
    require(failed, data.kP1 < -tol, "iii: kappa_P(p1) < 0");
    require(failed, data.kQ0 > tol, "iii: kappa_Q(q0) > 0");
    require(failed, data.kQ1 <= tol, "iii: kappa_Q(q1) <= 0");
    // Same-side curving near (p0, q0): with opposite-direction pairing this
    // is kappa_P * kappa_Q < 0 just inside the arcs.
    double kP_near0 = std::fabs(data.kP0) > tol ? data.kP0 : data.kP1;
    require(failed, kP_near0 * data.kQ0 < 0.0, "iv: curved in the same side near p0,q0");
    if (!failed.empty()) throw HypothesesUnmet(std::move(failed));

    double product = (data.kQ0 + data.kP0) * (data.kQ1 + data.kP1);
    return product < 0.0 ? CertificateVerdict::asymptote_certified
                         : CertificateVerdict::inconclusive;
}

CertificateVerdict certificate_parallelogram(const ArcEndpointData& data) {
    std::vector<std::string> failed;
    require(failed, std::fabs(det(data.tp0, data.tq0)) <= 1e-7, "i: endpoint tangents parallel at p0,q0");
    require(failed, std::fabs(det(data.tp1, data.tq1)) <= 1e-7, "i: endpoint tangents parallel at p1,q1");
    require(failed, dot(data.tp0, data.tq0) < 0.0, "pairing: opposite directions at p0,q0");
    require(failed, dot(data.tp1, data.tq1) < 0.0, "pairing: opposite directions at p1,q1");
    require(failed, data.kP0 > 0.0 && data.kP1 > 0.0, "ii: kappa_P > 0");
    require(failed, data.kQ0 < 0.0 && data.kQ1 < 0.0, "ii: kappa_Q < 0");
    double turn_p = std::fabs(std::atan2(det(data.tp0, data.tp1), dot(data.tp0, data.tp1)));
    double turn_q = std::fabs(std::atan2(det(data.tq0, data.tq1), dot(data.tq0, data.tq1)));
    require(failed, turn_p < kPi - 1e-9 && turn_q < kPi - 1e-9,
            "iii: |rotation number| < 1/2");
    require(failed, std::fabs(turn_p - turn_q) < 1e-6, "iii: equal |rotation numbers|");
    require(failed, data.kP0 * data.kQ0 < 0.0 && data.kP1 * data.kQ1 < 0.0,
            "v: curved in the same side at the endpoint pairs");
    if (!failed.empty()) throw HypothesesUnmet(std::move(failed));

    if (std::fabs(det(data.tq0, data.tq1)) < 1e-12)
        throw DegenerateConstruction("endpoint tangents of Q are parallel");

    Line tangent_q0{data.q0, data.tq0};
    Line tangent_q1{data.q1, data.tq1};
    Vec2 shift = data.q0 - data.p0;
    Vec2 p1_shifted = data.p1 + shift;
    Line l0{data.q0, data.tq1};
    Line lp{p1_shifted, data.tq0};

    auto c = intersect_lines(lp, tangent_q1, 1e-12);
    auto b0 = intersect_lines(l0, lp, 1e-12);
    auto b1 = intersect_lines(tangent_q0, tangent_q1, 1e-12);
    if (!c || !b0 || !b1) throw DegenerateConstruction("required intersection at infinity");

    auto ratio = [](const Vec2& u, const Vec2& v) {
        double n2 = v.norm2();
        if (n2 < 1e-24) throw DegenerateConstruction("degenerate ratio denominator");
        return dot(u, v) / n2;
    };
    double rho1 = ratio(*c - *b1, data.q1 - *b1);
    double rho2 = ratio(*c - *b0, p1_shifted - *b0);
    double rho_max = std::max(rho1, rho2);
    double rho_min = std::min(rho1, rho2);
    return (rho_max < 1.0 || rho_min > 1.0) ? CertificateVerdict::asymptote_certified
                                            : CertificateVerdict::inconclusive;
}

}  // namespace css
