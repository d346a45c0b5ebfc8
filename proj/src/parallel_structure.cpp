#include "css/parallel_structure.hpp"

#include <algorithm>
#include <cmath>

#include "css/roots.hpp"

namespace css {

namespace {

double wrap_into(double t, double lo, double span) {
    double u = std::fmod(t - lo, span);
    if (u < 0.0) u += span;
    return lo + u;
}

/// Circular membership of x in the arc from a to b (CCW on [0, pi)).
bool in_gap_mod_pi(double x, double a, double b) {
    double gap = std::fmod(b - a + kPi, kPi);
    if (gap == 0.0) gap = kPi;
    double off = std::fmod(x - a + kPi, kPi);
    return off > 0.0 && off < gap;
}

double gap_distance_mod_pi(double a, double b) {
    double d = std::fabs(std::fmod(a - b, kPi));
    return std::min(d, kPi - d);
}

}  // namespace

AngleFunction::AngleFunction(const CurveGeometry& curve, double base_t)
    : curve_(curve), base_t_(base_t) {
    double kappa_base = curve.kappa(base_t);
    if (std::fabs(kappa_base) <= 1e-9 * std::max(curve.max_abs_kappa(), 1e-300))
        throw BasePointIsInflexion("angle function base point has vanishing curvature");
    Vec2 v0 = curve.velocity(base_t);
    base_angle_ = std::atan2(v0.y, v0.x);

    // Grid fine enough that no step turns the tangent by more than ~1/4 rad.
    double T = curve.period();
    double max_step = curve.max_abs_kappa() * curve.max_speed() * T;
    grid_n_ = 4096;
    while (grid_n_ < max_step * 8 && grid_n_ < (1 << 22)) grid_n_ *= 2;
    grid_.resize(grid_n_ + 1);
    grid_[0] = 0.0;
    Vec2 prev = v0;
    for (int i = 1; i <= grid_n_; ++i) {
        Vec2 cur = curve.velocity(base_t + T * static_cast<double>(i) / grid_n_);
        grid_[i] = grid_[i - 1] + std::atan2(det(prev, cur), dot(prev, cur));
        prev = cur;
    }
    double turns = grid_[grid_n_] / kTwoPi;
    rotation_ = static_cast<int>(std::lround(turns));
}

double AngleFunction::lift(double t) const {
    double T = curve_.period();
    double rel = t - base_t_;
    double cycles = std::floor(rel / T);
    double u = rel - cycles * T;  // in [0, T)
    int idx = static_cast<int>(std::lround(u / T * grid_n_));
    idx = std::max(0, std::min(grid_n_, idx));
    Vec2 v = curve_.velocity(base_t_ + u);
    double raw = std::atan2(v.y, v.x) - base_angle_;
    double local = grid_[idx] + principal_angle(raw - grid_[idx]);
    return local + cycles * kTwoPi * rotation_;
}

double AngleFunction::phi(double t) const {
    double p = std::fmod(lift(t), kPi);
    if (p < 0.0) p += kPi;
    return p;
}

double AngleFunction::dlift_dt(double t) const {
    Jet jet = curve_.eval_jet(t);
    return jet.kappa * jet.speed;
}

AngleFunction angle_function(const CurveGeometry& curve, double base_t) {
    return AngleFunction(curve, base_t);
}

std::vector<AngleExtremum> local_extrema(const AngleFunction& angles) {
    const CurveGeometry& curve = angles.curve();
    std::vector<AngleExtremum> out;
    for (const InflexionRecord& rec : find_inflexions(curve)) {
        if (rec.kind != InflexionKind::nondegenerate_inflexion)
            throw TangentialPreimage("curve has an undulation or degenerate curvature root");
        AngleExtremum ex;
        ex.t = rec.t;
        ex.phi = angles.phi(rec.t);
        // At kappa = 0 the lift's second derivative is kappa_t * speed.
        ex.is_max = curve.eval_jet(rec.t).kappa_s < 0.0;
        out.push_back(ex);
    }
    return out;
}

double choose_base_point(const CurveGeometry& curve) {
    const int n = 8192;
    double T = curve.period();
    double best_t = 0.0;
    double best_r = -1.0;
    double kappa_floor = 1e-6 * std::max(curve.max_abs_kappa(), 1e-300);
    for (int i = 0; i < n; ++i) {
        double t = T * static_cast<double>(i) / n;
        if (std::fabs(curve.kappa(t)) <= kappa_floor) continue;
        double r = curve.position(t).norm();
        if (r > best_r + 1e-15) {
            best_r = r;
            best_t = t;
        }
    }
    return best_t;
}

DivisionPoints division_points(const CurveGeometry& curve, const AngleFunction& angles) {
    double T = curve.period();
    std::vector<AngleExtremum> extrema = local_extrema(angles);
    std::vector<DivisionPoint> points;

    auto lift_of = [&](double t) { return angles.lift(t); };

    if (extrema.empty()) {
        // Convex case: preimages of the base level, base point included.
        double span_lo = angles.lift(angles.base_t());
        double span_hi = angles.lift(angles.base_t() + T);
        double lo = std::min(span_lo, span_hi), hi = std::max(span_lo, span_hi);
        points.push_back({wrap_into(angles.base_t(), 0.0, T), DivisionTag::base_fixed,
                          angles.phi(angles.base_t())});
        int k_lo = static_cast<int>(std::ceil((lo - 1e-9) / kPi));
        int k_hi = static_cast<int>(std::floor((hi + 1e-9) / kPi));
        for (int k = k_lo; k <= k_hi; ++k) {
            double level = k * kPi;
            if (level <= lo + 1e-12 || level >= hi - 1e-12) continue;  // base endpoints
            std::function<double(double)> f = [&](double t) { return lift_of(t) - level; };
            std::function<double(double)> df = [&](double t) { return angles.dlift_dt(t); };
            for (const Bracket& br :
                 scan_brackets(f, angles.base_t(), angles.base_t() + T, 8192)) {
                double r = bisect(f, br, 1e-12);
                r = newton_polish(f, df, r, br);
                points.push_back({wrap_into(r, 0.0, T), DivisionTag::base_fixed,
                                  angles.phi(r)});
            }
        }
    } else {
        // Monotone pieces of the lift between consecutive extrema.
        std::vector<double> cuts;
        for (const AngleExtremum& ex : extrema) cuts.push_back(ex.t);
        std::sort(cuts.begin(), cuts.end());
        auto is_extremum = [&](double t) {
            for (double c : cuts)
                if (std::fabs(t - c) < 1e-7 * T || std::fabs(std::fabs(t - c) - T) < 1e-7 * T)
                    return true;
            return false;
        };
        for (const AngleExtremum& ex : extrema)
            points.push_back({wrap_into(ex.t, 0.0, T), DivisionTag::inflexion, ex.phi});

        double kappa_floor = 1e-7 * std::max(curve.max_abs_kappa(), 1e-300);
        for (const AngleExtremum& ex : extrema) {
            double level_base = angles.lift(ex.t);
            for (std::size_t piece = 0; piece < cuts.size(); ++piece) {
                double a = cuts[piece];
                double b = piece + 1 < cuts.size() ? cuts[piece + 1] : cuts[0] + T;
                double la = lift_of(a), lb = lift_of(b);
                double lo = std::min(la, lb), hi = std::max(la, lb);
                int k_lo = static_cast<int>(std::ceil((lo - level_base) / kPi - 1e-9));
                int k_hi = static_cast<int>(std::floor((hi - level_base) / kPi + 1e-9));
                for (int k = k_lo; k <= k_hi; ++k) {
                    double level = level_base + k * kPi;
                    if (level <= lo + 1e-12 || level >= hi - 1e-12) continue;  // piece endpoints
                    std::function<double(double)> f = [&](double t) { return lift_of(t) - level; };
                    std::function<double(double)> df = [&](double t) {
                        return angles.dlift_dt(t);
                    };
                    double eps = 1e-12 * T;
                    for (const Bracket& br : scan_brackets(f, a + eps, b - eps, 4096)) {
                        double r = bisect(f, br, 1e-12);
                        r = newton_polish(f, df, r, br);
                        if (is_extremum(r)) continue;
                        if (std::fabs(curve.kappa(r)) <= kappa_floor)
                            throw TangentialPreimage(
                                "tangential preimage of an extremal level at t=" +
                                std::to_string(r));
                        points.push_back({wrap_into(r, 0.0, T),
                                          DivisionTag::parallel_to_inflexion, angles.phi(r)});
                    }
                }
            }
        }
    }

    std::sort(points.begin(), points.end(),
              [](const DivisionPoint& a, const DivisionPoint& b) { return a.t < b.t; });
    // Merge numerically coincident points (an extremum refound as a preimage).
    std::vector<DivisionPoint> merged;
    for (const DivisionPoint& p : points) {
        if (!merged.empty() && std::fabs(p.t - merged.back().t) < 1e-9 * T) {
            if (p.tag == DivisionTag::inflexion) merged.back().tag = DivisionTag::inflexion;
            continue;
        }
        merged.push_back(p);
    }
    if (!merged.empty() && merged.size() > 1 &&
        std::fabs(merged.front().t + T - merged.back().t) < 1e-9 * T)
        merged.pop_back();

    if (merged.size() % 2 != 0)
        throw ParallelStructureError("division point count " + std::to_string(merged.size()) +
                                     " is odd; decomposition failed");

    DivisionPoints out;
    out.points = merged;
    int m2 = static_cast<int>(merged.size());
    out.arcs.resize(m2);
    for (int j = 0; j < m2; ++j) {
        Arc& arc = out.arcs[j];
        arc.index = j;
        arc.t_lo = merged[j].t;
        arc.t_hi = j + 1 < m2 ? merged[j + 1].t : merged[0].t + T;
        arc.lift_lo = angles.lift(arc.t_lo);
        arc.lift_hi = angles.lift(arc.t_hi);
    }
    return out;
}

std::vector<ParallelArcSet> parallel_arc_sets(const CurveGeometry&,
                                              const DivisionPoints& division) {
    std::vector<ParallelArcSet> families;
    std::vector<double> ext_values;
    for (const DivisionPoint& p : division.points)
        if (p.tag == DivisionTag::inflexion) ext_values.push_back(p.phi);

    if (ext_values.empty()) {
        // One family; every arc sweeps a full pi from the base level.
        ParallelArcSet family;
        family.index = 0;
        family.phi_lo = division.points.empty() ? 0.0 : division.points.front().phi;
        family.phi_hi = family.phi_lo;
        for (const Arc& arc : division.arcs) family.arcs.push_back(arc.index);
        return {family};
    }

    std::sort(ext_values.begin(), ext_values.end());
    ext_values.erase(std::unique(ext_values.begin(), ext_values.end(),
                                 [](double a, double b) {
                                     return gap_distance_mod_pi(a, b) < 1e-10;
                                 }),
                     ext_values.end());
    int g = static_cast<int>(ext_values.size());
    families.resize(g);
    for (int i = 0; i < g; ++i) {
        families[i].index = i;
        families[i].phi_lo = ext_values[i];
        families[i].phi_hi = ext_values[(i + 1) % g];
    }
    return families;
}

ParallelDecomposition decompose(const CurveGeometry& curve, const AngleFunction& angles) {
    ParallelDecomposition dec;
    dec.extrema = local_extrema(angles);
    dec.convex = dec.extrema.empty();
    dec.division = division_points(curve, angles);
    dec.families = parallel_arc_sets(curve, dec.division);

    // Assign each arc to the family whose gap contains its interior image,
    // and orient it along the gap.
    for (ParallelArcSet& family : dec.families) family.arcs.clear();
    for (Arc& arc : dec.division.arcs) {
        bool increasing = arc.lift_hi > arc.lift_lo;
        if (dec.convex) {
            arc.family = 0;
            arc.phi_up = true;
        } else {
            double phi_mid = angles.phi(0.5 * (arc.t_lo + arc.t_hi));
            int found = -1;
            for (const ParallelArcSet& family : dec.families) {
                if (in_gap_mod_pi(phi_mid, family.phi_lo, family.phi_hi)) {
                    found = family.index;
                    break;
                }
            }
            if (found < 0)
                throw ParallelStructureError("arc " + std::to_string(arc.index) +
                                             " does not fit any angle gap");
            arc.family = found;
            double phi_start = increasing ? std::fmod(arc.lift_lo, kPi) : std::fmod(arc.lift_hi, kPi);
            if (phi_start < 0.0) phi_start += kPi;
            bool start_at_lo =
                gap_distance_mod_pi(phi_start, dec.families[found].phi_lo) <
                gap_distance_mod_pi(phi_start, dec.families[found].phi_hi);
            // Sweeps upward when the end reached first (in curve direction)
            // is the low end of the gap.
            arc.phi_up = increasing ? start_at_lo : !start_at_lo;
        }
    }
    for (const Arc& arc : dec.division.arcs)
        dec.families[arc.family].arcs.push_back(arc.index);
    return dec;
}

int ParallelDecomposition::locate_arc(double s, double period) const {
    if (division.arcs.empty()) return -1;
    double lo = division.arcs.front().t_lo;
    double u = lo + std::fmod(s - lo, period);
    if (u < lo) u += period;
    for (const Arc& arc : division.arcs)
        if (u >= arc.t_lo - 1e-12 && u <= arc.t_hi + 1e-12) return arc.index;
    return static_cast<int>(division.arcs.size()) - 1;
}

Correspondence::Correspondence(const AngleFunction& angles, const Arc& source, const Arc& target)
    : angles_(&angles), source_(source), target_(target) {
    // Cached monotone samples of the target lift for bracketing.
    const int n = 512;
    cache_t_.resize(n + 1);
    cache_lift_.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        double t = target_.t_lo + (target_.t_hi - target_.t_lo) * static_cast<double>(i) / n;
        cache_t_[i] = t;
        cache_lift_[i] = angles.lift(t);
    }
    // The lift offset between corresponding points is a fixed multiple of pi.
    // The correct multiple puts the source midpoint level within pi/2 of the
    // target's midpoint level (sweeps are at most pi long).
    double mid_lift = angles.lift(0.5 * (source_.t_lo + source_.t_hi));
    double target_mid = 0.5 * (target_.lift_lo + target_.lift_hi);
    level_shift_ = std::round((target_mid - mid_lift) / kPi) * kPi;
    double mid_t = map(0.5 * (source_.t_lo + source_.t_hi));
    Vec2 v1 = angles.curve().velocity(0.5 * (source_.t_lo + source_.t_hi));
    Vec2 v2 = angles.curve().velocity(mid_t);
    sigma_ = dot(v1, v2) >= 0.0 ? 1.0 : -1.0;
}

double Correspondence::map(double s) const {
    double level = angles_->lift(s) + level_shift_;
    bool increasing = cache_lift_.back() > cache_lift_.front();
    double lo_lift = increasing ? cache_lift_.front() : cache_lift_.back();
    double hi_lift = increasing ? cache_lift_.back() : cache_lift_.front();
    if (level <= lo_lift) return increasing ? target_.t_lo : target_.t_hi;
    if (level >= hi_lift) return increasing ? target_.t_hi : target_.t_lo;

    // Bracket on the cached samples, then safeguarded Newton.
    int lo = 0, hi = static_cast<int>(cache_t_.size()) - 1;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        bool below = increasing ? cache_lift_[mid] < level : cache_lift_[mid] > level;
        if (below)
            lo = mid;
        else
            hi = mid;
    }
    double t_lo = cache_t_[lo], t_hi = cache_t_[hi];
    double x = 0.5 * (t_lo + t_hi);
    for (int iter = 0; iter < 100 && t_hi - t_lo > 1e-13; ++iter) {
        double f = angles_->lift(x) - level;
        if (f == 0.0) break;
        if ((f < 0.0) == increasing)
            t_lo = x;
        else
            t_hi = x;
        double d = angles_->dlift_dt(x);
        double next = d != 0.0 ? x - f / d : 0.5 * (t_lo + t_hi);
        if (!(next > t_lo && next < t_hi)) next = 0.5 * (t_lo + t_hi);
        if (std::fabs(next - x) < 1e-14) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

Correspondence solve_correspondence(const AngleFunction& angles,
                                    const ParallelDecomposition& decomposition,
                                    int arc_a, int arc_b) {
    const auto& arcs = decomposition.division.arcs;
    if (arc_a < 0 || arc_b < 0 || arc_a >= static_cast<int>(arcs.size()) ||
        arc_b >= static_cast<int>(arcs.size()))
        throw NotSameFamily("arc index out of range");
    if (arc_a == arc_b) throw NotSameFamily("correspondence needs two distinct arcs");
    if (arcs[arc_a].family != arcs[arc_b].family)
        throw NotSameFamily("arcs " + std::to_string(arc_a) + " and " + std::to_string(arc_b) +
                            " lie in different parallel-arc sets");
    return Correspondence(angles, arcs[arc_a], arcs[arc_b]);
}

}  // namespace css
