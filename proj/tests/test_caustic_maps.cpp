#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "css/caustic_maps.hpp"
#include "test_fixtures.hpp"

using namespace css;
using css::testing::run_pipeline;

namespace {

Correspondence first_correspondence(const css::testing::Pipeline& p, int a = 0, int b = 1) {
    const auto& arcs = p.decomposition.families[0].arcs;
    return solve_correspondence(p.angles, p.decomposition, arcs[a], arcs[b]);
}

}  // namespace

TEST_CASE("css_point of central ovals is the centre") {
    CurveGeometry circle = build_curve(make_circle_spec());
    PairSample pair = make_pair_sample(circle, 0.0, kPi);
    CHECK(pair.sigma == doctest::Approx(-1.0));
    CHECK(pair.standard);
    Vec2 q = css_point(pair);
    CHECK(q.norm() < 1e-12);

    CurveGeometry ellipse = build_curve(make_ellipse_spec(2.0, 1.0));
    Vec2 qe = css_point(make_pair_sample(ellipse, 0.0, kPi));
    CHECK(qe.norm() < 1e-12);
}

TEST_CASE("css_point rejects asymptotic pairs") {
    // Same-direction tangents with equal curvatures: denominator vanishes.
    PairSample pair;
    pair.a.position = {0.0, 0.0};
    pair.b.position = {0.0, 1.0};
    pair.a.d1 = pair.b.d1 = {1.0, 0.0};
    pair.a.kappa = pair.b.kappa = 1.0;
    pair.sigma = 1.0;
    pair.chord = Line::through(pair.a.position, pair.b.position);
    CHECK_THROWS_AS(css_point(pair), AsymptoticPair);
}

TEST_CASE("equidistant and secant point maps") {
    CurveGeometry circle = build_curve(make_circle_spec());
    PairSample pair = make_pair_sample(circle, 0.0, kPi);
    CHECK(distance(equidistant_point(pair, 1.0), pair.a.position) < 1e-15);
    CHECK(distance(equidistant_point(pair, 0.0), pair.b.position) < 1e-15);
    CHECK(equidistant_point(pair, 0.5).norm() < 1e-15);
    Vec2 sc = secant_point(pair);
    CHECK(sc.x == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(sc.y == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("chord membership of css points") {
    std::mt19937 rng(3);
    for (const CurveSpec& spec :
         {make_paper_rosette_spec(), css::testing::fixture_two_inflexion()}) {
        auto p = run_pipeline(spec);
        std::uniform_real_distribution<double> pick(0.0, 1.0);
        int checked = 0;
        for (const GlueingScheme& scheme : p.schemes) {
            for (const SchemeSegment& seg : scheme.segments) {
                Correspondence corr =
                    solve_correspondence(p.angles, p.decomposition, seg.top_arc, seg.bottom_arc);
                const Arc& src = corr.source();
                for (int i = 0; i < 200 && checked < 1000; ++i) {
                    double s = src.t_lo + (src.t_hi - src.t_lo) * pick(rng);
                    PairSample pair = make_pair_sample(p.curve, s, corr.map(s));
                    double a_val = pair.a.kappa - pair.sigma * pair.b.kappa;
                    if (std::fabs(a_val) < 1e-6 * p.curve.max_abs_kappa()) continue;
                    Vec2 q = css_point(pair);
                    CHECK(std::fabs(pair.chord.signed_offset(q)) < 1e-9 * p.curve.scale());
                    ++checked;
                }
            }
        }
        CHECK(checked > 500);
    }
}

TEST_CASE("cusp detection on the oval matches the brute-force oracle exactly") {
    // Support curves have tangent angle t + pi/2, so the antipodal partner of
    // t is exactly t + pi: the defect can be scanned without the solver.
    CurveGeometry oval = build_curve(css::testing::support_oval(0.1));
    const int grid = 20000;
    int crossings = 0;
    double shift = 0.05;  // keep the seam root interior
    double prev = cusp_defect(oval, shift, shift + kPi);
    for (int i = 1; i <= grid; ++i) {
        double t = shift + kPi * i / grid;
        double v = cusp_defect(oval, t, t + kPi);
        if ((prev < 0.0) != (v < 0.0)) ++crossings;
        prev = v;
    }
    CHECK(crossings == 3);

    auto p = run_pipeline(css::testing::support_oval(0.1));
    REQUIRE(p.schemes.size() == 1);
    auto branch = assemble_branch(p.curve, p.angles, p.decomposition, p.schemes[0],
                                  CausticKind::css);
    CHECK(branch.cusps.size() == static_cast<std::size_t>(crossings));
    CHECK(branch.cusps.size() % 2 == 1);
    CHECK(branch.cusps.size() >= 3);
}

TEST_CASE("ellipse correspondence has an identically-zero cusp defect") {
    auto p = run_pipeline(make_ellipse_spec(2.0, 1.0));
    Correspondence corr = first_correspondence(p);
    DetectionResult result = detect_cusps(p.curve, corr);
    CHECK(result.degenerate_family);
    CHECK(result.events.empty());
}

TEST_CASE("rosette cusps: total odd, per-scheme counts from independent scan") {
    auto p = run_pipeline(make_paper_rosette_spec());
    std::size_t total = 0;
    for (const GlueingScheme& scheme : p.schemes) {
        auto branch =
            assemble_branch(p.curve, p.angles, p.decomposition, scheme, CausticKind::css);
        total += branch.cusps.size();
    }
    CHECK(total % 2 == 1);
    CHECK(total == 9);  // 6 on the full-loop scheme + 3 on the swapped scheme
}

TEST_CASE("asymptote detection matches the paper parameters") {
    auto p = run_pipeline(make_paper_rosette_spec());
    bool found_t0 = false;
    double t0 = 5.38207;
    for (const GlueingScheme& scheme : p.schemes) {
        auto branch =
            assemble_branch(p.curve, p.angles, p.decomposition, scheme, CausticKind::css);
        for (const SingularEvent& ev : branch.asymptotes) {
            double d = std::fabs(std::remainder(ev.s1 - t0, kTwoPi));
            if (d < 5e-4) {
                found_t0 = true;
                // The partner sits one full turn further along.
                CHECK(std::fabs(std::remainder(ev.s2 - ev.s1 - kTwoPi, 2.0 * kTwoPi)) < 1e-6);
            }
        }
    }
    CHECK(found_t0);
}

TEST_CASE("double-tangent root t1 is present and is not an asymptote root") {
    auto p = run_pipeline(make_paper_rosette_spec());
    double t1 = 5.26053;
    bool found_t1 = false;
    double nearest_asymptote = 1e300;
    for (const GlueingScheme& scheme : p.schemes) {
        auto branch =
            assemble_branch(p.curve, p.angles, p.decomposition, scheme, CausticKind::css);
        for (const SingularEvent& ev : branch.double_tangents)
            if (std::fabs(std::remainder(ev.s1 - t1, kTwoPi)) < 5e-4) found_t1 = true;
        for (const SingularEvent& ev : branch.asymptotes)
            nearest_asymptote =
                std::min(nearest_asymptote, std::fabs(std::remainder(ev.s1 - t1, kTwoPi)));
    }
    CHECK(found_t1);
    CHECK(nearest_asymptote > 1e-2);
}

TEST_CASE("oval correspondence has no asymptotes and no double tangents") {
    auto p = run_pipeline(css::testing::support_oval(0.1));
    Correspondence corr = first_correspondence(p);
    CHECK(detect_asymptotes(p.curve, corr).events.empty());
    CHECK(detect_double_tangents(p.curve, corr).events.empty());
}

TEST_CASE("circle chords are never tangent: empty double-tangent scan") {
    // det(a-b, t(a)) = 2r on the unit circle, so the scan finds nothing and
    // the family is not D-degenerate either.
    auto p = run_pipeline(make_circle_spec());
    Correspondence corr = first_correspondence(p);
    DetectionResult result = detect_double_tangents(p.curve, corr);
    CHECK(result.events.empty());
    CHECK_FALSE(result.degenerate_family);
    CHECK(std::fabs(double_tangent_defect(p.curve, 0.3, 0.3 + kPi)) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("css curvature vanishes on double tangents") {
    auto p = run_pipeline(make_paper_rosette_spec());
    for (const GlueingScheme& scheme : p.schemes) {
        auto branch =
            assemble_branch(p.curve, p.angles, p.decomposition, scheme, CausticKind::css);
        for (const SingularEvent& ev : branch.double_tangents) {
            PairSample pair = make_pair_sample(p.curve, ev.s1, ev.s2);
            CHECK(std::fabs(css_curvature(pair)) < 1e-6);
        }
    }
}

TEST_CASE("css curvature against the finite-difference polyline oracle") {
    auto p = run_pipeline(make_paper_rosette_spec());
    // Use the asymptote-free full-loop scheme: every point is regular except
    // at the 6 cusps.
    const GlueingScheme* loop = nullptr;
    for (const GlueingScheme& s : p.schemes)
        if (s.endpoints == SchemeEndpoints::closed_same_pair) loop = &s;
    REQUIRE(loop != nullptr);
    Correspondence corr = solve_correspondence(p.angles, p.decomposition,
                                               loop->segments[0].top_arc,
                                               loop->segments[0].bottom_arc);
    const Arc& src = corr.source();
    auto cusp_events = detect_cusps(p.curve, corr).events;
    // Step balances truncation against the solver noise amplified by the
    // second difference.
    const double h = 1e-4;
    int checked = 0;
    for (int i = 1; i < 40 && checked < 20; ++i) {
        double s = src.t_lo + (src.t_hi - src.t_lo) * i / 40.0;
        bool near_cusp = false;
        for (const SingularEvent& ev : cusp_events)
            if (std::fabs(s - ev.s1) < 0.15) near_cusp = true;
        if (near_cusp) continue;
        // Finite-difference curvature of the natural parameterization.
        auto gamma = [&](double u) {
            return css_point(make_pair_sample(p.curve, u, corr.map(u)));
        };
        Vec2 d1 = (gamma(s + h) - gamma(s - h)) / (2.0 * h);
        Vec2 d2 = (gamma(s + h) - gamma(s) * 2.0 + gamma(s - h)) / (h * h);
        double kappa_fd = det(d1, d2) / std::pow(d1.norm(), 3.0);
        double kappa_formula = css_curvature(make_pair_sample(p.curve, s, corr.map(s)));
        CHECK(std::fabs(kappa_formula - kappa_fd) <= 1e-3 * std::fabs(kappa_fd));
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("css curvature changes sign across every asymptote") {
    auto p = run_pipeline(make_paper_rosette_spec());
    for (const GlueingScheme& scheme : p.schemes) {
        auto branch =
            assemble_branch(p.curve, p.angles, p.decomposition, scheme, CausticKind::css);
        for (const SingularEvent& ev : branch.asymptotes) {
            // Evaluate on the segment containing the root.
            for (const SchemeSegment& seg : scheme.segments) {
                Correspondence corr =
                    solve_correspondence(p.angles, p.decomposition, seg.top_arc, seg.bottom_arc);
                const Arc& src = corr.source();
                if (ev.s1 < src.t_lo || ev.s1 > src.t_hi) continue;
                if (std::fabs(corr.map(ev.s1) - ev.s2) > 1e-6) continue;
                double delta = 1e-3 * (src.t_hi - src.t_lo);
                double before = css_curvature(
                    make_pair_sample(p.curve, ev.s1 - delta, corr.map(ev.s1 - delta)));
                double after = css_curvature(
                    make_pair_sample(p.curve, ev.s1 + delta, corr.map(ev.s1 + delta)));
                CHECK(before * after < 0.0);
            }
        }
    }
}

TEST_CASE("detected cusps are stationary points of the css parameterization") {
    auto p = run_pipeline(make_paper_rosette_spec());
    for (const GlueingScheme& scheme : p.schemes) {
        auto branch =
            assemble_branch(p.curve, p.angles, p.decomposition, scheme, CausticKind::css);
        // Median finite-difference speed over the sampled branch.
        std::vector<double> speeds;
        for (std::size_t i = 1; i < branch.samples.size(); ++i) {
            if (branch.samples[i].gap_before) continue;
            double ds = branch.samples[i].s1 - branch.samples[i - 1].s1;
            if (std::fabs(ds) < 1e-14) continue;
            speeds.push_back(
                distance(branch.samples[i].point, branch.samples[i - 1].point) /
                std::fabs(ds));
        }
        REQUIRE(!speeds.empty());
        std::sort(speeds.begin(), speeds.end());
        double median = speeds[speeds.size() / 2];

        for (const SingularEvent& ev : branch.cusps) {
            for (const SchemeSegment& seg : scheme.segments) {
                Correspondence corr =
                    solve_correspondence(p.angles, p.decomposition, seg.top_arc, seg.bottom_arc);
                const Arc& src = corr.source();
                if (ev.s1 < src.t_lo || ev.s1 > src.t_hi) continue;
                if (std::fabs(corr.map(ev.s1) - ev.s2) > 1e-6) continue;
                auto gamma = [&](double u) {
                    return css_point(make_pair_sample(p.curve, u, corr.map(u)));
                };
                auto speed = [&](double u) {
                    const double h = 1e-6;
                    return distance(gamma(u + h), gamma(u - h)) / (2.0 * h);
                };
                double lo = std::max(src.t_lo, ev.s1 - 1e-3);
                double hi = std::min(src.t_hi, ev.s1 + 1e-3);
                for (int iter = 0; iter < 60; ++iter) {
                    double m1 = lo + (hi - lo) / 3.0;
                    double m2 = hi - (hi - lo) / 3.0;
                    if (speed(m1) < speed(m2))
                        hi = m2;
                    else
                        lo = m1;
                }
                CHECK(speed(0.5 * (lo + hi)) < 1e-4 * median);
                break;
            }
        }
    }
}

TEST_CASE("asymptote roots coincide with secant-speed zeros") {
    auto p = run_pipeline(make_paper_rosette_spec());
    for (const GlueingScheme& scheme : p.schemes) {
        for (const SchemeSegment& seg : scheme.segments) {
            Correspondence corr =
                solve_correspondence(p.angles, p.decomposition, seg.top_arc, seg.bottom_arc);
            const Arc& src = corr.source();
            auto speed = [&](double s) {
                const double h = 1e-7;
                Vec2 plus = p.curve.position(s + h) - p.curve.position(corr.map(s + h));
                Vec2 minus = p.curve.position(s - h) - p.curve.position(corr.map(s - h));
                return (plus - minus).norm() / (2.0 * h);
            };
            for (const SingularEvent& ev : detect_asymptotes(p.curve, corr).events) {
                // Ternary-search the secant-speed minimum near the root.
                double lo = ev.s1 - 1e-2, hi = ev.s1 + 1e-2;
                lo = std::max(lo, src.t_lo);
                hi = std::min(hi, src.t_hi);
                for (int iter = 0; iter < 80; ++iter) {
                    double m1 = lo + (hi - lo) / 3.0;
                    double m2 = hi - (hi - lo) / 3.0;
                    if (speed(m1) < speed(m2))
                        hi = m2;
                    else
                        lo = m1;
                }
                double minimum = 0.5 * (lo + hi);
                CHECK(std::fabs(minimum - ev.s1) < 1e-6);
                CHECK(ev.witness1 < 1e-5 * p.curve.max_speed());
            }
        }
    }
}

TEST_CASE("envelope oracle collapses to the centre for circle and ellipse") {
    for (const CurveSpec& spec : {make_circle_spec(), make_ellipse_spec(2.0, 1.0)}) {
        auto p = run_pipeline(spec);
        Correspondence corr = first_correspondence(p);
        for (const EnvelopeVertex& v : envelope_oracle(p.curve, corr, 512))
            CHECK(v.point.norm() < 1e-9);
    }
}

TEST_CASE("envelope oracle marks gaps near asymptotes") {
    auto p = run_pipeline(make_paper_rosette_spec());
    const GlueingScheme* swapped = nullptr;
    for (const GlueingScheme& s : p.schemes)
        if (s.endpoints == SchemeEndpoints::closed_swapped_pair) swapped = &s;
    REQUIRE(swapped != nullptr);
    Correspondence corr = solve_correspondence(p.angles, p.decomposition,
                                               swapped->segments[0].top_arc,
                                               swapped->segments[0].bottom_arc);
    auto vertices = envelope_oracle(p.curve, corr, 20000);
    bool has_gap = false;
    for (const EnvelopeVertex& v : vertices) has_gap = has_gap || v.gap_before;
    CHECK(has_gap);
}
