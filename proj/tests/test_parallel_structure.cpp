#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "css/parallel_structure.hpp"
#include "test_fixtures.hpp"

using namespace css;
using css::testing::fixture_four_inflexion;
using css::testing::fixture_two_inflexion;
using css::testing::run_pipeline;

TEST_CASE("circle angle function is the parameter mod pi") {
    CurveGeometry curve = build_curve(make_circle_spec());
    AngleFunction angles(curve, 0.0);
    for (int i = 0; i < 64; ++i) {
        double t = kTwoPi * i / 64.0;
        CHECK(angles.lift(t) == doctest::Approx(t).epsilon(1e-12));
        CHECK(mod_pi_distance(angles.phi(t) - t) < 1e-12);
    }
    CHECK(angles.lift(1.0 + kTwoPi) == doctest::Approx(1.0 + kTwoPi).epsilon(1e-12));
}

TEST_CASE("rosette lift spans 4 pi over one period") {
    CurveGeometry curve = build_curve(make_paper_rosette_spec());
    AngleFunction angles(curve, 0.1);
    CHECK(angles.lift(0.1 + curve.period()) - angles.lift(0.1) ==
          doctest::Approx(2.0 * kTwoPi).epsilon(1e-12));
    // dlift/dt = kappa * speed against finite differences.
    const double h = 1e-6;
    for (double t : {0.5, 2.2, 5.9, 9.0}) {
        double fd = (angles.lift(t + h) - angles.lift(t - h)) / (2.0 * h);
        CHECK(fd == doctest::Approx(angles.dlift_dt(t)).epsilon(1e-6));
    }
}

TEST_CASE("curves with undulations are rejected by the decomposition") {
    CurveGeometry curve = build_curve(css::testing::fixture_undulation());
    AngleFunction angles(curve, choose_base_point(curve));
    CHECK_THROWS_AS(local_extrema(angles), TangentialPreimage);
    CHECK_THROWS_AS(division_points(curve, angles), TangentialPreimage);
}

TEST_CASE("base point at an inflexion is rejected") {
    CurveGeometry curve = build_curve(fixture_two_inflexion());
    double t_infl = find_inflexions(curve)[0].t;
    CHECK_THROWS_AS(AngleFunction(curve, t_infl), BasePointIsInflexion);
}

TEST_CASE("local extrema correspond to inflexions and alternate") {
    CurveGeometry rosette = build_curve(make_paper_rosette_spec());
    AngleFunction rosette_angles(rosette, choose_base_point(rosette));
    CHECK(local_extrema(rosette_angles).empty());

    for (const CurveSpec& spec : {fixture_two_inflexion(), fixture_four_inflexion()}) {
        CurveGeometry curve = build_curve(spec);
        AngleFunction angles(curve, choose_base_point(curve));
        std::vector<AngleExtremum> extrema = local_extrema(angles);
        std::vector<InflexionRecord> inflexions = find_inflexions(curve);
        REQUIRE(extrema.size() == inflexions.size());
        CHECK(extrema.size() % 2 == 0);
        int maxima = 0;
        for (std::size_t i = 0; i < extrema.size(); ++i) {
            CHECK(extrema[i].t == doctest::Approx(inflexions[i].t).epsilon(1e-9));
            if (extrema[i].is_max) ++maxima;
            // Consecutive extrema alternate max/min.
            CHECK(extrema[i].is_max != extrema[(i + 1) % extrema.size()].is_max);
        }
        CHECK(maxima * 2 == static_cast<int>(extrema.size()));
    }
}

TEST_CASE("division points: convex counts") {
    // Generic oval: exactly 2 division points; n-rosette: exactly 2n.
    auto p_oval = run_pipeline(css::testing::support_oval(0.1));
    CHECK(p_oval.decomposition.division.points.size() == 2);
    CHECK(p_oval.decomposition.families.size() == 1);
    CHECK(p_oval.decomposition.families[0].arcs.size() == 2);

    auto p_ros = run_pipeline(make_paper_rosette_spec());
    CHECK(p_ros.decomposition.division.points.size() == 4);
    CHECK(p_ros.decomposition.families.size() == 1);
    CHECK(p_ros.decomposition.families[0].arcs.size() == 4);

    std::mt19937 rng(5);
    for (int n : {3, 4}) {
        auto p = run_pipeline(css::testing::random_rosette(n, rng));
        CHECK(p.decomposition.division.points.size() == static_cast<std::size_t>(2 * n));
        CHECK(p.decomposition.families.size() == 1);
        CHECK(p.decomposition.families[0].arcs.size() == static_cast<std::size_t>(2 * n));
    }
}

TEST_CASE("division points of a non-convex fixture") {
    auto p = run_pipeline(fixture_two_inflexion());
    const auto& points = p.decomposition.division.points;
    CHECK(points.size() % 2 == 0);
    std::vector<InflexionRecord> inflexions = find_inflexions(p.curve);
    for (const InflexionRecord& rec : inflexions) {
        bool present = false;
        for (const DivisionPoint& dp : points)
            if (std::fabs(dp.t - rec.t) < 1e-8 && dp.tag == DivisionTag::inflexion)
                present = true;
        CHECK(present);
    }
}

TEST_CASE("family arcs share the same angle interval") {
    auto p = run_pipeline(fixture_four_inflexion());
    for (const ParallelArcSet& family : p.decomposition.families) {
        REQUIRE(family.arcs.size() >= 2);
        for (int arc_index : family.arcs) {
            const Arc& arc = p.decomposition.division.arcs[arc_index];
            double lo = std::fmod(std::min(arc.lift_lo, arc.lift_hi), kPi);
            double hi = std::fmod(std::max(arc.lift_lo, arc.lift_hi), kPi);
            if (lo < 0) lo += kPi;
            if (hi < 0) hi += kPi;
            // Arc endpoint values coincide with the family's extremal interval.
            double d_lo = std::min(mod_pi_distance(lo - family.phi_lo),
                                   mod_pi_distance(lo - family.phi_hi));
            double d_hi = std::min(mod_pi_distance(hi - family.phi_lo),
                                   mod_pi_distance(hi - family.phi_hi));
            CHECK(d_lo < 1e-9);
            CHECK(d_hi < 1e-9);
        }
    }
}

TEST_CASE("kappa has constant sign on every arc") {
    for (const CurveSpec& spec : {fixture_two_inflexion(), fixture_four_inflexion()}) {
        auto p = run_pipeline(spec);
        for (const Arc& arc : p.decomposition.division.arcs) {
            double mid_sign = p.curve.kappa(0.5 * (arc.t_lo + arc.t_hi)) > 0 ? 1.0 : -1.0;
            for (int i = 1; i < 32; ++i) {
                double t = arc.t_lo + (arc.t_hi - arc.t_lo) * i / 32.0;
                CHECK(p.curve.kappa(t) * mid_sign > 0.0);
            }
        }
    }
}

TEST_CASE("circle and ellipse correspondences are the antipodal map") {
    for (const CurveSpec& spec : {make_circle_spec(), make_ellipse_spec(2.0, 1.0)}) {
        auto p = run_pipeline(spec);
        const auto& family = p.decomposition.families[0];
        REQUIRE(family.arcs.size() == 2);
        Correspondence corr =
            solve_correspondence(p.angles, p.decomposition, family.arcs[0], family.arcs[1]);
        const Arc& src = corr.source();
        for (int i = 0; i <= 50; ++i) {
            double s = src.t_lo + (src.t_hi - src.t_lo) * i / 50.0;
            double expected = s + kPi;
            CHECK(std::fabs(corr.map(s) - expected) < 1e-9);
        }
        CHECK(corr.sigma() == doctest::Approx(-1.0));
    }
}

TEST_CASE("rosette correspondences have tiny parallelism residual") {
    auto p = run_pipeline(make_paper_rosette_spec());
    const auto& arcs = p.decomposition.families[0].arcs;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        for (std::size_t b = a + 1; b < arcs.size(); ++b) {
            Correspondence corr =
                solve_correspondence(p.angles, p.decomposition, arcs[a], arcs[b]);
            const Arc& src = corr.source();
            for (int i = 0; i <= 100; ++i) {
                double s = src.t_lo + (src.t_hi - src.t_lo) * i / 100.0;
                Vec2 v1 = p.curve.velocity(s);
                Vec2 v2 = p.curve.velocity(corr.map(s));
                double residual = std::fabs(det(v1 / v1.norm(), v2 / v2.norm()));
                CHECK(residual < 1e-10);
            }
        }
    }
}

TEST_CASE("correspondence endpoints map to endpoints") {
    auto p = run_pipeline(fixture_two_inflexion());
    for (const ParallelArcSet& family : p.decomposition.families) {
        for (std::size_t a = 0; a < family.arcs.size(); ++a) {
            for (std::size_t b = 0; b < family.arcs.size(); ++b) {
                if (a == b) continue;
                Correspondence corr = solve_correspondence(p.angles, p.decomposition,
                                                           family.arcs[a], family.arcs[b]);
                const Arc& dst = corr.target();
                for (double end : {corr.source().t_lo, corr.source().t_hi}) {
                    double t = corr.map(end);
                    double d = std::min(std::fabs(t - dst.t_lo), std::fabs(t - dst.t_hi));
                    CHECK(d < 1e-7);
                }
            }
        }
    }
}

TEST_CASE("arc-length derivative of the transported map equals the curvature ratio") {
    auto p = run_pipeline(make_paper_rosette_spec());
    const auto& arcs = p.decomposition.families[0].arcs;
    Correspondence corr = solve_correspondence(p.angles, p.decomposition, arcs[0], arcs[2]);
    const Arc& src = corr.source();
    const double h = 1e-6;
    for (int i = 1; i < 20; ++i) {
        double s = src.t_lo + (src.t_hi - src.t_lo) * i / 20.0;
        Jet j1 = p.curve.eval_jet(s);
        Jet j2 = p.curve.eval_jet(corr.map(s));
        // d sigma2 / d sigma1 = (dt2/ds) * v2 / v1 computed by differences.
        double dt2 = (corr.map(s + h) - corr.map(s - h)) / (2.0 * h);
        double fd = dt2 * j2.speed / j1.speed;
        CHECK(std::fabs(fd - j1.kappa / j2.kappa) < 1e-5);
    }
}

TEST_CASE("NotSameFamily for arcs in different families") {
    auto p = run_pipeline(fixture_two_inflexion());
    REQUIRE(p.decomposition.families.size() >= 2);
    int a = p.decomposition.families[0].arcs[0];
    int b = p.decomposition.families[1].arcs[0];
    CHECK_THROWS_AS(solve_correspondence(p.angles, p.decomposition, a, b), NotSameFamily);
    CHECK_THROWS_AS(solve_correspondence(p.angles, p.decomposition, a, a), NotSameFamily);
}

TEST_CASE("parallel-pair completeness against a brute-force scan") {
    std::mt19937 rng(11);
    for (const CurveSpec& spec : {make_paper_rosette_spec(), fixture_four_inflexion()}) {
        auto p = run_pipeline(spec);
        double period = p.curve.period();
        std::uniform_real_distribution<double> pick(0.0, period);
        const int grid_n = 20000;
        for (int trial = 0; trial < 50; ++trial) {
            double s = pick(rng);
            int arc_index = p.decomposition.locate_arc(s, period);
            const Arc& arc = p.decomposition.division.arcs[arc_index];
            // Keep clear of division points where partners collide.
            double margin = 1e-3 * (arc.t_hi - arc.t_lo);
            if (s < arc.t_lo + margin || s > arc.t_hi - margin) {
                --trial;
                continue;
            }
            // Partners via the families.
            std::vector<double> partners;
            for (int other : p.decomposition.families[arc.family].arcs) {
                if (other == arc_index) continue;
                Correspondence corr =
                    solve_correspondence(p.angles, p.decomposition, arc_index, other);
                double t = corr.map(s);
                partners.push_back(std::fmod(t, period) < 0 ? std::fmod(t, period) + period
                                                            : std::fmod(t, period));
            }
            // Brute force: tangent angle equality mod pi on a dense grid.
            double theta_s = p.angles.lift(s);
            std::vector<double> brute;
            auto f = [&](double t) {
                double d = p.angles.lift(t) - theta_s;
                double r = std::remainder(d, kPi);
                return r;
            };
            double prev = f(0.0);
            double prev_t = 0.0;
            for (int i = 1; i <= grid_n; ++i) {
                double t = period * i / grid_n;
                double v = f(t);
                if ((prev < 0.0) != (v < 0.0) && std::fabs(v - prev) < 1.0) {
                    double root = prev_t + (t - prev_t) * prev / (prev - v);
                    double d_self = std::fabs(root - s);
                    d_self = std::min(d_self, period - d_self);
                    if (d_self > 1e-5) brute.push_back(root);
                }
                prev = v;
                prev_t = t;
            }
            REQUIRE(partners.size() == brute.size());
            std::sort(partners.begin(), partners.end());
            std::sort(brute.begin(), brute.end());
            for (std::size_t i = 0; i < partners.size(); ++i)
                CHECK(std::fabs(partners[i] - brute[i]) < 1e-6);
        }
    }
}
