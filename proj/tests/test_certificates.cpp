#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "css/certificates.hpp"
#include "test_fixtures.hpp"

using namespace css;
using css::testing::run_pipeline;

TEST_CASE("curved_same_side on ovals and rosettes") {
    // Oval antipodal pair: curved in different sides, hence no asymptote.
    CurveGeometry oval = build_curve(css::testing::support_oval(0.1));
    CHECK_FALSE(curved_same_side(make_pair_sample(oval, 0.4, 0.4 + kPi)));

    // n-rosette partner sequence: same side iff the offset is even.
    CurveGeometry rosette = build_curve(make_paper_rosette_spec());
    double s = 0.7;
    CHECK_FALSE(curved_same_side(make_pair_sample(rosette, s, s + kPi)));
    CHECK(curved_same_side(make_pair_sample(rosette, s, s + kTwoPi)));
    CHECK_FALSE(curved_same_side(make_pair_sample(rosette, s, s + 3 * kPi)));
}

TEST_CASE("curved_same_side is symmetric in the pair") {
    CurveGeometry rosette = build_curve(make_paper_rosette_spec());
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> pick(0.0, rosette.period());
    for (int i = 0; i < 20; ++i) {
        double s = pick(rng);
        for (int k = 1; k <= 3; ++k) {
            double t = s + k * kPi;
            CHECK(curved_same_side(make_pair_sample(rosette, s, t)) ==
                  curved_same_side(make_pair_sample(rosette, t, s)));
        }
    }
}

TEST_CASE("curved_same_side rejects inflexion pairs") {
    CurveGeometry curve = build_curve(css::testing::fixture_two_inflexion());
    double t_infl = find_inflexions(curve)[0].t;
    auto p = run_pipeline(css::testing::fixture_two_inflexion());
    // Partner of the inflexion along some family member.
    int arc = p.decomposition.locate_arc(t_infl + 1e-12, curve.period());
    const auto& family = p.decomposition.families[p.decomposition.division.arcs[arc].family];
    REQUIRE(family.arcs.size() >= 2);
    int other = family.arcs[0] == arc ? family.arcs[1] : family.arcs[0];
    Correspondence corr = solve_correspondence(p.angles, p.decomposition, arc, other);
    PairSample pair = make_pair_sample(p.curve, t_infl, corr.map(t_infl));
    CHECK_THROWS_AS(curved_same_side(pair), InflexionAtPair);
}

namespace {

/// Synthetic endpoint data with anti-parallel pairing at both ends.
ArcEndpointData synthetic_sign_data(double kQ0, double kP0, double kQ1, double kP1) {
    ArcEndpointData data;
    data.p0 = {0.0, 0.0};
    data.p1 = {1.0, 0.0};
    data.q0 = {0.0, 2.0};
    data.q1 = {1.0, 2.0};
    data.tp0 = {1.0, 0.0};
    data.tp1 = {0.0, 1.0};
    data.tq0 = {-1.0, 0.0};
    data.tq1 = {0.0, -1.0};
    data.kP0 = kP0;
    data.kP1 = kP1;
    data.kQ0 = kQ0;
    data.kQ1 = kQ1;
    return data;
}

}  // namespace

TEST_CASE("curvature-sign certificate arithmetic") {
    // (kQ0 + kP0)(kQ1 + kP1) = (1)(-1.5) < 0: certified.
    CHECK(certificate_curvature_sign(synthetic_sign_data(2.0, -1.0, -0.5, -1.0)) ==
          CertificateVerdict::asymptote_certified);
    // (-0.5)(-1.5) > 0: inconclusive.
    CHECK(certificate_curvature_sign(synthetic_sign_data(0.5, -1.0, -0.5, -1.0)) ==
          CertificateVerdict::inconclusive);
    // Boundary case kP0 = kQ1 = 0: product (kQ0)(kP1) < 0, certified.
    CHECK(certificate_curvature_sign(synthetic_sign_data(2.0, 0.0, 0.0, -1.0)) ==
          CertificateVerdict::asymptote_certified);
}

TEST_CASE("curvature-sign certificate rejects bad hypotheses") {
    // kQ0 < 0 violates (iii).
    CHECK_THROWS_AS(certificate_curvature_sign(synthetic_sign_data(-2.0, -1.0, -0.5, -1.0)),
                    HypothesesUnmet);
    // kP1 > 0 violates (iii).
    CHECK_THROWS_AS(certificate_curvature_sign(synthetic_sign_data(2.0, -1.0, -0.5, 1.0)),
                    HypothesesUnmet);
    // Same-direction pairing violates the opposite-direction setup.
    ArcEndpointData data = synthetic_sign_data(2.0, -1.0, -0.5, -1.0);
    data.tq0 = data.tp0;
    CHECK_THROWS_AS(certificate_curvature_sign(data), HypothesesUnmet);
}

namespace {

/// Parallelogram-certificate data engineered for exact rho values:
/// rho1 = py and rho2 = 2 / px, with tau(p1) = (px, py).
ArcEndpointData synthetic_parallelogram_data(double px, double py) {
    ArcEndpointData data;
    data.q0 = {0.0, 0.0};
    data.tq0 = {1.0, 0.0};
    data.q1 = {2.0, 1.0};
    data.tq1 = {0.0, 1.0};
    data.p0 = {10.0, 5.0};  // arbitrary: only tau(p1) = p1 + q0 - p0 matters
    data.p1 = {10.0 + px, 5.0 + py};
    data.tp0 = {-1.0, 0.0};
    data.tp1 = {0.0, -1.0};
    data.kP0 = data.kP1 = 1.0;
    data.kQ0 = data.kQ1 = -1.0;
    return data;
}

}  // namespace

TEST_CASE("parallelogram certificate arithmetic") {
    // ratios 0.5 and 0.8: rho_max < 1, certified.
    CHECK(certificate_parallelogram(synthetic_parallelogram_data(2.0 / 0.8, 0.5)) ==
          CertificateVerdict::asymptote_certified);
    // ratios 1.2 and 1.5: rho_min > 1, certified.
    CHECK(certificate_parallelogram(synthetic_parallelogram_data(2.0 / 1.5, 1.2)) ==
          CertificateVerdict::asymptote_certified);
    // ratios 0.5 and 1.5 straddle 1: inconclusive.
    CHECK(certificate_parallelogram(synthetic_parallelogram_data(2.0 / 1.5, 0.5)) ==
          CertificateVerdict::inconclusive);
}

TEST_CASE("parallelogram certificate degenerate construction") {
    ArcEndpointData data = synthetic_parallelogram_data(2.0, 0.5);
    data.tq1 = {1.0, 0.0};  // parallel endpoint tangents of Q
    data.tp1 = {-1.0, 0.0};
    CHECK_THROWS_AS(certificate_parallelogram(data), DegenerateConstruction);
}

TEST_CASE("certificate soundness on real arc pairs") {
    // Whenever a certificate fires on data extracted from a correspondence
    // sub-range, the detector must find an asymptote root inside that range.
    std::mt19937 rng(29);
    std::vector<CurveSpec> fixtures = {make_paper_rosette_spec(),
                                       css::testing::fixture_two_inflexion(),
                                       css::testing::fixture_four_inflexion()};
    for (int n : {2, 3, 4}) {
        fixtures.push_back(css::testing::random_rosette(n, rng));
        fixtures.push_back(css::testing::random_rosette(n, rng));
        fixtures.push_back(css::testing::random_rosette(n, rng));
    }
    REQUIRE(fixtures.size() >= 10);

    int fired = 0;
    int sound = 0;
    for (const CurveSpec& spec : fixtures) {
        auto p = run_pipeline(spec);
        for (const GlueingScheme& scheme : p.schemes) {
            for (const SchemeSegment& seg : scheme.segments) {
                Correspondence corr =
                    solve_correspondence(p.angles, p.decomposition, seg.top_arc, seg.bottom_arc);
                const Arc& src = corr.source();
                for (double u0 : {0.05, 0.2}) {
                    double u1 = 1.0 - u0;
                    for (bool flip : {false, true}) {
                        ArcEndpointData data;
                        try {
                            data = extract_arc_pair(p.curve, corr, u0, u1, flip);
                        } catch (const std::exception&) {
                            continue;
                        }
                        for (int which : {0, 1}) {
                            CertificateVerdict verdict;
                            try {
                                verdict = which == 0 ? certificate_curvature_sign(data)
                                                     : certificate_parallelogram(data);
                            } catch (const CertificateError&) {
                                continue;
                            }
                            if (verdict != CertificateVerdict::asymptote_certified) continue;
                            ++fired;
                            // Independent check: sign change of the asymptote
                            // defect inside [u0, u1].
                            double lo = src.t_lo + u0 * (src.t_hi - src.t_lo);
                            double hi = src.t_lo + u1 * (src.t_hi - src.t_lo);
                            double sigma = corr.sigma();
                            bool has_root = false;
                            double prev =
                                asymptote_defect(p.curve, lo, corr.map(lo), sigma);
                            for (int i = 1; i <= 512; ++i) {
                                double s = lo + (hi - lo) * i / 512.0;
                                double v = asymptote_defect(p.curve, s, corr.map(s), sigma);
                                if ((prev < 0.0) != (v < 0.0)) has_root = true;
                                prev = v;
                            }
                            if (has_root) ++sound;
                            CHECK(has_root);
                        }
                    }
                }
            }
        }
    }
    // The guarantee is conditional, but the corpus must actually exercise it.
    CHECK(fired >= 3);
    CHECK(sound == fired);
}

TEST_CASE("genericity report fails on the ellipse and circle") {
    for (const CurveSpec& spec : {make_ellipse_spec(2.0, 1.0), make_circle_spec()}) {
        auto p = run_pipeline(spec);
        GenericityReport report = check_genericity(p.curve, p.angles, p.decomposition, 2048);
        CHECK_FALSE(report.overall);
        bool iv_failed = false;
        for (const GenericityEntry& e : report.entries)
            if (e.id == "iv" && e.status == ConditionStatus::fail) iv_failed = true;
        CHECK(iv_failed);
    }
}

TEST_CASE("genericity report passes on the paper rosette") {
    auto p = run_pipeline(make_paper_rosette_spec());
    GenericityReport report = check_genericity(p.curve, p.angles, p.decomposition, 4096);
    for (const GenericityEntry& e : report.entries) {
        INFO(e.id, ": ", e.note);
        CHECK(e.status == ConditionStatus::pass);
    }
    CHECK(report.overall);
}

TEST_CASE("randomized rosettes pass genericity at least 90% of the time") {
    std::mt19937 rng(31);
    int passes = 0;
    const int draws = 50;
    for (int i = 0; i < draws; ++i) {
        auto p = run_pipeline(css::testing::random_rosette(2, rng));
        GenericityReport report = check_genericity(p.curve, p.angles, p.decomposition, 1024);
        if (report.overall) ++passes;
    }
    CHECK(passes >= 45);
}
