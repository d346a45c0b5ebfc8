#include "css/curve_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "css/roots.hpp"

namespace css {

namespace {
constexpr int kValidationSamples = 16384;
constexpr double kInflexionWitnessTol = 1e-8;  // relative to scale^2
}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw CurveModelError("rational frequency with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(std::llabs(num), den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

void TrigSeries::eval(double t, int max_order, double* out) const {
    out[0] = constant;
    for (int k = 1; k <= max_order; ++k) out[k] = 0.0;
    for (const CurveTerm& term : terms) {
        double w = term.freq.value();
        double c = std::cos(w * t);
        double s = std::sin(w * t);
        // Each derivative maps (a, b) -> (w b, -w a) in a cos + b sin.
        double a = term.cos_coeff;
        double b = term.sin_coeff;
        for (int k = 0; k <= max_order; ++k) {
            out[k] += a * c + b * s;
            double na = w * b;
            double nb = -w * a;
            a = na;
            b = nb;
        }
    }
}

CurveGeometry::CurveGeometry(CurveSpec spec) : spec_(std::move(spec)) {
    if (spec_.period <= 0.0) throw CurveModelError("period must be positive");
    validate();
}

void CurveGeometry::derivatives(double t, Vec2 out[5]) const {
    if (spec_.kind == CurveKind::fourier_parametric) {
        double dx[5], dy[5];
        spec_.x.eval(t, 4, dx);
        spec_.y.eval(t, 4, dy);
        for (int k = 0; k < 5; ++k) out[k] = {dx[k], dy[k]};
        return;
    }
    // Support curve g(t) = (p cos t - p' sin t, p sin t + p' cos t).
    // g'    = (-h sin t,  h cos t)                      with h = p + p''
    // g''   = (-h' s - h c,  h' c - h s)
    // g'''  = (-h'' s - 2h' c + h s,  h'' c - 2h' s - h c)
    // g'''' = (-h''' s - 3h'' c + 3h' s + h c,  h''' c - 3h'' s - 3h' c + h s)
    double p[6];
    spec_.support.eval(t, 5, p);
    double c = std::cos(t), s = std::sin(t);
    double h = p[0] + p[2];
    double h1 = p[1] + p[3];
    double h2 = p[2] + p[4];
    double h3 = p[3] + p[5];
    out[0] = {p[0] * c - p[1] * s, p[0] * s + p[1] * c};
    out[1] = {-h * s, h * c};
    out[2] = {-h1 * s - h * c, h1 * c - h * s};
    out[3] = {-h2 * s - 2 * h1 * c + h * s, h2 * c - 2 * h1 * s - h * c};
    out[4] = {-h3 * s - 3 * h2 * c + 3 * h1 * s + h * c, h3 * c - 3 * h2 * s - 3 * h1 * c + h * s};
}

void CurveGeometry::validate() {
    double max_speed = 0.0, min_speed = 1e300, scale = 0.0, max_kappa = 0.0;
    double min_h = 1e300;
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (int i = 0; i < kValidationSamples; ++i) {
        double t = spec_.period * static_cast<double>(i) / kValidationSamples;
        Vec2 d[5];
        derivatives(t, d);
        double v = d[1].norm();
        max_speed = std::max(max_speed, v);
        min_speed = std::min(min_speed, v);
        scale = std::max(scale, d[0].norm());
        min_x = std::min(min_x, d[0].x);
        max_x = std::max(max_x, d[0].x);
        min_y = std::min(min_y, d[0].y);
        max_y = std::max(max_y, d[0].y);
        if (v > 0.0) max_kappa = std::max(max_kappa, std::fabs(det(d[1], d[2])) / (v * v * v));
        if (spec_.kind == CurveKind::support_rosette) {
            double p[3];
            spec_.support.eval(t, 2, p);
            min_h = std::min(min_h, p[0] + p[2]);
        }
    }
    if (spec_.kind == CurveKind::support_rosette && min_h <= 1e-9 * std::max(1.0, scale)) {
        throw VanishingRosetteCurvature(
            "support curve has p + p'' <= 0 (min " + std::to_string(min_h) +
            "); not a rosette");
    }
    if (min_speed <= 1e-9 * std::max(1.0, max_speed)) {
        throw NonRegularCurve("curve speed vanishes (min " + std::to_string(min_speed) + ")");
    }
    // Closedness: every frequency completes an integer cycle count over the period.
    auto check_series = [&](const TrigSeries& series) {
        for (const CurveTerm& term : series.terms) {
            double cycles = term.freq.value() * spec_.period / kTwoPi;
            if (std::fabs(cycles - std::round(cycles)) > 1e-9)
                throw CurveModelError("frequency " + std::to_string(term.freq.value()) +
                                      " does not close over the period");
        }
    };
    if (spec_.kind == CurveKind::fourier_parametric) {
        check_series(spec_.x);
        check_series(spec_.y);
    } else {
        check_series(spec_.support);
        double turns = spec_.period / kTwoPi;
        if (std::fabs(turns - std::round(turns)) > 1e-9)
            throw CurveModelError("support-curve period must be a multiple of 2*pi");
    }
    scale_ = std::max(scale, 1e-300);
    max_speed_ = max_speed;
    min_speed_ = min_speed;
    max_abs_kappa_ = max_kappa;
    diameter_ = std::hypot(max_x - min_x, max_y - min_y);
}

Jet CurveGeometry::eval_jet(double t) const {
    Vec2 d[5];
    derivatives(t, d);
    Jet jet;
    jet.t = t;
    jet.position = d[0];
    jet.d1 = d[1];
    jet.d2 = d[2];
    jet.d3 = d[3];
    double v = d[1].norm();
    jet.speed = v;
    jet.tangent_unit = d[1] / v;

    // kappa = N / v^3 with N = det(d1,d2); N' = det(d1,d3), N'' = det(d2,d3) + det(d1,d4).
    double N = det(d[1], d[2]);
    double N1 = det(d[1], d[3]);
    double N2 = det(d[2], d[3]) + det(d[1], d[4]);
    double v1 = dot(d[1], d[2]) / v;                         // dv/dt
    double v2 = (d[2].norm2() + dot(d[1], d[3])) / v - v1 * v1 / v;  // d2v/dt2

    double v3 = v * v * v;
    double kappa = N / v3;
    double kappa_t = N1 / v3 - 3.0 * N * v1 / (v3 * v);
    double kappa_tt = N2 / v3 - 6.0 * N1 * v1 / (v3 * v) + 12.0 * N * v1 * v1 / (v3 * v * v) -
                      3.0 * N * v2 / (v3 * v);
    jet.kappa = kappa;
    // Chain rule to arc length: d/ds = (1/v) d/dt.
    jet.kappa_s = kappa_t / v;
    jet.kappa_ss = kappa_tt / (v * v) - kappa_t * v1 / (v3);
    return jet;
}

Vec2 CurveGeometry::position(double t) const {
    Vec2 d[5];
    derivatives(t, d);
    return d[0];
}

Vec2 CurveGeometry::velocity(double t) const {
    Vec2 d[5];
    derivatives(t, d);
    return d[1];
}

double CurveGeometry::kappa(double t) const {
    Vec2 d[5];
    derivatives(t, d);
    double v = d[1].norm();
    return det(d[1], d[2]) / (v * v * v);
}

double CurveGeometry::kappa_numerator(double t) const {
    Vec2 d[5];
    derivatives(t, d);
    return det(d[1], d[2]);
}

double CurveGeometry::kappa_numerator_dt(double t) const {
    Vec2 d[5];
    derivatives(t, d);
    return det(d[1], d[3]);
}

CurveGeometry build_curve(const CurveSpec& spec) { return CurveGeometry(spec); }

std::vector<InflexionRecord> find_inflexions(const CurveGeometry& curve) {
    // Work with N = det(d1,d2) (same roots as kappa, no 1/v^3 noise).
    auto N = [&](double t) { return curve.kappa_numerator(t); };
    auto N1 = [&](double t) { return curve.kappa_numerator_dt(t); };
    double T = curve.period();
    double witness_tol = kInflexionWitnessTol * curve.scale() * curve.scale();

    double scale_N = 0.0;
    const int n = 4096;
    for (int i = 0; i < n; ++i) scale_N = std::max(scale_N, std::fabs(N(T * i / n)));

    std::vector<InflexionRecord> records;
    std::function<double(double)> Nf = N, N1f = N1;
    // Touch roots first (N -> 0 without sign change): roots of N' with |N|
    // tiny. An exact double root makes N dip through zero at noise level, so
    // the undulation must own its neighbourhood before the crossing scan.
    for (double r : find_roots(N1f, 0.0, T)) {
        double val = N(r);
        if (std::fabs(val) > 1e-7 * std::max(scale_N, 1e-300)) continue;
        // Ambiguous band between a clear undulation and a genuine crossing.
        if (std::fabs(val) > 1e-10 * std::max(scale_N, 1e-300))
            throw DegenerateRoot("curvature root at t=" + std::to_string(r) +
                                 " is numerically ambiguous");
        InflexionRecord rec;
        rec.t = r;
        rec.witness = N1(r);
        rec.kind = InflexionKind::undulation;
        records.push_back(rec);
    }
    // Sign-change roots: inflexion candidates. Crossings inside an
    // undulation's noise neighbourhood are artifacts of the double root.
    for (double r : find_roots(Nf, 0.0, T, RootConfig{}, &N1f)) {
        bool near_undulation = false;
        for (const InflexionRecord& rec : records)
            if (std::fabs(rec.t - r) < 1e-5 * T ||
                T - std::fabs(rec.t - r) < 1e-5 * T)
                near_undulation = true;
        if (near_undulation) continue;
        InflexionRecord rec;
        rec.t = r;
        rec.witness = N1(r);
        rec.kind = std::fabs(rec.witness) > witness_tol ? InflexionKind::nondegenerate_inflexion
                                                        : InflexionKind::degenerate;
        records.push_back(rec);
    }
    std::sort(records.begin(), records.end(),
              [](const InflexionRecord& a, const InflexionRecord& b) { return a.t < b.t; });
    return records;
}

int rotation_number(const CurveGeometry& curve) {
    // Unwrap the tangent angle over one period on a grid fine enough that
    // each increment stays below pi/2.
    double T = curve.period();
    int n = 4096;
    double max_step = curve.max_abs_kappa() * curve.max_speed() * T;
    while (n < max_step * 4 && n < (1 << 22)) n *= 2;
    double total = 0.0;
    Vec2 prev = curve.velocity(0.0);
    for (int i = 1; i <= n; ++i) {
        Vec2 cur = curve.velocity(T * static_cast<double>(i) / n);
        total += std::atan2(det(prev, cur), dot(prev, cur));
        prev = cur;
    }
    double turns = total / kTwoPi;
    int rounded = static_cast<int>(std::lround(turns));
    if (std::fabs(turns - rounded) > 1e-6)
        throw CurveModelError("tangent winding " + std::to_string(turns) + " is not an integer");
    return rounded;
}

CurveSpec make_fourier_spec(std::vector<CurveTerm> x_terms, std::vector<CurveTerm> y_terms,
                            double period, double x_const, double y_const) {
    CurveSpec spec;
    spec.kind = CurveKind::fourier_parametric;
    spec.x.constant = x_const;
    spec.x.terms = std::move(x_terms);
    spec.y.constant = y_const;
    spec.y.terms = std::move(y_terms);
    spec.period = period;
    return spec;
}

CurveSpec make_support_spec(double constant, std::vector<CurveTerm> terms, double period) {
    CurveSpec spec;
    spec.kind = CurveKind::support_rosette;
    spec.support.constant = constant;
    spec.support.terms = std::move(terms);
    spec.period = period;
    return spec;
}

CurveSpec make_circle_spec(double radius) {
    return make_fourier_spec({{Rational(1, 1), radius, 0.0}}, {{Rational(1, 1), 0.0, radius}});
}

CurveSpec make_ellipse_spec(double a, double b) {
    return make_fourier_spec({{Rational(1, 1), a, 0.0}}, {{Rational(1, 1), 0.0, b}});
}

CurveSpec make_paper_rosette_spec() {
    return make_support_spec(
        14.0, {{Rational(3, 2), 3.0, 0.0}, {Rational(5, 2), 0.0, 0.2}}, 2.0 * kTwoPi);
}

}  // namespace css
