#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "css/geometry.hpp"

namespace css {

struct CurveModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Velocity vanishes somewhere on the curve.
struct NonRegularCurve : CurveModelError {
    using CurveModelError::CurveModelError;
};
/// Support-kind curve with p + p'' <= 0 somewhere (not a rosette).
struct VanishingRosetteCurvature : CurveModelError {
    using CurveModelError::CurveModelError;
};
/// A curvature root whose classification is numerically ambiguous.
struct DegenerateRoot : CurveModelError {
    using CurveModelError::CurveModelError;
};

/// Exact frequency num/den, kept rational so periods stay exact.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

/// One trigonometric term c*cos(freq t) + s*sin(freq t).
struct CurveTerm {
    Rational freq;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

struct TrigSeries {
    double constant = 0.0;
    std::vector<CurveTerm> terms;

    /// Value and derivatives 0..max_order (exact differentiation).
    void eval(double t, int max_order, double* out) const;
};

enum class CurveKind { fourier_parametric, support_rosette };

struct CurveSpec {
    CurveKind kind = CurveKind::fourier_parametric;
    TrigSeries x;        // fourier only
    TrigSeries y;        // fourier only
    TrigSeries support;  // support_rosette only: p(t)
    double period = kTwoPi;
};

/// Full third-order data at one parameter plus arc-length curvature derivatives.
///
/// Arc-length conversions from the global parameter t (v = |d1|):
///   kappa_s  = (dkappa/dt) / v
///   kappa_ss = (d kappa_s / dt) / v
struct Jet {
    double t = 0.0;
    Vec2 position;
    Vec2 d1, d2, d3;
    double speed = 0.0;
    Vec2 tangent_unit;
    double kappa = 0.0;
    double kappa_s = 0.0;
    double kappa_ss = 0.0;
};

enum class InflexionKind { nondegenerate_inflexion, undulation, degenerate };

struct InflexionRecord {
    double t = 0.0;
    InflexionKind kind = InflexionKind::nondegenerate_inflexion;
    double witness = 0.0;  // det(d1, d3) at the curvature root
};

/// Immutable analytic evaluator for a closed curve. All evaluation is pure
/// and safe to call concurrently.
class CurveGeometry {
  public:
    explicit CurveGeometry(CurveSpec spec);

    const CurveSpec& spec() const { return spec_; }
    double period() const { return spec_.period; }
    /// max |position| over the curve (used as the length scale for tolerances).
    double scale() const { return scale_; }
    double max_speed() const { return max_speed_; }
    double min_speed() const { return min_speed_; }
    double max_abs_kappa() const { return max_abs_kappa_; }
    double diameter() const { return diameter_; }

    Jet eval_jet(double t) const;
    Vec2 position(double t) const;
    Vec2 velocity(double t) const;
    /// Signed curvature det(d1,d2)/|d1|^3.
    double kappa(double t) const;
    /// det(d1,d2): kappa numerator, shares roots with kappa.
    double kappa_numerator(double t) const;
    /// d/dt det(d1,d2) = det(d1,d3).
    double kappa_numerator_dt(double t) const;

  private:
    void derivatives(double t, Vec2 out[5]) const;
    void validate();

    CurveSpec spec_;
    double scale_ = 1.0;
    double max_speed_ = 0.0;
    double min_speed_ = 0.0;
    double max_abs_kappa_ = 0.0;
    double diameter_ = 0.0;
};

CurveGeometry build_curve(const CurveSpec& spec);

/// All curvature roots in [0, period), classified and sorted by t.
std::vector<InflexionRecord> find_inflexions(const CurveGeometry& curve);

/// Winding count of the tangent over one period.
int rotation_number(const CurveGeometry& curve);

// Convenience constructors for common specs.
CurveSpec make_fourier_spec(std::vector<CurveTerm> x_terms, std::vector<CurveTerm> y_terms,
                            double period = kTwoPi, double x_const = 0.0, double y_const = 0.0);
CurveSpec make_support_spec(double constant, std::vector<CurveTerm> terms, double period);
CurveSpec make_circle_spec(double radius = 1.0);
CurveSpec make_ellipse_spec(double a, double b);
/// The paper's example rosette: p(t) = 14 + 3 cos(3t/2) + (1/5) sin(5t/2).
CurveSpec make_paper_rosette_spec();

}  // namespace css
