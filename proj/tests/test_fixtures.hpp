#pragma once

#include <random>

#include "css/branch_assembly.hpp"
#include "css/curve_model.hpp"
#include "css/parallel_structure.hpp"

namespace css::testing {

/// Non-convex closed curve with exactly two nondegenerate inflexions
/// (at t ~ 1.7617 and ~ 4.5215).
inline CurveSpec fixture_two_inflexion() {
    return make_fourier_spec({{Rational(1, 1), 1.0, 0.0}},
                             {{Rational(1, 1), 0.0, 1.0}, {Rational(2, 1), 0.0, 0.9}});
}

/// Non-convex closed curve with exactly four nondegenerate inflexions and no
/// central symmetry (the cos 2t term breaks it).
inline CurveSpec fixture_four_inflexion() {
    return make_fourier_spec({{Rational(1, 1), 1.0, 0.0}},
                             {{Rational(1, 1), 0.0, 1.0},
                              {Rational(3, 1), 0.0, 0.3},
                              {Rational(2, 1), 0.05, 0.0}});
}

/// Curve whose curvature numerator is 1 - sin^3 t >= 0: one undulation at
/// t = pi/2 and no sign changes.
inline CurveSpec fixture_undulation() {
    return make_fourier_spec({{Rational(1, 1), 1.0, 0.0}},
                             {{Rational(1, 1), 0.0, 1.0}, {Rational(2, 1), 0.25, 0.0}});
}

/// Support oval p = 1 + eps cos(3 t); convex for eps < 1/8.
inline CurveSpec support_oval(double eps) {
    return make_support_spec(1.0, {{Rational(3, 1), eps, 0.0}}, kTwoPi);
}

/// Random n-rosette: support 14 + terms at frequencies (2n-1)/n and (2n+1)/n
/// with coefficients drawn uniformly from [-0.3, 0.3].
inline CurveSpec random_rosette(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> coeff(-0.3, 0.3);
    std::vector<CurveTerm> terms = {
        {Rational(2 * n - 1, n), coeff(rng), coeff(rng)},
        {Rational(2 * n + 1, n), coeff(rng), coeff(rng)},
    };
    return make_support_spec(14.0, std::move(terms), kTwoPi * n);
}

/// Decomposition products most tests need.
struct Pipeline {
    CurveGeometry curve;
    AngleFunction angles;
    ParallelDecomposition decomposition;
    std::vector<GlueingScheme> schemes;
};

inline Pipeline run_pipeline(const CurveSpec& spec) {
    CurveGeometry curve = build_curve(spec);
    AngleFunction angles = angle_function(curve, choose_base_point(curve));
    ParallelDecomposition dec = decompose(curve, angles);
    std::vector<GlueingScheme> schemes = enumerate_maximal_schemes(dec);
    return {std::move(curve), std::move(angles), std::move(dec), std::move(schemes)};
}

}  // namespace css::testing
