#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "css/curve_model.hpp"

namespace css {

struct ParallelStructureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BasePointIsInflexion : ParallelStructureError {
    using ParallelStructureError::ParallelStructureError;
};
/// A preimage of an extremal level crosses tangentially without being an
/// extremum itself; the curve is not generic enough to decompose.
struct TangentialPreimage : ParallelStructureError {
    using ParallelStructureError::ParallelStructureError;
};
struct NotSameFamily : ParallelStructureError {
    using ParallelStructureError::ParallelStructureError;
};

/// Continuous lift of the tangent angle relative to a base point with
/// kappa(base) != 0. lift(t + period) = lift(t) + 2*pi*rotation.
/// Holds its own copy of the (cheap, immutable) curve evaluator.
class AngleFunction {
  public:
    AngleFunction(const CurveGeometry& curve, double base_t);

    const CurveGeometry& curve() const { return curve_; }
    double base_t() const { return base_t_; }
    int rotation() const { return rotation_; }

    /// Continuous tangent-angle lift with lift(base_t) = 0.
    double lift(double t) const;
    /// Angle function value: lift mod pi, in [0, pi).
    double phi(double t) const;
    /// d(lift)/dt = kappa * speed.
    double dlift_dt(double t) const;

  private:
    CurveGeometry curve_;
    double base_t_ = 0.0;
    double base_angle_ = 0.0;
    int grid_n_ = 0;
    std::vector<double> grid_;  // lift at base_t + i*period/grid_n, i = 0..grid_n
    int rotation_ = 0;
};

struct AngleExtremum {
    double t = 0.0;
    double phi = 0.0;
    bool is_max = false;
};

enum class DivisionTag { inflexion, parallel_to_inflexion, base_fixed };

struct DivisionPoint {
    double t = 0.0;
    DivisionTag tag = DivisionTag::base_fixed;
    double phi = 0.0;
};

/// One closed arc between consecutive division points. Arcs are stored once,
/// in the direction of increasing parameter; phi_up says whether the angle
/// function sweeps its family gap upward along that direction.
struct Arc {
    int index = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;  // t_hi > t_lo; the wrap arc extends past the period
    double lift_lo = 0.0;
    double lift_hi = 0.0;
    int family = -1;
    bool phi_up = true;
};

struct DivisionPoints {
    std::vector<DivisionPoint> points;  // sorted along the curve, even count
    std::vector<Arc> arcs;              // arcs[j] runs from points[j] to points[j+1 mod 2m]
};

struct ParallelArcSet {
    int index = 0;
    double phi_lo = 0.0;  // extremal interval (phi_i, phi_{i+1}) mod pi
    double phi_hi = 0.0;
    std::vector<int> arcs;  // arc indices; direction flag lives on the Arc
};

/// Full decomposition product: division points, arcs, and the Phi families.
struct ParallelDecomposition {
    DivisionPoints division;
    std::vector<ParallelArcSet> families;
    std::vector<AngleExtremum> extrema;
    bool convex = false;

    int arc_count() const { return static_cast<int>(division.arcs.size()); }
    /// Arc whose closed parameter range contains s (normalized cyclically).
    int locate_arc(double s, double period) const;
};

/// Smooth parallel-pair map between two arcs of the same family.
class Correspondence {
  public:
    Correspondence(const AngleFunction& angles, const Arc& source, const Arc& target);

    const Arc& source() const { return source_; }
    const Arc& target() const { return target_; }
    /// Parallel partner of s in [source.t_lo, source.t_hi].
    double map(double s) const;
    /// sign <f'(s1), f'(s2)>; constant along the correspondence.
    double sigma() const { return sigma_; }

  private:
    const AngleFunction* angles_;
    Arc source_;
    Arc target_;
    double level_shift_ = 0.0;  // lift(target) - lift(source) = k*pi, fixed
    double sigma_ = 1.0;
    std::vector<double> cache_t_;     // monotone samples of the target arc
    std::vector<double> cache_lift_;  // lift at cache_t_
};

AngleFunction angle_function(const CurveGeometry& curve, double base_t);

/// Extrema of the angle function = inflexion parameters, alternating max/min.
std::vector<AngleExtremum> local_extrema(const AngleFunction& angles);

DivisionPoints division_points(const CurveGeometry& curve, const AngleFunction& angles);

std::vector<ParallelArcSet> parallel_arc_sets(const CurveGeometry& curve,
                                              const DivisionPoints& division);

Correspondence solve_correspondence(const AngleFunction& angles,
                                    const ParallelDecomposition& decomposition,
                                    int arc_a, int arc_b);

/// Deterministic base point: argmax |position| on the validation grid,
/// nudged off inflexions; smallest t breaks ties.
double choose_base_point(const CurveGeometry& curve);

/// angle_function + division_points + parallel_arc_sets in one call.
ParallelDecomposition decompose(const CurveGeometry& curve, const AngleFunction& angles);

}  // namespace css
