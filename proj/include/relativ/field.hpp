#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <variant>

namespace relativ {

enum class Geometry { Line1D, RadialN, Radial3D };

/// Exterior extension rules for sampled fields.  A field is known on its
/// node range; the rule defines its values everywhere else.
struct ZeroOutside {
    double radius = 0.0;  ///< support radius (line: the interval [-radius, radius])
};
struct ConstantLimits {
    double left = 0.0, right = 0.0;
};
struct DecayPower {
    double exponent = 0.0;   ///< u(x) = amplitude |x|^{-exponent} outside
    double amplitude = 0.0;  ///< matched at construction time by the caller
};
struct PeriodicTile {
    double period = 0.0;
};
using ExtensionRule =
    std::variant<ZeroOutside, ConstantLimits, DecayPower, PeriodicTile>;

struct SampledField {
    Geometry geometry = Geometry::Line1D;
    int dim = 1;  ///< ambient dimension N (Line1D: 1, Radial3D: 3)
    Eigen::VectorXd nodes;
    Eigen::VectorXd values;
    ExtensionRule extension = ZeroOutside{0.0};
};

/// Validates and assembles a field: at least 8 strictly increasing nodes,
/// finite values, radial grids starting at 0.  For ConstantLimits the
/// boundary node values must sit within `limit_tol` of the declared limits.
SampledField make_field(Geometry geometry, int dim, Eigen::VectorXd nodes,
                        Eigen::VectorXd values, ExtensionRule extension,
                        double limit_tol = 0.05);

/// Interpolation stencil: u(x) ~ sum_k w[k] * values[idx[k]] + affine.
/// The affine part carries the extension's contribution.
struct InterpStencil {
    int count = 0;
    int idx[4] = {0, 0, 0, 0};
    double w[4] = {0.0, 0.0, 0.0, 0.0};
    double affine = 0.0;
};

/// Linear functional m(values) = weights . values + affine; used for the
/// exterior mean a far sphere average converges to.
struct MeanFunctional {
    Eigen::VectorXd weights;
    double affine = 0.0;
};

/// Point evaluation of a SampledField with cubic (or linear) Lagrange
/// interpolation inside the grid and the extension rule outside.  Radial
/// geometries are mirrored through the origin, so the evaluator accepts any
/// signed coordinate.
class FieldEvaluator {
  public:
    explicit FieldEvaluator(const SampledField& field, int interp_order = 3);

    double operator()(double x) const;
    InterpStencil stencil(double x) const;

    /// The value the spherical mean S_t converges to as t -> infinity,
    /// expressed as a linear functional of the node values (nonzero weights
    /// only for PeriodicTile, where it is the period average).
    MeanFunctional exterior_mean() const;

    const SampledField& field() const { return *field_; }

  private:
    const SampledField* field_;
    int order_;
};

}  // namespace relativ
