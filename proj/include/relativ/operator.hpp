#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "relativ/field.hpp"
#include "relativ/kernel.hpp"

namespace relativ {

/// Quadrature controls for evaluating the principal-value integral.
struct QuadratureSpec {
    double near_radius = 0.0;        ///< near/far split radius (> 0)
    int near_nodes = 16;             ///< Gauss nodes per near panel (>= 8)
    double far_truncation_tol = 1e-10;
    int far_nodes_per_decade = 24;   ///< (>= 8)
    int interp_order = 3;            ///< 1 or 3
};

/// Default spec for a grid spanning `span`: near_radius = min(1/m, span/4).
QuadratureSpec default_quad(const OperatorParams& params, double span);

/// Precomputed radial quadrature: the PV part of the operator is
///   sum_q w_q (u(x) - S_{t_q}(x)) + tail_weight (u(x) - S_inf),
/// where S_t is the spherical mean of u over the sphere of radius t about x
/// and the weights fold in |S^{N-1}| t^{N-1} J(t).  The innermost node
/// carries the power-extrapolated remainder of [0, t_min]; the tail weight
/// is the kernel mass beyond R_far.
struct QuadPlan {
    std::vector<std::pair<double, double>> nodes;  // (t, weight)
    double tail_weight = 0.0;
    double R_far = 0.0;
};

/// Builds the plan.  Beyond radius `reach` from any evaluation point the
/// spherical mean deviates from its limit by at most `far_dev`; the cutoff
/// R_far >= reach grows until kernel_tail_mass(R_far) * far_dev drops below
/// far_truncation_tol (immediately satisfied when far_dev = 0, i.e. the
/// extension is exact).  Throws if the truncation budget is unattainable.
QuadPlan build_plan(const OperatorParams& params, const QuadratureSpec& quad,
                    double reach, double far_dev);

/// Points and weights of the spherical mean S_t at base point x: appends
/// (coordinate, weight) pairs with weights summing to 1.  Coordinates are
/// signed line positions (Line1D) or radii (radial geometries).
void sphere_points(Geometry geometry, int dim, double x, double t,
                   std::vector<std::pair<double, double>>& out);

/// Full operator value (-Delta + m^2)^s u at x for an analytic profile
/// given as a callable on the signed coordinate; `s_inf` is the limit of the
/// spherical mean at infinity implied by the profile's tails.
double apply_at_point(const OperatorParams& params, const QuadPlan& plan,
                      Geometry geometry, int dim,
                      const std::function<double(double)>& u, double x,
                      double s_inf = 0.0);

/// One assembled row: operator value at x = weights . values + offset.
struct OperatorRow {
    Eigen::VectorXd weights;
    double offset = 0.0;
};
OperatorRow operator_row(const OperatorParams& params, const QuadPlan& plan,
                         const FieldEvaluator& eval, double x);

/// Operator value at x for a sampled field (interior x only).
double apply_at_point(const OperatorParams& params, const QuadratureSpec& quad,
                      const SampledField& field, double x);

/// Operator values at every grid node.  `threads` <= 1 runs serially; rows
/// are independent, so output is deterministic regardless of thread count.
Eigen::VectorXd apply_on_grid(const OperatorParams& params,
                              const QuadratureSpec& quad,
                              const SampledField& field, int threads = 1);

/// Dense discretization: apply_on_grid(values) = A * values + b for fields
/// sharing this grid/extension.  A_ii >= m^{2s}, A_ij <= 0 off-diagonal.
void assemble_dense(const OperatorParams& params, const QuadratureSpec& quad,
                    const SampledField& proto, Eigen::MatrixXd& A,
                    Eigen::VectorXd& b, int threads = 1);

/// Membership in the weighted space the operator needs:
///   integral of e^{-|x|} |u(x)| / (1 + |x|^{(N+1)/2+s}) dx.
struct LspaceResult {
    double value = 0.0;
    bool finite = false;
};
LspaceResult lspace_check(const OperatorParams& params,
                          const SampledField& field);

}  // namespace relativ
