#pragma once

#include <functional>
#include <limits>
#include <variant>

#include "relativ/operator.hpp"

namespace relativ {

/// Nonlinearity with its derivative (the Newton path needs f').
struct Nonlinearity {
    std::function<double(double)> f;
    std::function<double(double)> df;
};

/// (-Delta+m^2)^s u = f(u) in the unit ball, u = 0 outside.
struct BallRadialProblem {
    int dim = 1;
    Nonlinearity f;
    int nodes = 401;
};

/// Heteroclinic profile on the line with limits -1 / +1 at -inf / +inf.
struct LineProfileProblem {
    Nonlinearity f;
    double half_length = 20.0;
    int nodes = 801;
};

/// (-Delta+m^2)^s u + omega u = u^p on the whole space (truncated at L).
struct WholeSpaceProblem {
    int dim = 1;
    double omega = 0.0;
    double p = 3.0;
    double half_length = 15.0;
    int nodes = 601;
};

/// 3D boson star: (-Delta+m^2)^s u + omega u = (1/|x| * u^2) u.
struct HartreeProblem {
    double omega = 0.5;
    double half_length = 15.0;
    int nodes = 401;
};

using ProblemSpec = std::variant<BallRadialProblem, LineProfileProblem,
                                 WholeSpaceProblem, HartreeProblem>;

enum class SolveMethod { Newton, DampedPicard };

struct SolveReport {
    SampledField field;
    double residual_sup = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    SolveMethod method = SolveMethod::Newton;
    double truncation_bound = 0.0;  ///< kernel mass beyond the domain cutoff
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 60;         ///< Newton steps before giving up
    double damping = 0.0;      ///< Picard damping; 0 picks the default
    Eigen::VectorXd init;      ///< empty = named preset for the problem
    int threads = 1;
};

/// Grid, extension rule and preset initial values for a problem.
SampledField problem_grid(const ProblemSpec& problem,
                          const OperatorParams& params);

/// Newton with dense assembled Jacobian; on stagnation falls back to
/// Jacobi-scaled damped Picard.  The converged flag is granted only if the
/// matrix-free residual (apply_on_grid, not the assembly) meets `tol`.
SolveReport solve(const ProblemSpec& problem, const OperatorParams& params,
                  const QuadratureSpec& quad, const SolveOptions& opts = {});

/// Node-wise LHS - RHS, evaluated matrix-free.
Eigen::VectorXd residual(const ProblemSpec& problem,
                         const OperatorParams& params,
                         const QuadratureSpec& quad, const SampledField& field,
                         int threads = 1);

/// Newtonian potential of a radial density g on [0, L]:
///   V(r) = (4 pi / r) int_0^r g t^2 dt + 4 pi int_r^L g t dt  (+ tail).
SampledField hartree_potential(const SampledField& density);

/// Max difference quotient of f over [-1,-1+delta]^2 and [1-delta,1]^2 pairs
/// and whether it stays strictly below m^{2s}.
struct SlopeReport {
    double max_slope = 0.0;
    bool ok = false;
};
SlopeReport check_degiorgi_slope(const std::function<double(double)>& f,
                                 double m, double s, double delta);

}  // namespace relativ
