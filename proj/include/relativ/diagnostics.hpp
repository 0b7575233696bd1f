#pragma once

#include <functional>
#include <string>
#include <vector>

#include "relativ/operator.hpp"
#include "relativ/solver.hpp"

namespace relativ {

enum class Verdict { Pass, Fail, Inconclusive };

const char* verdict_name(Verdict v);

/// Worst-case witness attached to every check: where it happened and the
/// offending value.
struct Witness {
    double location = 0.0;
    double value = 0.0;
};

struct DiagnosticCheck {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    Witness witness;
    double tol = 0.0;
};

/// Collection of qualitative checks; serializes to
/// {"checks":[{"name":..., "verdict":..., "witness":{...}, "tol":...}]}.
/// Checks are kept sorted by name so merged reports are deterministic.
struct DiagnosticsReport {
    std::vector<DiagnosticCheck> checks;

    void add(DiagnosticCheck check);
    std::string to_json() const;
};

/// w_lambda(x) = u(x^lambda) - u(x) with x^lambda = 2 lambda - x.
double reflect_difference(const FieldEvaluator& eval, double lambda, double x);

struct MovingPlaneResult {
    Eigen::VectorXd lambdas;
    Eigen::VectorXd min_w;      ///< per-lambda min of w_lambda over grid x < lambda
    bool found_center = false;  ///< a lambda in the sweep broke the sign
    double lambda0 = 0.0;       ///< largest lambda with min w_mu >= -tol for mu <= lambda
    double center = 0.0;        ///< symmetry center estimate (= lambda0)
};

/// Moving-plane sweep on a line field.  With `refine` the critical plane is
/// sharpened past the sweep resolution by bisection between the last
/// admissible lambda and the first failing one.
MovingPlaneResult moving_plane_sweep(const SampledField& field,
                                     const Eigen::VectorXd& lambda_grid,
                                     double tol = 1e-10, bool refine = false);

struct SlidingResult {
    Eigen::VectorXd taus;
    Eigen::VectorXd sup_w;  ///< per-tau sup of u(x) - u(x + tau) over the grid
    bool strict = false;    ///< sup < 0 for every tau
    bool weak = false;      ///< sup <= tol for every tau
};

/// Sliding sweep u(x) - u(x + tau) for positive shifts tau.  The field must
/// carry a ConstantLimits or DecayPower extension so shifted evaluation is
/// meaningful.
SlidingResult sliding_sweep(const SampledField& field,
                            const Eigen::VectorXd& tau_grid,
                            double tol = 1e-10);

struct StrongMaxResult {
    double pv_value = 0.0;  ///< operator value at x0 minus m^{2s} w(x0)
    double margin = 0.0;    ///< kernel-derived lower bound on -pv_value
    Verdict verdict = Verdict::Inconclusive;
};

/// Strong maximum principle probe: w >= 0 with an interior zero at x0 must
/// produce a strictly negative principal-value part unless w vanishes
/// identically.  The margin comes from the kernel mass over the annulus
/// where w exceeds half its maximum.
StrongMaxResult strong_max_check(const OperatorParams& params,
                                 const QuadratureSpec& quad,
                                 const SampledField& w, double x0,
                                 double tol = 1e-10);

/// Narrow-region constant
///   C = c0 sigma_{N-1} (int_0^1 rho^{N-2} (1+rho^2)^{-(N/2+s)} drho)
///       (1 - 4^{-s}) / (2s)                                   for N >= 2,
///   C = c0 (1 - 4^{-s}) / (2s)                                for N = 1,
/// where c0 is the fitted small-argument kernel lower constant and
/// sigma_{N-1} the area of the unit sphere in R^{N-1}.
double narrow_region_constant(const OperatorParams& params,
                              const KernelBounds& bounds);

/// Admissibility of a slab of width d with zeroth-order coefficient bounded
/// below by inf_c: requires d <= r0/(4m) and (-inf_c - m^{2s}) d^{2s} < C.
bool narrow_region_admissible(const OperatorParams& params,
                              const KernelBounds& bounds, double inf_c,
                              double width);

struct DecayRadiusResult {
    double R0 = 0.0;
    double R1 = 0.0;
    bool finite = false;
};

/// Decay-at-infinity radius R0 = max(R_inf/(3m), R1), with R1 the smallest
/// radius beyond which
///   g(R) = R^{s+1/2-N/2} e^{3mR} (c(R) + m^{2s})
/// stays above the threshold -2 c_{N,s} c_inf omega_N m^{(N-1)/2+s} / 3^{(N+1)/2+s}.
/// Profiles driving g below the threshold at every scanned radius report a
/// non-finite R0.
DecayRadiusResult decay_radius(const OperatorParams& params,
                               const KernelBounds& bounds,
                               const std::function<double(double)>& c_profile);

struct AverageIResult {
    double value = 0.0;
    bool in_regime = false;  ///< r >= R_inf / m, the validity range
};

/// I(r) = int_{|y|>1} r^{(N-1)/2-s} |y|^{-(N+1)/2-s} e^{-m r |y|} dy.
AverageIResult average_I(const OperatorParams& params,
                         const KernelBounds& bounds, double r);

struct AverageInequalityResult {
    double slack = 0.0;  ///< LHS - u(xbar); the inequality asks slack >= 0
    Verdict verdict = Verdict::Inconclusive;
};

/// Generalized average inequality at a ball-max point xbar with radius r:
///   [(-Delta+m^2)^s - m^{2s}] u(xbar) / (c_{N,s} c_inf m^{(N-1)/2+s} I(r))
///   + I(r)^{-1} int_{|y-xbar|>r} u(y) |xbar-y|^{-(N+1)/2-s} e^{-m|xbar-y|} dy
///   >= u(xbar).
/// Throws if xbar is not a max of the field over B_r(xbar) on the grid;
/// inconclusive when r < R_inf/m.
AverageInequalityResult average_inequality_check(
    const OperatorParams& params, const QuadratureSpec& quad,
    const KernelBounds& bounds, const SampledField& field, double xbar,
    double r, double tol = 1e-8);

struct LiouvilleResult {
    double C_star = 0.0;   ///< root of f(C) = m^{2s} C
    double sup_dev = 0.0;  ///< sup |u - C_star| at the final iterate
    int iterations = 0;
    bool slope_ok = false;  ///< sampled difference quotients stayed < m^{2s}
    Verdict verdict = Verdict::Inconclusive;
};

/// Damped Picard iteration of (-Delta+m^2)^s u = f(u) from a bounded
/// periodic-tiled line field; under the slope condition the iterates must
/// collapse to the constant C_star.  A failing slope condition demotes the
/// verdict to inconclusive (the run still happens).
LiouvilleResult liouville_iterate(const OperatorParams& params,
                                  const std::function<double(double)>& f,
                                  const SampledField& init,
                                  const SolveOptions& opts = {});

}  // namespace relativ
