#pragma once

#include <stdexcept>

namespace relativ {

/// Value of K_nu together with its exponentially scaled companion.
struct BesselValue {
    double value;         ///< K_nu(r); may underflow to 0 for r > ~750
    double scaled_value;  ///< e^r * K_nu(r); finite for r up to ~1e6
};

/// Modified Bessel function of the second kind, K_nu(r), nu > 0, r > 0.
/// Series evaluation for r <= 2, continued fraction for r > 2, upward
/// recurrence in the order.  Relative error ~1e-12 over the supported range.
/// For r > ~750 the unscaled value underflows to 0; kernel-side callers
/// must use bessel_k_scaled.
double bessel_k(double nu, double r);

/// e^r * K_nu(r); no underflow for r <= 1e6.
double bessel_k_scaled(double nu, double r);

/// Both the plain and scaled value in one evaluation.
BesselValue bessel_k_both(double nu, double r);

/// Independent check: K_nu(r) = \int_0^inf exp(-r cosh t) cosh(nu t) dt,
/// evaluated by adaptive quadrature on a truncated interval.  Absolute
/// error <= tol * (1 + result).  Used as the oracle for bessel_k.
double bessel_k_oracle(double nu, double r, double tol);

/// Central-difference residual of the defining ODE
///   r^2 K'' + r K' - (r^2 + nu^2) K = 0
/// using 5-point stencils of bessel_k.  |residual|/K = O(h^2) in the
/// smooth regime.
double bessel_ode_residual(double nu, double r, double h);

}  // namespace relativ
