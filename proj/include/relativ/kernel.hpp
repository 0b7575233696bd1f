#pragma once

#include <stdexcept>

namespace relativ {

/// Parameters of the operator (-Delta + m^2)^s together with the cached
/// normalization constant
///   c_{N,s} = 2^{1 - N/2 + s} pi^{-N/2} s(1-s) / Gamma(2-s).
struct OperatorParams {
    int dim;            ///< N in {1, 2, 3}
    double order;       ///< s in (0, 1)
    double mass;        ///< m > 0
    double norm_const;  ///< c_{N,s}

    double kernel_order() const { return 0.5 * dim + order; }  ///< nu = N/2 + s
    double mass_power() const;                                 ///< m^{2s}
};

OperatorParams make_params(int dim, double order, double mass);

/// Empirically fitted two-sided bounds on K_nu:
///   c0 / r^nu      <= K_nu(r) <= C0 / r^nu         for r <= r0,
///   c_inf/(sqrt(r) e^r) <= K_nu(r) <= C_inf/(sqrt(r) e^r)  for r >= R_inf.
struct KernelBounds {
    double r0 = 0.0;
    double R_inf = 0.0;
    double c0 = 0.0, C0 = 0.0;
    double c_inf = 0.0, C_inf = 0.0;
};

/// The radial jump kernel
///   J(r) = c_{N,s} m^{N/2+s} K_{N/2+s}(m r) / r^{N/2+s},
/// evaluated underflow-safely through the scaled Bessel form.
double kernel_eval(const OperatorParams& params, double r);

/// Fits (r0, R_inf) and the bound constants by sampling K_nu on log grids;
/// the returned bounds are re-verified on a 10x finer grid.  `safety` in
/// (0, 1) is the allowed deviation of the asymptotic ratio from 1.
KernelBounds fit_kernel_bounds(const OperatorParams& params, double safety = 0.5);

/// Mass of the kernel outside radius R:
///   \int_{|z| > R} J(|z|) dz = |S^{N-1}| \int_R^inf J(r) r^{N-1} dr.
/// Diverges like R^{-2s} as R -> 0+, decays exponentially for large R.
double kernel_tail_mass(const OperatorParams& params, double R);

/// Area of the unit sphere S^{N-1} in R^N (2 for N=1 by convention:
/// the two half-lines).
double sphere_area(int dim);

/// Volume of the unit ball in R^N.
double ball_volume(int dim);

}  // namespace relativ
