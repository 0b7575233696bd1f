#pragma once

// Test-side reference implementations, deliberately independent of the
// library's quadrature plan: dense log-spaced trapezoid sums for the
// principal value (symmetric excision plus an analytic Taylor remainder)
// and Fourier-symbol evaluation for Gaussian profiles.

#include <cmath>
#include <functional>

#include "relativ/kernel.hpp"
#include "relativ/quadrature.hpp"
#include "relativ/specfun.hpp"

namespace oracles {

// (-Delta + m^2)^s u at x on the line for an analytic profile u:
//   m^{2s} u(x) + int_0^inf (2u(x) - u(x+z) - u(x-z)) J(z) dz,
// trapezoid in log z over [eps, Z] with `nodes` points; the excised
// [0, eps] piece is restored from the leading Taylor term
//   -u''(x) c Gamma(nu) 2^{nu-1} eps^{2-2s} / (2-2s).
inline double pv_line(const relativ::OperatorParams& p,
                      const std::function<double(double)>& u, double x,
                      int nodes = 400000) {
    const double nu = p.kernel_order();
    const double m = p.mass;
    const double eps = 1e-8;
    const double Z = 60.0 / m;
    auto J = [&](double z) {
        return p.norm_const * std::pow(m, nu) *
               relativ::bessel_k_scaled(nu, m * z) * std::exp(-m * z) /
               std::pow(z, nu);
    };
    const double ux = u(x);
    auto f = [&](double lz) {
        const double z = std::exp(lz);
        return (2.0 * ux - u(x + z) - u(x - z)) * J(z) * z;  // dz = z dlog z
    };
    const double la = std::log(eps), lb = std::log(Z);
    const double h = (lb - la) / (nodes - 1);
    double sum = 0.5 * (f(la) + f(lb));
    for (int i = 1; i < nodes - 1; ++i) sum += f(la + i * h);
    sum *= h;

    const double d2h = 1e-5;
    const double upp = (u(x + d2h) - 2.0 * ux + u(x - d2h)) / (d2h * d2h);
    const double head = -upp * p.norm_const * std::tgamma(nu) *
                        std::pow(2.0, nu - 1.0) * std::pow(eps, 2.0 - 2.0 * p.order) /
                        (2.0 - 2.0 * p.order);
    return p.mass_power() * ux + sum + head;
}

// Fourier-side value of (-Delta + m^2)^s e^{-x^2} on the line:
//   (1/pi) int_0^inf cos(xi x) (xi^2 + m^2)^s sqrt(pi) e^{-xi^2/4} dxi.
inline double fourier_gaussian_line(double s, double m, double x) {
    auto f = [&](double xi) {
        return std::cos(xi * x) * std::pow(xi * xi + m * m, s) *
               std::sqrt(M_PI) * std::exp(-0.25 * xi * xi);
    };
    return relativ::integrate(f, 0.0, 40.0, 1e-12) / M_PI;
}

// Fourier-side value of (-Delta + m^2)^s e^{-|x|^2} in R^3 at radius r:
//   (1/(2 pi^2 r)) int_0^inf xi sin(xi r)(xi^2+m^2)^s pi^{3/2} e^{-xi^2/4} dxi,
// with the r -> 0 limit handled by sin(xi r)/r -> xi.
inline double fourier_gaussian_radial3(double s, double m, double r) {
    auto f = [&](double xi) {
        const double osc = (r < 1e-12) ? xi : std::sin(xi * r) / r;
        return xi * osc * std::pow(xi * xi + m * m, s) *
               std::pow(M_PI, 1.5) * std::exp(-0.25 * xi * xi);
    };
    return relativ::integrate(f, 0.0, 40.0, 1e-12) / (2.0 * M_PI * M_PI);
}

// Fractional Laplacian (-Delta)^s u at x on the line with the pure power
// kernel and constant C_{N,s} = c_{N,s} 2^{N/2+s-1} Gamma(N/2+s); same
// dense-trapezoid scheme as pv_line.
inline double frac_lap_line(const relativ::OperatorParams& p,
                            const std::function<double(double)>& u, double x,
                            double Z, int nodes = 400000) {
    const double s = p.order;
    const double nu = p.kernel_order();
    const double C = p.norm_const * std::pow(2.0, nu - 1.0) * std::tgamma(nu);
    const double eps = 1e-8;
    const double ux = u(x);
    auto f = [&](double lz) {
        const double z = std::exp(lz);
        return (2.0 * ux - u(x + z) - u(x - z)) * C * std::pow(z, -1.0 - 2.0 * s) * z;
    };
    const double la = std::log(eps), lb = std::log(Z);
    const double h = (lb - la) / (nodes - 1);
    double sum = 0.5 * (f(la) + f(lb));
    for (int i = 1; i < nodes - 1; ++i) sum += f(la + i * h);
    sum *= h;
    const double d2h = 1e-5;
    const double upp = (u(x + d2h) - 2.0 * ux + u(x - d2h)) / (d2h * d2h);
    const double head = -upp * C * std::pow(eps, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    // beyond Z the profile is negligible, leaving 2 u(x) against the kernel tail
    const double far = 2.0 * ux * C * std::pow(Z, -2.0 * s) / (2.0 * s);
    return sum + head + far;
}

}  // namespace oracles
