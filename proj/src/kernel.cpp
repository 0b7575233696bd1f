#include "relativ/kernel.hpp"

#include <cmath>
#include <vector>

#include "relativ/quadrature.hpp"
#include "relativ/specfun.hpp"

namespace relativ {

double OperatorParams::mass_power() const {
    return std::pow(mass, 2.0 * order);
}

OperatorParams make_params(int dim, double order, double mass) {
    if (dim < 1 || dim > 3)
        throw std::domain_error("make_params: dimension must lie in {1,2,3}");
    if (!(order > 0.0 && order < 1.0))
        throw std::domain_error("make_params: order must lie in (0,1)");
    if (!(mass > 0.0)) throw std::domain_error("make_params: mass must be > 0");
    OperatorParams p;
    p.dim = dim;
    p.order = order;
    p.mass = mass;
    p.norm_const = std::pow(2.0, 1.0 - 0.5 * dim + order) *
                   std::pow(M_PI, -0.5 * dim) * order * (1.0 - order) /
                   std::tgamma(2.0 - order);
    return p;
}

double kernel_eval(const OperatorParams& params, double r) {
    if (!(r > 0.0)) throw std::domain_error("kernel_eval: r must be > 0");
    const double nu = params.kernel_order();
    const double m = params.mass;
    const double mr = m * r;
    // J(r) = c m^nu K_nu(mr) / r^nu, with K_nu(mr) = e^{-mr} * scaled.
    const double scaled = bessel_k_scaled(nu, mr);
    return params.norm_const * std::pow(m, nu) * scaled * std::exp(-mr) /
           std::pow(r, nu);
}

double sphere_area(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
        default: throw std::domain_error("sphere_area: dim must lie in {1,2,3}");
    }
}

double ball_volume(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
        default: throw std::domain_error("ball_volume: dim must lie in {1,2,3}");
    }
}

KernelBounds fit_kernel_bounds(const OperatorParams& params, double safety) {
    if (!(safety > 0.0 && safety < 1.0))
        throw std::domain_error("fit_kernel_bounds: safety must lie in (0,1)");
    const double nu = params.kernel_order();
    const double small_amp = 0.5 * std::tgamma(nu) * std::pow(2.0, nu);
    const double large_amp = std::sqrt(M_PI / 2.0);

    auto small_ratio = [&](double r) {
        return bessel_k(nu, r) * std::pow(r, nu) / small_amp;
    };
    auto large_ratio = [&](double r) {
        return bessel_k_scaled(nu, r) * std::sqrt(r) / large_amp;
    };

    const int n = 400;
    const double lo = 1e-6, hi = 1e4;
    auto grid_point = [&](int i, int count) {
        return lo * std::pow(hi / lo, double(i) / (count - 1));
    };

    KernelBounds b;
    // r0: largest sampled radius such that the small-r ratio stays within
    // `safety` of 1 on all smaller samples.
    bool found0 = false;
    for (int i = n - 1; i >= 0; --i) {
        const double r = grid_point(i, n);
        if (std::abs(small_ratio(r) - 1.0) <= safety) {
            b.r0 = r;
            found0 = true;
            break;
        }
    }
    bool found_inf = false;
    for (int i = 0; i < n; ++i) {
        const double r = grid_point(i, n);
        if (r < 1.0) continue;
        if (std::abs(large_ratio(r) - 1.0) <= safety) {
            b.R_inf = r;
            found_inf = true;
            break;
        }
    }
    if (!found0 || !found_inf)
        throw std::runtime_error("fit_kernel_bounds: no admissible radius found");

    b.c0 = (1.0 - safety) * small_amp;
    b.C0 = (1.0 + safety) * small_amp;
    b.c_inf = (1.0 - safety) * large_amp;
    b.C_inf = (1.0 + safety) * large_amp;

    // Verification sweep on a 10x finer grid.
    const int nf = 10 * n;
    for (int i = 0; i < nf; ++i) {
        const double r = grid_point(i, nf);
        if (r <= b.r0) {
            const double k = bessel_k(nu, r);
            const double env = std::pow(r, -nu);
            if (k < b.c0 * env || k > b.C0 * env)
                throw std::runtime_error("fit_kernel_bounds: small-r bound violated");
        }
        if (r >= b.R_inf) {
            const double ks = bessel_k_scaled(nu, r);
            const double env = 1.0 / std::sqrt(r);
            if (ks < b.c_inf * env || ks > b.C_inf * env)
                throw std::runtime_error("fit_kernel_bounds: large-r bound violated");
        }
    }
    return b;
}

double kernel_tail_mass(const OperatorParams& params, double R) {
    if (!(R > 0.0)) throw std::domain_error("kernel_tail_mass: R must be > 0");
    const int N = params.dim;
    auto radial = [&](double r) {
        return kernel_eval(params, r) * std::pow(r, N - 1);
    };
    return sphere_area(N) * integrate_to_inf(radial, R, 1e-10, 1e-12);
}

}  // namespace relativ
