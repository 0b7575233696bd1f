#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>

namespace relativ {

/// Raised when an adaptive scheme exhausts its node budget before
/// reaching the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gauss-Legendre nodes and weights on [-1, 1].  Results are cached per n.
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

const GaussRule& gauss_legendre(int n);

/// Adaptive Gauss-Kronrod (7-15) integration of f over [a, b].
/// Subdivides until the local error estimate satisfies
/// err <= abs_tol + rel_tol * |result| on every panel.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol = 0.0, int max_intervals = 4000);

/// Integral of f over [a, +inf) for integrands with (at least) exponential
/// tail decay.  Doubling panels [a, 2a], [2a, 4a], ... are accumulated until
/// a panel contributes less than abs_tol.
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        double abs_tol, double rel_tol = 0.0,
                        int max_panels = 200);

}  // namespace relativ
