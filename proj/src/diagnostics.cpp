#include "relativ/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "relativ/quadrature.hpp"

namespace relativ {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Signed sample coordinates of a field: the grid itself on the line, the
/// grid and its mirror image for radial geometries.
std::vector<double> signed_samples(const SampledField& field) {
    std::vector<double> xs(field.nodes.begin(), field.nodes.end());
    if (field.geometry != Geometry::Line1D) {
        for (double r : field.nodes)
            if (r > 0.0) xs.push_back(-r);
        std::sort(xs.begin(), xs.end());
    }
    return xs;
}

double min_reflected(const FieldEvaluator& eval,
                     const std::vector<double>& xs, double lambda,
                     double* argmin) {
    double best = kInf;
    for (double x : xs) {
        if (x >= lambda) break;
        const double w = reflect_difference(eval, lambda, x);
        if (w < best) {
            best = w;
            if (argmin) *argmin = x;
        }
    }
    return best;
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "inconclusive";
    }
}

void DiagnosticsReport::add(DiagnosticCheck check) {
    auto it = std::lower_bound(
        checks.begin(), checks.end(), check,
        [](const DiagnosticCheck& a, const DiagnosticCheck& b) {
            return a.name < b.name;
        });
    checks.insert(it, std::move(check));
}

std::string DiagnosticsReport::to_json() const {
    nlohmann::ordered_json root;
    root["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json item;
        item["name"] = c.name;
        item["verdict"] = verdict_name(c.verdict);
        item["witness"] = {{"location", c.witness.location},
                           {"value", c.witness.value}};
        item["tol"] = c.tol;
        root["checks"].push_back(std::move(item));
    }
    return root.dump(2);
}

double reflect_difference(const FieldEvaluator& eval, double lambda,
                          double x) {
    return eval(2.0 * lambda - x) - eval(x);
}

MovingPlaneResult moving_plane_sweep(const SampledField& field,
                                     const Eigen::VectorXd& lambda_grid,
                                     double tol, bool refine) {
    if (lambda_grid.size() == 0)
        throw std::invalid_argument("moving_plane_sweep: empty lambda grid");
    for (Eigen::Index i = 1; i < lambda_grid.size(); ++i)
        if (lambda_grid[i] <= lambda_grid[i - 1])
            throw std::invalid_argument(
                "moving_plane_sweep: lambda grid must be increasing");

    const FieldEvaluator eval(field);
    const std::vector<double> xs = signed_samples(field);

    MovingPlaneResult res;
    res.lambdas = lambda_grid;
    res.min_w.resize(lambda_grid.size());

    Eigen::Index first_fail = -1;
    for (Eigen::Index i = 0; i < lambda_grid.size(); ++i) {
        res.min_w[i] = min_reflected(eval, xs, lambda_grid[i], nullptr);
        if (first_fail < 0 && res.min_w[i] < -tol) first_fail = i;
    }

    if (first_fail < 0) {
        res.found_center = false;  // no plane broke the sign within the sweep
        res.lambda0 = lambda_grid[lambda_grid.size() - 1];
        res.center = res.lambda0;
        return res;
    }

    res.found_center = true;
    res.lambda0 = (first_fail == 0) ? lambda_grid[0]
                                    : lambda_grid[first_fail - 1];
    if (refine && first_fail > 0) {
        double lo = lambda_grid[first_fail - 1];  // min_w >= -tol here
        double hi = lambda_grid[first_fail];      // min_w < -tol here
        for (int it = 0; it < 80 && hi - lo > 1e-14 * (1.0 + std::abs(lo));
             ++it) {
            const double mid = 0.5 * (lo + hi);
            if (min_reflected(eval, xs, mid, nullptr) >= -tol)
                lo = mid;
            else
                hi = mid;
        }
        res.lambda0 = lo;
    }
    res.center = res.lambda0;
    return res;
}

SlidingResult sliding_sweep(const SampledField& field,
                            const Eigen::VectorXd& tau_grid, double tol) {
    if (field.geometry != Geometry::Line1D)
        throw std::invalid_argument("sliding_sweep: line fields only");
    if (!std::holds_alternative<ConstantLimits>(field.extension) &&
        !std::holds_alternative<DecayPower>(field.extension))
        throw std::invalid_argument(
            "sliding_sweep: shifts need a ConstantLimits or DecayPower "
            "extension");
    if (tau_grid.size() == 0)
        throw std::invalid_argument("sliding_sweep: empty tau grid");
    if (tau_grid.minCoeff() <= 0.0)
        throw std::invalid_argument("sliding_sweep: shifts must be positive");

    const FieldEvaluator eval(field);
    SlidingResult res;
    res.taus = tau_grid;
    res.sup_w.resize(tau_grid.size());
    res.strict = true;
    res.weak = true;
    for (Eigen::Index k = 0; k < tau_grid.size(); ++k) {
        const double tau = tau_grid[k];
        double sup = -kInf;
        for (Eigen::Index i = 0; i < field.nodes.size(); ++i)
            sup = std::max(sup,
                           field.values[i] - eval(field.nodes[i] + tau));
        res.sup_w[k] = sup;
        res.strict = res.strict && sup < 0.0;
        res.weak = res.weak && sup <= tol;
    }
    return res;
}

StrongMaxResult strong_max_check(const OperatorParams& params,
                                 const QuadratureSpec& quad,
                                 const SampledField& w, double x0,
                                 double tol) {
    if (w.geometry != Geometry::Line1D)
        throw std::invalid_argument("strong_max_check: line fields only");
    if (w.values.minCoeff() < -tol)
        throw std::invalid_argument("strong_max_check: field must be >= 0");
    const FieldEvaluator eval(w, quad.interp_order);
    if (std::abs(eval(x0)) > tol)
        throw std::invalid_argument(
            "strong_max_check: w must vanish at the probe point");

    StrongMaxResult res;
    const double full = apply_at_point(params, quad, w, x0);
    res.pv_value = full - params.mass_power() * eval(x0);

    const double M = w.values.maxCoeff();
    if (M <= tol) {
        // identically zero within tolerance: PV part must be ~0
        res.margin = 0.0;
        res.verdict = std::abs(res.pv_value) <= 100.0 * (tol + 1e-12)
                          ? Verdict::Pass
                          : Verdict::Fail;
        return res;
    }

    // kernel mass of the best single annulus inside {w > M/2}; a sphere
    // there carries at least half its weight (one of the two points) on the
    // high region, and the extra 1/2 absorbs interpolation slack
    double margin = 0.0;
    const int n = int(w.nodes.size());
    for (int i = 0; i < n; ++i) {
        if (w.values[i] <= 0.5 * M) continue;
        const double d = std::abs(w.nodes[i] - x0);
        if (d <= 0.0) continue;
        const double hl = (i > 0) ? 0.5 * (w.nodes[i] - w.nodes[i - 1]) : 0.0;
        const double hr =
            (i + 1 < n) ? 0.5 * (w.nodes[i + 1] - w.nodes[i]) : 0.0;
        const double lo = std::max(d - std::min(hl, hr), 0.5 * d);
        const double hi = d + std::min(hl, hr);
        if (hi <= lo) continue;
        const double mass =
            kernel_tail_mass(params, lo) - kernel_tail_mass(params, hi);
        margin = std::max(margin, 0.5 * 0.5 * (0.5 * M) * mass);
    }
    res.margin = margin;
    res.verdict = (res.pv_value < -margin) ? Verdict::Pass : Verdict::Fail;
    return res;
}

double narrow_region_constant(const OperatorParams& params,
                              const KernelBounds& bounds) {
    if (bounds.c0 <= 0.0 || bounds.r0 <= 0.0)
        throw std::invalid_argument(
            "narrow_region_constant: kernel bounds not fitted");
    const double s = params.order;
    const double tail = (1.0 - std::pow(4.0, -s)) / (2.0 * s);
    if (params.dim == 1) return bounds.c0 * tail;
    const double nu = params.kernel_order();
    const int N = params.dim;
    const double cross = integrate(
        [N, nu](double rho) {
            return std::pow(rho, N - 2) * std::pow(1.0 + rho * rho, -nu);
        },
        0.0, 1.0, 1e-13);
    return bounds.c0 * sphere_area(N - 1) * cross * tail;
}

bool narrow_region_admissible(const OperatorParams& params,
                              const KernelBounds& bounds, double inf_c,
                              double width) {
    if (width <= 0.0)
        throw std::invalid_argument("narrow_region_admissible: width <= 0");
    if (width > bounds.r0 / (4.0 * params.mass)) return false;
    const double C = narrow_region_constant(params, bounds);
    return (-inf_c - params.mass_power()) * std::pow(width, 2.0 * params.order) <
           C;
}

DecayRadiusResult decay_radius(const OperatorParams& params,
                               const KernelBounds& bounds,
                               const std::function<double(double)>& c_profile) {
    if (bounds.c_inf <= 0.0 || bounds.R_inf <= 0.0)
        throw std::invalid_argument("decay_radius: kernel bounds not fitted");
    const double m = params.mass;
    const double m2s = params.mass_power();
    const int N = params.dim;
    const double alpha = params.order + 0.5 - 0.5 * N;
    const double threshold =
        -2.0 * params.norm_const * bounds.c_inf * ball_volume(N) *
        std::pow(m, 0.5 * (N - 1) + params.order) /
        std::pow(3.0, 0.5 * (N + 1) + params.order);

    // g(R) = R^alpha e^{3mR} (c(R) + m^{2s}), evaluated in log form so the
    // exponential cannot overflow before the comparison happens
    auto g = [&](double R) {
        const double a = c_profile(R) + m2s;
        if (a >= 0.0) return kInf;  // trivially above any negative threshold
        const double E = 3.0 * m * R + std::log(-a) + alpha * std::log(R);
        return (E > 700.0) ? -kInf : -std::exp(E);
    };

    const double R_lo = 1e-2 / m;
    const double R_hi = 400.0 / m;
    const int n_scan = 400;
    std::vector<double> grid(n_scan);
    for (int i = 0; i < n_scan; ++i)
        grid[i] = R_lo * std::pow(R_hi / R_lo, double(i) / (n_scan - 1));

    int last_bad = -1;
    for (int i = 0; i < n_scan; ++i)
        if (g(grid[i]) <= threshold) last_bad = i;

    DecayRadiusResult res;
    if (last_bad == n_scan - 1) {
        res.R0 = kInf;
        res.R1 = kInf;
        res.finite = false;  // liminf condition violated on the scanned range
        return res;
    }
    double R1 = grid[0];
    if (last_bad >= 0) {
        double lo = grid[last_bad], hi = grid[last_bad + 1];
        for (int it = 0; it < 80 && hi - lo > 1e-12 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) <= threshold ? lo : hi) = mid;
        }
        R1 = hi;
    }
    res.R1 = R1;
    res.R0 = std::max(bounds.R_inf / (3.0 * m), R1);
    res.finite = true;
    return res;
}

AverageIResult average_I(const OperatorParams& params,
                         const KernelBounds& bounds, double r) {
    if (bounds.R_inf <= 0.0)
        throw std::invalid_argument("average_I: kernel bounds not fitted");
    if (r <= 0.0) throw std::invalid_argument("average_I: r must be positive");
    const int N = params.dim;
    const double s = params.order;
    const double mr = params.mass * r;
    AverageIResult res;
    res.in_regime = r >= bounds.R_inf / params.mass;
    const double expo = 0.5 * (N - 3) - s;
    res.value = std::pow(r, 0.5 * (N - 1) - s) * sphere_area(N) *
                integrate_to_inf(
                    [expo, mr](double t) {
                        return std::pow(t, expo) * std::exp(-mr * t);
                    },
                    1.0, 1e-12);
    return res;
}

AverageInequalityResult average_inequality_check(
    const OperatorParams& params, const QuadratureSpec& quad,
    const KernelBounds& bounds, const SampledField& field, double xbar,
    double r, double tol) {
    AverageInequalityResult res;
    const AverageIResult I = average_I(params, bounds, r);
    if (!I.in_regime) {
        res.verdict = Verdict::Inconclusive;
        return res;
    }

    const FieldEvaluator eval(field, quad.interp_order);
    const double u_bar = eval(xbar);
    for (double x : signed_samples(field))
        if (std::abs(x - xbar) <= r &&
            eval(x) > u_bar + 1e-10 * (1.0 + std::abs(u_bar)))
            throw std::invalid_argument(
                "average_inequality_check: xbar is not a ball max");

    const double opval = apply_at_point(params, quad, field, xbar);
    const int N = params.dim;
    const double expo = N - 1 - 0.5 * (N + 1) - params.order;
    std::vector<std::pair<double, double>> pts;
    auto integrand = [&](double t) {
        pts.clear();
        sphere_points(field.geometry, N, xbar, t, pts);
        double S = 0.0;
        for (const auto& pw : pts) S += pw.second * eval(pw.first);
        return S * sphere_area(N) * std::pow(t, expo) *
               std::exp(-params.mass * t);
    };
    const double outer = integrate_to_inf(integrand, r, 1e-12);

    const double denom = params.norm_const * bounds.c_inf *
                         std::pow(params.mass,
                                  0.5 * (N - 1) + params.order) *
                         I.value;
    res.slack = (opval - params.mass_power() * u_bar) / denom +
                outer / I.value - u_bar;
    res.verdict = (res.slack >= -tol) ? Verdict::Pass : Verdict::Fail;
    return res;
}

LiouvilleResult liouville_iterate(const OperatorParams& params,
                                  const std::function<double(double)>& f,
                                  const SampledField& init,
                                  const SolveOptions& opts) {
    if (!std::holds_alternative<PeriodicTile>(init.extension))
        throw std::invalid_argument(
            "liouville_iterate: init must be periodic-tiled");
    const double m2s = params.mass_power();

    LiouvilleResult res;

    // sampled difference-quotient condition on [inf init, sup init]
    {
        const double lo = init.values.minCoeff();
        const double hi = init.values.maxCoeff();
        const double span = std::max(hi - lo, 1e-6 * (1.0 + std::abs(hi)));
        double max_slope = -kInf;
        const int n = 64;
        for (int i = 0; i < n; ++i) {
            const double t1 = lo + span * i / (n - 1.0);
            const double h = 1e-7 * span;
            max_slope = std::max(max_slope, (f(t1 + h) - f(t1)) / h);
            for (int j = 0; j < i; ++j) {
                const double t2 = lo + span * j / (n - 1.0);
                max_slope = std::max(max_slope, (f(t1) - f(t2)) / (t1 - t2));
            }
        }
        res.slope_ok = max_slope < m2s;
    }

    // C* from f(C) = m^{2s} C; g is strictly decreasing under the slope
    // condition, so an expanding bracket plus bisection is exact
    auto g = [&](double C) { return f(C) - m2s * C; };
    {
        double lo = init.values.minCoeff() - 1.0;
        double hi = init.values.maxCoeff() + 1.0;
        bool ok = false;
        for (int it = 0; it < 80; ++it) {
            if (g(lo) > 0.0 && g(hi) < 0.0) {
                ok = true;
                break;
            }
            const double w = hi - lo;
            if (g(lo) <= 0.0) lo -= w;
            if (g(hi) >= 0.0) hi += w;
        }
        if (ok) {
            for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo));
                 ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) > 0.0 ? lo : hi) = mid;
            }
            res.C_star = 0.5 * (lo + hi);
        } else {
            res.verdict = Verdict::Inconclusive;
            res.C_star = std::numeric_limits<double>::quiet_NaN();
            return res;
        }
    }

    QuadratureSpec quad = default_quad(
        params, init.nodes[init.nodes.size() - 1] - init.nodes[0]);
    // linear stencils keep the assembled rows diagonally dominant, which the
    // Jacobi-damped iteration needs; the limit is a constant, so no accuracy
    // is lost
    quad.interp_order = 1;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    assemble_dense(params, quad, init, A, b, opts.threads);
    const Eigen::VectorXd diag = A.diagonal();
    const double eta = opts.damping > 0.0 ? opts.damping : 0.9;

    SampledField u = init;
    int iters = 0;
    double prev_step = kInf;
    for (; iters < opts.max_iter; ++iters) {
        Eigen::VectorXd rhs = u.values.unaryExpr(f);
        Eigen::VectorXd resid = A * u.values + b - rhs;
        const Eigen::VectorXd step =
            eta * (resid.array() / diag.array()).matrix();
        u.values -= step;
        // geometric remainder bound: with contraction ratio rho, the
        // distance to the limit is at most step * rho / (1 - rho)
        const double sn = step.cwiseAbs().maxCoeff();
        const double rho = std::min(sn / prev_step, 0.999);
        prev_step = std::max(sn, 1e-300);
        if (sn * rho / (1.0 - rho) < 0.5 * opts.tol && sn < 0.5 * opts.tol) {
            ++iters;
            break;
        }
    }
    res.iterations = iters;
    res.sup_dev = (u.values.array() - res.C_star).abs().maxCoeff();
    if (!res.slope_ok)
        res.verdict = Verdict::Inconclusive;
    else
        res.verdict = (res.sup_dev <= opts.tol) ? Verdict::Pass : Verdict::Fail;
    return res;
}

}  // namespace relativ
