#include "relativ/operator.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "relativ/quadrature.hpp"

namespace relativ {

namespace {

void validate_spec(const QuadratureSpec& q) {
    if (!(q.near_radius > 0.0))
        throw std::invalid_argument("QuadratureSpec: near_radius must be > 0");
    if (q.near_nodes < 8)
        throw std::invalid_argument("QuadratureSpec: near_nodes must be >= 8");
    if (!(q.far_truncation_tol > 0.0))
        throw std::invalid_argument("QuadratureSpec: far_truncation_tol must be > 0");
    if (q.far_nodes_per_decade < 8)
        throw std::invalid_argument("QuadratureSpec: far_nodes_per_decade must be >= 8");
    if (q.interp_order != 1 && q.interp_order != 3)
        throw std::invalid_argument("QuadratureSpec: interp_order must be 1 or 3");
}

// sigma_N t^{N-1} J(t): the radial weight the spherical-mean reduction
// attaches to the sphere of radius t.
double radial_weight(const OperatorParams& p, double t) {
    return sphere_area(p.dim) * std::pow(t, p.dim - 1) * kernel_eval(p, t);
}

void check_geometry(const OperatorParams& p, const SampledField& f) {
    if (f.dim != p.dim)
        throw std::invalid_argument("operator: field/params dimension mismatch");
}

void run_rows(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const int nt = std::min(threads, n);
    for (int t = 0; t < nt; ++t) {
        const int lo = n * t / nt, hi = n * (t + 1) / nt;
        pool.emplace_back([&fn, lo, hi] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

QuadratureSpec default_quad(const OperatorParams& params, double span) {
    QuadratureSpec q;
    q.near_radius = std::min(1.0 / params.mass, 0.25 * span);
    return q;
}

QuadPlan build_plan(const OperatorParams& params, const QuadratureSpec& quad,
                    double reach, double far_dev) {
    validate_spec(quad);
    if (!(reach >= 0.0) || !(far_dev >= 0.0))
        throw std::invalid_argument("build_plan: reach/far_dev must be >= 0");
    const double s = params.order;
    const double m = params.mass;
    QuadPlan plan;

    // Innermost node: the [0, t_star] remainder, where the integrand behaves
    // like its value at t_star times (t/t_star)^{1-2s} (the second difference
    // is O(t^2) against the kernel's t^{-1-2s} radial weight), integrates to
    // g(t_star) * t_star / (2 - 2s).  t_star is kept large enough that the
    // second difference stays well above cancellation noise.
    const double t_star = 1e-4 * quad.near_radius;
    plan.nodes.emplace_back(t_star,
                            radial_weight(params, t_star) * t_star / (2.0 - 2.0 * s));

    // Near panels: geometric subdivision of [t_star, near_radius].
    const int K = 14;
    const double ratio = std::pow(t_star / quad.near_radius, 1.0 / K);
    const GaussRule& gn = gauss_legendre(quad.near_nodes);
    for (int k = 0; k < K; ++k) {
        const double hi = quad.near_radius * std::pow(ratio, k);
        const double lo = hi * ratio;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int j = 0; j < quad.near_nodes; ++j) {
            const double t = mid + half * gn.nodes[j];
            plan.nodes.emplace_back(t, gn.weights[j] * half * radial_weight(params, t));
        }
    }

    // Far cutoff: the neglected part is bounded by the kernel mass beyond
    // R_far times the field's deviation from its exterior limit out there.
    double R = std::max(quad.near_radius, reach);
    double tail = kernel_tail_mass(params, R);
    while (far_dev > 0.0 && tail * far_dev > quad.far_truncation_tol) {
        if (R > 1e9 * quad.near_radius || m * R > 1500.0)
            throw std::runtime_error("build_plan: truncation budget unattainable");
        R *= 2.0;
        tail = kernel_tail_mass(params, R);
    }
    plan.R_far = R;
    plan.tail_weight = tail;

    // Far panels: octaves while small, then steps of 4/m once the
    // exponential decay dominates, so fixed-order Gauss stays accurate.
    double lo = quad.near_radius;
    while (lo < plan.R_far * (1.0 - 1e-12)) {
        const double hi = std::min(plan.R_far, std::min(2.0 * lo, lo + 4.0 / m));
        const int nn = std::max(
            8, (int)std::ceil(quad.far_nodes_per_decade * std::log10(hi / lo)));
        const GaussRule& gf = gauss_legendre(nn);
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int j = 0; j < nn; ++j) {
            const double t = mid + half * gf.nodes[j];
            plan.nodes.emplace_back(t, gf.weights[j] * half * radial_weight(params, t));
        }
        lo = hi;
    }
    return plan;
}

void sphere_points(Geometry geometry, int dim, double x, double t,
                   std::vector<std::pair<double, double>>& out) {
    out.clear();
    if (geometry == Geometry::Line1D || dim == 1) {
        out.emplace_back(x + t, 0.5);
        out.emplace_back(x - t, 0.5);
        return;
    }
    if (dim == 2) {
        // Midpoint rule in the polar angle; spectral for the (even,
        // periodic) integrand away from the rho = 0 kink.
        const int n = 32;
        for (int i = 0; i < n; ++i) {
            const double phi = M_PI * (i + 0.5) / n;
            const double rho =
                std::sqrt(x * x + t * t - 2.0 * x * t * std::cos(phi));
            out.emplace_back(rho, 1.0 / n);
        }
        return;
    }
    // dim == 3: exact reduction S_t(r) = 1/(2rt) int_{|r-t|}^{r+t} u(rho) rho drho.
    if (x < 1e-12 * std::max(t, 1.0)) {
        out.emplace_back(t, 1.0);
        return;
    }
    const GaussRule& g = gauss_legendre(16);
    const double a = std::abs(x - t), b = x + t;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double total = 0.0;
    for (int j = 0; j < 16; ++j) {
        const double rho = mid + half * g.nodes[j];
        const double w = g.weights[j] * half * rho / (2.0 * x * t);
        total += w;
        out.emplace_back(rho, w);
    }
    // Renormalize: the weights sum to 1 analytically, but for t << x the
    // rounding of b - a is amplified by the kernel's near weight.
    for (auto& pw : out) pw.second /= total;
}

double apply_at_point(const OperatorParams& params, const QuadPlan& plan,
                      Geometry geometry, int dim,
                      const std::function<double(double)>& u, double x,
                      double s_inf) {
    const double ux = u(x);
    double pv = plan.tail_weight * (ux - s_inf);
    std::vector<std::pair<double, double>> pts;
    for (const auto& [t, w] : plan.nodes) {
        sphere_points(geometry, dim, x, t, pts);
        double mean = 0.0;
        for (const auto& [c, a] : pts) mean += a * u(c);
        pv += w * (ux - mean);
    }
    return params.mass_power() * ux + pv;
}

OperatorRow operator_row(const OperatorParams& params, const QuadPlan& plan,
                         const FieldEvaluator& eval, double x) {
    const Eigen::Index n = eval.field().nodes.size();
    OperatorRow row;
    row.weights = Eigen::VectorXd::Zero(n);
    const Geometry geom = eval.field().geometry;
    const int dim = eval.field().dim;

    auto scatter = [&](const InterpStencil& st, double coeff) {
        for (int k = 0; k < st.count; ++k) row.weights[st.idx[k]] += coeff * st.w[k];
        row.offset += coeff * st.affine;
    };

    double cx = params.mass_power() + plan.tail_weight;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [t, w] : plan.nodes) {
        cx += w;
        sphere_points(geom, dim, x, t, pts);
        for (const auto& [c, a] : pts) scatter(eval.stencil(c), -w * a);
    }
    scatter(eval.stencil(x), cx);

    const MeanFunctional mean = eval.exterior_mean();
    row.weights -= plan.tail_weight * mean.weights;
    row.offset -= plan.tail_weight * mean.affine;
    return row;
}

namespace {

// Distance beyond which every sphere around an interior point lies fully in
// the extension region, and a bound on |u - limit| out there.
double field_reach(const SampledField& f) {
    const Eigen::Index n = f.nodes.size();
    const double extent =
        std::max(std::abs(f.nodes[0]), std::abs(f.nodes[n - 1]));
    return 2.0 * extent;
}

double field_far_dev(const SampledField& f) {
    if (std::get_if<ZeroOutside>(&f.extension) ||
        std::get_if<ConstantLimits>(&f.extension))
        return 0.0;  // extension is exactly the limit beyond the reach
    if (const auto* dp = std::get_if<DecayPower>(&f.extension)) {
        const double reach = std::max(field_reach(f), 1.0);
        return std::abs(dp->amplitude) * std::pow(reach, -dp->exponent);
    }
    // PeriodicTile never settles; bound the oscillation by the value range.
    return f.values.maxCoeff() - f.values.minCoeff() + 1e-3;
}

void check_interior(const SampledField& f, double x) {
    const double last = f.nodes[f.nodes.size() - 1];
    const bool radial = f.geometry != Geometry::Line1D;
    const double c = radial ? std::abs(x) : x;
    const double first = radial ? 0.0 : f.nodes[0];
    if (std::get_if<PeriodicTile>(&f.extension)) return;  // every x wraps inside
    if (c < first || c > last)
        throw std::domain_error("apply_at_point: x outside the grid interior");
}

}  // namespace

double apply_at_point(const OperatorParams& params, const QuadratureSpec& quad,
                      const SampledField& field, double x) {
    check_geometry(params, field);
    check_interior(field, x);
    if (!lspace_check(params, field).finite)
        throw std::runtime_error("apply_at_point: field outside the weighted space");
    const FieldEvaluator eval(field, quad.interp_order);
    const QuadPlan plan = build_plan(params, quad, field_reach(field), field_far_dev(field));
    const MeanFunctional mean = eval.exterior_mean();
    const double s_inf = mean.weights.dot(field.values) + mean.affine;
    return apply_at_point(
        params, plan, field.geometry, field.dim,
        [&eval](double c) { return eval(c); }, x, s_inf);
}

Eigen::VectorXd apply_on_grid(const OperatorParams& params,
                              const QuadratureSpec& quad,
                              const SampledField& field, int threads) {
    check_geometry(params, field);
    const FieldEvaluator eval(field, quad.interp_order);
    const QuadPlan plan = build_plan(params, quad, field_reach(field), field_far_dev(field));
    const MeanFunctional mean = eval.exterior_mean();
    const double s_inf = mean.weights.dot(field.values) + mean.affine;
    const int n = int(field.nodes.size());
    Eigen::VectorXd out(n);
    gauss_legendre(16);  // warm the rule cache before going parallel
    run_rows(n, threads, [&](int i) {
        out[i] = apply_at_point(
            params, plan, field.geometry, field.dim,
            [&eval](double c) { return eval(c); }, field.nodes[i], s_inf);
    });
    return out;
}

void assemble_dense(const OperatorParams& params, const QuadratureSpec& quad,
                    const SampledField& proto, Eigen::MatrixXd& A,
                    Eigen::VectorXd& b, int threads) {
    check_geometry(params, proto);
    const int n = int(proto.nodes.size());
    if (n > 4096) throw std::invalid_argument("assemble_dense: grid exceeds 4096 nodes");
    const FieldEvaluator eval(proto, quad.interp_order);
    const QuadPlan plan = build_plan(params, quad, field_reach(proto), field_far_dev(proto));
    A.resize(n, n);
    b.resize(n);
    gauss_legendre(16);
    run_rows(n, threads, [&](int i) {
        OperatorRow row = operator_row(params, plan, eval, proto.nodes[i]);
        A.row(i) = row.weights.transpose();
        b[i] = row.offset;
    });
}

LspaceResult lspace_check(const OperatorParams& params,
                          const SampledField& field) {
    check_geometry(params, field);
    const FieldEvaluator eval(field, 3);
    const int N = field.dim;
    const double pw = 0.5 * (N + 1) + params.order;
    auto integrand = [&](double r) {
        const double wgt = std::exp(-r) / (1.0 + std::pow(r, pw));
        double u;
        if (field.geometry == Geometry::Line1D)
            u = std::abs(eval(r)) + std::abs(eval(-r));
        else
            u = sphere_area(N) * std::pow(r, N - 1) * std::abs(eval(r));
        return u * wgt;
    };
    LspaceResult res;
    res.value = integrate(integrand, 0.0, 1.0, 1e-10) +
                integrate_to_inf(integrand, 1.0, 1e-10);
    res.finite = std::isfinite(res.value);
    return res;
}

}  // namespace relativ
