#include "relativ/solver.hpp"

#include <Eigen/LU>
#include <cmath>

#include "relativ/quadrature.hpp"

namespace relativ {

namespace {

double signed_pow(double u, double p) {
    return std::copysign(std::pow(std::abs(u), p), u);
}

void validate(const ProblemSpec& problem, const OperatorParams& params) {
    if (const auto* ws = std::get_if<WholeSpaceProblem>(&problem)) {
        if (!(ws->omega > -params.mass_power()))
            throw std::invalid_argument("WholeSpaceProblem: omega must exceed -m^{2s}");
        if (!(ws->p > 1.0))
            throw std::invalid_argument("WholeSpaceProblem: p must be > 1");
    }
    if (const auto* hp = std::get_if<HartreeProblem>(&problem)) {
        if (!(hp->omega > -params.mass_power()))
            throw std::invalid_argument("HartreeProblem: omega must exceed -m^{2s}");
    }
    if (const auto* lp = std::get_if<LineProfileProblem>(&problem)) {
        const SlopeReport sr = check_degiorgi_slope(lp->f.f, params.mass,
                                                    params.order, 0.2);
        if (!sr.ok)
            throw std::invalid_argument(
                "LineProfileProblem: nonlinearity violates the slope condition "
                "near the limits");
    }
}

// RHS of the fixed-point form A u + b + omega u = F(u); dF is the diagonal
// derivative the Newton matrix uses (the Hartree potential is lagged: its
// own u-dependence is left out of dF).
struct Rhs {
    double omega = 0.0;
    std::function<void(const SampledField&, const Eigen::VectorXd&,
                       Eigen::VectorXd&, Eigen::VectorXd&)>
        eval;
};

Rhs make_rhs(const ProblemSpec& problem) {
    Rhs rhs;
    if (const auto* bp = std::get_if<BallRadialProblem>(&problem)) {
        Nonlinearity f = bp->f;
        rhs.eval = [f](const SampledField&, const Eigen::VectorXd& u,
                       Eigen::VectorXd& F, Eigen::VectorXd& dF) {
            F = u.unaryExpr(f.f);
            dF = u.unaryExpr(f.df);
        };
    } else if (const auto* lp = std::get_if<LineProfileProblem>(&problem)) {
        Nonlinearity f = lp->f;
        rhs.eval = [f](const SampledField&, const Eigen::VectorXd& u,
                       Eigen::VectorXd& F, Eigen::VectorXd& dF) {
            F = u.unaryExpr(f.f);
            dF = u.unaryExpr(f.df);
        };
    } else if (const auto* ws = std::get_if<WholeSpaceProblem>(&problem)) {
        const double p = ws->p;
        rhs.omega = ws->omega;
        rhs.eval = [p](const SampledField&, const Eigen::VectorXd& u,
                       Eigen::VectorXd& F, Eigen::VectorXd& dF) {
            F = u.unaryExpr([p](double v) { return signed_pow(v, p); });
            dF = u.unaryExpr(
                [p](double v) { return p * std::pow(std::abs(v), p - 1.0); });
        };
    } else {
        rhs.omega = std::get<HartreeProblem>(problem).omega;
        rhs.eval = [](const SampledField& proto, const Eigen::VectorXd& u,
                      Eigen::VectorXd& F, Eigen::VectorXd& dF) {
            SampledField dens = proto;
            dens.values = u.cwiseProduct(u);
            dens.extension = ZeroOutside{proto.nodes[proto.nodes.size() - 1]};
            const SampledField V = hartree_potential(dens);
            F = V.values.cwiseProduct(u);
            dF = V.values;
        };
    }
    return rhs;
}

}  // namespace

SampledField problem_grid(const ProblemSpec& problem,
                          const OperatorParams& params) {
    validate(problem, params);
    if (const auto* bp = std::get_if<BallRadialProblem>(&problem)) {
        if (bp->dim != params.dim)
            throw std::invalid_argument("problem_grid: dim mismatch with params");
        if (bp->dim == 1) {
            Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(bp->nodes, -1.0, 1.0);
            Eigen::VectorXd v = (1.0 - x.array().square()).max(0.0);
            return make_field(Geometry::Line1D, 1, x, v, ZeroOutside{1.0});
        }
        Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(bp->nodes, 0.0, 1.0);
        Eigen::VectorXd v = (1.0 - r.array().square()).max(0.0);
        const Geometry g = (bp->dim == 3) ? Geometry::Radial3D : Geometry::RadialN;
        return make_field(g, bp->dim, r, v, ZeroOutside{1.0});
    }
    if (const auto* lp = std::get_if<LineProfileProblem>(&problem)) {
        Eigen::VectorXd x =
            Eigen::VectorXd::LinSpaced(lp->nodes, -lp->half_length, lp->half_length);
        Eigen::VectorXd v = x.array().tanh();
        return make_field(Geometry::Line1D, 1, x, v, ConstantLimits{-1.0, 1.0});
    }
    if (const auto* ws = std::get_if<WholeSpaceProblem>(&problem)) {
        if (ws->dim != params.dim)
            throw std::invalid_argument("problem_grid: dim mismatch with params");
        const double cstar =
            std::pow(ws->omega + params.mass_power(), 1.0 / (ws->p - 1.0));
        const double amp = 1.5 * cstar;
        if (ws->dim == 1) {
            Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(
                ws->nodes, -ws->half_length, ws->half_length);
            Eigen::VectorXd v = amp * (-x.array().square()).exp();
            return make_field(Geometry::Line1D, 1, x, v,
                              ZeroOutside{ws->half_length});
        }
        Eigen::VectorXd r =
            Eigen::VectorXd::LinSpaced(ws->nodes, 0.0, ws->half_length);
        Eigen::VectorXd v = amp * (-r.array().square()).exp();
        const Geometry g = (ws->dim == 3) ? Geometry::Radial3D : Geometry::RadialN;
        return make_field(g, ws->dim, r, v, ZeroOutside{ws->half_length});
    }
    const auto& hp = std::get<HartreeProblem>(problem);
    if (params.dim != 3)
        throw std::invalid_argument("problem_grid: Hartree problem requires dim 3");
    Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(hp.nodes, 0.0, hp.half_length);
    Eigen::VectorXd v = (-r.array().square()).exp();
    return make_field(Geometry::Radial3D, 3, r, v, ZeroOutside{hp.half_length});
}

Eigen::VectorXd residual(const ProblemSpec& problem,
                         const OperatorParams& params,
                         const QuadratureSpec& quad, const SampledField& field,
                         int threads) {
    validate(problem, params);
    const Rhs rhs = make_rhs(problem);
    Eigen::VectorXd F, dF;
    rhs.eval(field, field.values, F, dF);
    const Eigen::VectorXd op = apply_on_grid(params, quad, field, threads);
    return op + rhs.omega * field.values - F;
}

namespace {

SolveReport solve_once(const ProblemSpec& problem, const OperatorParams& params,
                       const QuadratureSpec& quad, const SolveOptions& opts,
                       SampledField fld) {
    const int n = int(fld.nodes.size());
    const Rhs rhs = make_rhs(problem);

    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    assemble_dense(params, quad, fld, A, b, opts.threads);

    Eigen::VectorXd u = fld.values, F(n), dF(n);
    auto assembled_res = [&](const Eigen::VectorXd& v, Eigen::VectorXd& Fv,
                             Eigen::VectorXd& dFv) {
        rhs.eval(fld, v, Fv, dFv);
        return Eigen::VectorXd(A * v + b + rhs.omega * v - Fv);
    };

    SolveReport rep;
    rep.method = SolveMethod::Newton;
    Eigen::VectorXd best = u;
    double best_norm = std::numeric_limits<double>::infinity();
    std::vector<double> history;
    bool picard = false;
    int iters = 0;

    Eigen::VectorXd r = assembled_res(u, F, dF);
    for (; iters < opts.max_iter; ++iters) {
        const double rn = r.cwiseAbs().maxCoeff();
        if (!std::isfinite(rn)) break;
        if (rn < best_norm) {
            best_norm = rn;
            best = u;
        }
        history.push_back(rn);
        if (rn <= 0.5 * opts.tol) break;
        if (history.size() > 10 && rn > 0.99 * history[history.size() - 11]) {
            picard = true;
            break;
        }
        Eigen::MatrixXd J = A;
        J.diagonal().array() += rhs.omega - dF.array();
        const Eigen::VectorXd du = J.partialPivLu().solve(r);
        bool accepted = false;
        for (double alpha = 1.0; alpha >= 1.0 / 256.0; alpha *= 0.5) {
            Eigen::VectorXd utry = u - alpha * du;
            Eigen::VectorXd Ft, dFt;
            Eigen::VectorXd rtry = assembled_res(utry, Ft, dFt);
            const double rtn = rtry.cwiseAbs().maxCoeff();
            if (std::isfinite(rtn) && rtn < (1.0 - 1e-4 * alpha) * rn) {
                u = utry;
                F = Ft;
                dF = dFt;
                r = rtry;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            picard = true;
            break;
        }
    }

    if (picard && best_norm > 0.5 * opts.tol) {
        rep.method = SolveMethod::DampedPicard;
        u = best;
        r = assembled_res(u, F, dF);
        const double lip = dF.cwiseAbs().maxCoeff();
        const double eta =
            (opts.damping > 0.0)
                ? opts.damping
                : 0.5 / (1.0 + (std::abs(rhs.omega) + lip) /
                                   (params.mass_power() + 1.0));
        const int cap = std::max(2000, 20 * opts.max_iter);
        for (int k = 0; k < cap; ++k, ++iters) {
            Eigen::VectorXd D =
                (A.diagonal().array() + rhs.omega - dF.array())
                    .max(params.mass_power())
                    .matrix();
            u -= eta * r.cwiseQuotient(D);
            r = assembled_res(u, F, dF);
            const double rn = r.cwiseAbs().maxCoeff();
            if (!std::isfinite(rn)) break;
            if (rn < best_norm) {
                best_norm = rn;
                best = u;
            }
            if (rn <= 0.5 * opts.tol) break;
        }
    }

    fld.values = best;
    rep.field = fld;
    rep.iterations = iters;
    // The convergence verdict comes from the matrix-free application, not
    // from the assembled system the iteration itself used.
    rep.residual_sup = residual(problem, params, quad, fld, opts.threads)
                           .cwiseAbs()
                           .maxCoeff();
    rep.converged = rep.residual_sup <= opts.tol;
    const double extent = std::max(std::abs(fld.nodes[0]),
                                   std::abs(fld.nodes[fld.nodes.size() - 1]));
    rep.truncation_bound = kernel_tail_mass(params, extent) *
                           fld.values.cwiseAbs().maxCoeff();
    return rep;
}

}  // namespace

SolveReport solve(const ProblemSpec& problem, const OperatorParams& params,
                  const QuadratureSpec& quad, const SolveOptions& opts) {
    SampledField fld = problem_grid(problem, params);
    if (opts.init.size() > 0) {
        if (opts.init.size() != fld.values.size())
            throw std::invalid_argument("solve: init has wrong size");
        fld.values = opts.init;
    }
    SolveReport rep = solve_once(problem, params, quad, opts, fld);
    // Amplitude continuation for the Hartree problem, whose existence the
    // theory does not guarantee: retry from rescaled presets.
    if (!rep.converged && std::get_if<HartreeProblem>(&problem) &&
        opts.init.size() == 0) {
        for (double scale : {0.7, 1.4, 0.5, 2.0}) {
            SampledField retry = fld;
            retry.values = scale * problem_grid(problem, params).values;
            SolveReport r2 = solve_once(problem, params, quad, opts, retry);
            if (r2.residual_sup < rep.residual_sup) rep = r2;
            if (rep.converged) break;
        }
    }
    return rep;
}

SampledField hartree_potential(const SampledField& density) {
    if (density.geometry != Geometry::Radial3D)
        throw std::invalid_argument("hartree_potential: geometry must be Radial3D");
    if (density.values.minCoeff() < 0.0)
        throw std::invalid_argument("hartree_potential: density must be nonnegative");
    const FieldEvaluator g(density, 3);
    const Eigen::Index n = density.nodes.size();
    const double L = density.nodes[n - 1];

    // Per-cell Gauss prefix sums of g t^2 and g t.
    const GaussRule& gr = gauss_legendre(8);
    Eigen::VectorXd I2 = Eigen::VectorXd::Zero(n);  // int_0^r g t^2
    Eigen::VectorXd I1 = Eigen::VectorXd::Zero(n);  // int_0^r g t
    for (Eigen::Index i = 1; i < n; ++i) {
        const double a = density.nodes[i - 1], b2 = density.nodes[i];
        const double mid = 0.5 * (a + b2), half = 0.5 * (b2 - a);
        double s2 = 0.0, s1 = 0.0;
        for (int j = 0; j < 8; ++j) {
            const double t = mid + half * gr.nodes[j];
            const double gv = g(t);
            s2 += gr.weights[j] * half * gv * t * t;
            s1 += gr.weights[j] * half * gv * t;
        }
        I2[i] = I2[i - 1] + s2;
        I1[i] = I1[i - 1] + s1;
    }

    // Exterior contributions when the density extends past the grid.
    double tail1 = 0.0, tail2 = 0.0;
    if (!std::get_if<ZeroOutside>(&density.extension)) {
        tail1 = integrate_to_inf([&](double t) { return g(t) * t; }, L, 1e-12);
        tail2 = integrate_to_inf([&](double t) { return g(t) * t * t; }, L, 1e-12);
    }

    SampledField V = density;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = density.nodes[i];
        const double inner = (r > 0.0) ? I2[i] / r : 0.0;
        V.values[i] = 4.0 * M_PI * (inner + (I1[n - 1] - I1[i]) + tail1);
    }
    const double mass = 4.0 * M_PI * (I2[n - 1] + tail2);
    V.extension = DecayPower{1.0, mass};
    return V;
}

SlopeReport check_degiorgi_slope(const std::function<double(double)>& f,
                                 double m, double s, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("check_degiorgi_slope: delta must lie in (0,1)");
    SlopeReport rep;
    rep.max_slope = -std::numeric_limits<double>::infinity();
    const int n = 60;
    for (double a : {-1.0, 1.0 - delta}) {
        std::vector<double> t(n), ft(n);
        for (int i = 0; i < n; ++i) {
            t[i] = a + delta * i / (n - 1);
            ft[i] = f(t[i]);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                rep.max_slope =
                    std::max(rep.max_slope, (ft[j] - ft[i]) / (t[j] - t[i]));
        // near-coincident pairs approach the sup (the local derivative)
        const double h = 1e-7 * delta;
        for (int i = 0; i < n; ++i) {
            const double t2 = (i + 1 < n) ? t[i] + h : t[i] - h;
            rep.max_slope =
                std::max(rep.max_slope, (f(t2) - ft[i]) / (t2 - t[i]));
        }
    }
    rep.ok = rep.max_slope < std::pow(m, 2.0 * s);
    return rep;
}

}  // namespace relativ
