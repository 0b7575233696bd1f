#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "relativ/diagnostics.hpp"
#include "relativ/quadrature.hpp"

using namespace relativ;

namespace {

SampledField line_field(const std::function<double(double)>& u, double L,
                        int n, ExtensionRule ext) {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, -L, L);
    Eigen::VectorXd v = x.unaryExpr(u);
    return make_field(Geometry::Line1D, 1, x, v, std::move(ext));
}

// composite Simpson, deliberately a different quadrature family than the
// adaptive Gauss-Kronrod the library uses
double simpson(const std::function<double(double)>& f, double a, double b,
               int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("moving plane: translated Gaussian pins its center") {
    const double a = 0.7;
    SampledField u = line_field(
        [a](double x) { return std::exp(-(x - a) * (x - a)); }, 10.0, 801,
        ZeroOutside{10.0});
    Eigen::VectorXd lambdas = Eigen::VectorXd::LinSpaced(81, -2.0, 2.0);
    const double cell = lambdas[1] - lambdas[0];
    const MovingPlaneResult res = moving_plane_sweep(u, lambdas, 1e-9);
    CHECK(res.found_center);
    CHECK(std::abs(res.lambda0 - a) <= cell + 1e-12);

    const MovingPlaneResult fine = moving_plane_sweep(u, lambdas, 1e-9, true);
    CHECK(std::abs(fine.lambda0 - a) < 2e-3);
}

TEST_CASE("moving plane: increasing profile reports no center") {
    SampledField u = line_field([](double x) { return std::tanh(x); }, 8.0,
                                401, ConstantLimits{-1.0, 1.0});
    Eigen::VectorXd lambdas = Eigen::VectorXd::LinSpaced(41, -2.0, 2.0);
    const MovingPlaneResult res = moving_plane_sweep(u, lambdas, 1e-9);
    CHECK_FALSE(res.found_center);
    for (int i = 0; i < res.min_w.size(); ++i) CHECK(res.min_w[i] >= -1e-9);
}

TEST_CASE("moving plane: translation shifts lambda0 by the offset") {
    auto base = [](double x) { return std::exp(-0.8 * x * x); };
    const double a = 0.4;
    SampledField u0 = line_field(base, 12.0, 961, ZeroOutside{12.0});
    SampledField ua = line_field([&](double x) { return base(x - a); }, 12.0,
                                 961, ZeroOutside{12.0});
    Eigen::VectorXd lambdas = Eigen::VectorXd::LinSpaced(121, -3.0, 3.0);
    const double cell = lambdas[1] - lambdas[0];
    const double l0 = moving_plane_sweep(u0, lambdas, 1e-9).lambda0;
    const double la = moving_plane_sweep(ua, lambdas, 1e-9).lambda0;
    CHECK(std::abs((la - l0) - a) <= cell + 1e-12);
}

TEST_CASE("moving plane: reflected difference is antisymmetric to round-off") {
    SampledField u = line_field(
        [](double x) { return std::exp(-0.5 * x * x) * (1.0 + 0.3 * x); },
        9.0, 301, ZeroOutside{9.0});
    const FieldEvaluator eval(u);
    const double lambda = 0.35;
    for (double x : {-3.0, -1.2, 0.1, 0.3}) {
        const double w = reflect_difference(eval, lambda, x);
        const double wr = reflect_difference(eval, lambda, 2.0 * lambda - x);
        CHECK(std::abs(w + wr) < 1e-14 * (1.0 + std::abs(w)));
    }
}

TEST_CASE("moving plane: input validation") {
    SampledField u = line_field([](double x) { return std::exp(-x * x); },
                                5.0, 101, ZeroOutside{5.0});
    CHECK_THROWS_AS(moving_plane_sweep(u, Eigen::VectorXd()),
                    std::invalid_argument);
    Eigen::VectorXd bad(3);
    bad << 0.0, 1.0, 0.5;
    CHECK_THROWS_AS(moving_plane_sweep(u, bad), std::invalid_argument);
}

TEST_CASE("sliding sweep: tanh is strictly increasing, constants are flat") {
    SampledField u = line_field([](double x) { return std::tanh(x); }, 8.0,
                                401, ConstantLimits{-1.0, 1.0});
    Eigen::VectorXd taus = Eigen::VectorXd::LinSpaced(20, 0.05, 4.0);
    const SlidingResult res = sliding_sweep(u, taus);
    CHECK(res.strict);
    CHECK(res.weak);
    for (int k = 0; k < res.sup_w.size(); ++k) CHECK(res.sup_w[k] < 0.0);

    SampledField c = line_field([](double) { return 3.0; }, 8.0, 101,
                                ConstantLimits{3.0, 3.0});
    const SlidingResult rc = sliding_sweep(c, taus);
    CHECK_FALSE(rc.strict);
    CHECK(rc.weak);
    for (int k = 0; k < rc.sup_w.size(); ++k)
        CHECK(std::abs(rc.sup_w[k]) < 1e-14);
}

TEST_CASE("sliding sweep: preconditions") {
    SampledField u = line_field([](double x) { return std::exp(-x * x); },
                                5.0, 101, ZeroOutside{5.0});
    Eigen::VectorXd taus = Eigen::VectorXd::LinSpaced(4, 0.5, 2.0);
    CHECK_THROWS_AS(sliding_sweep(u, taus), std::invalid_argument);

    SampledField t = line_field([](double x) { return std::tanh(x); }, 8.0,
                                101, ConstantLimits{-1.0, 1.0});
    Eigen::VectorXd neg(2);
    neg << -1.0, 1.0;
    CHECK_THROWS_AS(sliding_sweep(t, neg), std::invalid_argument);
    CHECK_THROWS_AS(sliding_sweep(t, Eigen::VectorXd()),
                    std::invalid_argument);
}

TEST_CASE("strong max principle: interior zero forces a negative PV part") {
    auto p = make_params(1, 0.5, 1.0);
    QuadratureSpec q = default_quad(p, 24.0);

    SampledField w = line_field(
        [](double x) { return x * x * std::exp(-x * x); }, 12.0, 961,
        ZeroOutside{12.0});
    const StrongMaxResult a = strong_max_check(p, q, w, 0.0);
    CHECK(a.margin > 0.0);
    CHECK(a.pv_value < -a.margin);
    CHECK(a.verdict == Verdict::Pass);

    // quadratic well glued to a bounded tail
    SampledField v = line_field(
        [](double x) { return std::min(x * x, 1.0); }, 12.0, 961,
        ConstantLimits{1.0, 1.0});
    const StrongMaxResult b = strong_max_check(p, q, v, 0.0);
    CHECK(b.pv_value < -b.margin);
    CHECK(b.verdict == Verdict::Pass);

    SampledField z = line_field([](double) { return 0.0; }, 12.0, 101,
                                ZeroOutside{12.0});
    const StrongMaxResult c = strong_max_check(p, q, z, 0.0);
    CHECK(c.verdict == Verdict::Pass);
    CHECK(std::abs(c.pv_value) < 1e-8);
}

TEST_CASE("strong max principle: precondition checks") {
    auto p = make_params(1, 0.5, 1.0);
    QuadratureSpec q = default_quad(p, 10.0);
    SampledField neg = line_field([](double x) { return std::sin(x); }, 5.0,
                                  101, ZeroOutside{5.0});
    CHECK_THROWS_AS(strong_max_check(p, q, neg, 0.0), std::invalid_argument);
    SampledField pos = line_field(
        [](double x) { return 1.0 + 0.1 * std::exp(-x * x); }, 5.0, 101,
        ConstantLimits{1.0, 1.0});
    CHECK_THROWS_AS(strong_max_check(p, q, pos, 0.0), std::invalid_argument);
}

TEST_CASE("narrow region constant matches the brute-force double integral") {
    for (int N : {2, 3}) {
        for (double s : {0.25, 0.5, 0.75}) {
            auto p = make_params(N, s, 1.0);
            const KernelBounds kb = fit_kernel_bounds(p);
            const double C = narrow_region_constant(p, kb);
            CHECK(C > 0.0);

            // the chain's double integral over t in [d, 2d], rho in [0, 1],
            // times d^{2s}; Simpson in both directions for independence
            const double d = 0.37;
            const double nu = 0.5 * N + s;
            auto inner = [&](double t) {
                return simpson(
                           [&](double rho) {
                               return std::pow(rho, N - 2) *
                                      std::pow(1.0 + rho * rho, -nu);
                           },
                           0.0, 1.0, 2000) /
                       std::pow(t, 1.0 + 2.0 * s);
            };
            const double brute = kb.c0 * sphere_area(N - 1) *
                                 simpson(inner, d, 2.0 * d, 2000) *
                                 std::pow(d, 2.0 * s);
            CHECK(std::abs(C - brute) < 1e-6 * brute);
        }
    }
}

TEST_CASE("narrow region constant: monotone in c0, N=1 form, admissibility") {
    auto p = make_params(1, 0.5, 1.0);
    KernelBounds kb = fit_kernel_bounds(p);
    const double C = narrow_region_constant(p, kb);
    const double s = p.order;
    CHECK(C == doctest::Approx(kb.c0 * (1.0 - std::pow(4.0, -s)) / (2.0 * s)));

    KernelBounds bigger = kb;
    bigger.c0 *= 2.0;
    CHECK(narrow_region_constant(p, bigger) > C);

    // c == 0: any admissible width passes; an over-wide slab does not
    const double dmax = kb.r0 / (4.0 * p.mass);
    CHECK(narrow_region_admissible(p, kb, 0.0, 0.5 * dmax));
    CHECK(narrow_region_admissible(p, kb, 0.0, dmax));
    CHECK_FALSE(narrow_region_admissible(p, kb, 0.0, 2.0 * dmax));

    CHECK_THROWS_AS(narrow_region_constant(p, KernelBounds{}),
                    std::invalid_argument);
}

TEST_CASE("decay radius: the three profile regimes") {
    auto p = make_params(1, 0.5, 1.0);
    const KernelBounds kb = fit_kernel_bounds(p);
    const double m2s = p.mass_power();

    const DecayRadiusResult trivial =
        decay_radius(p, kb, [](double) { return 0.0; });
    CHECK(trivial.finite);
    CHECK(trivial.R0 == doctest::Approx(kb.R_inf / (3.0 * p.mass)));

    const DecayRadiusResult cross = decay_radius(p, kb, [&](double R) {
        return -m2s - std::exp(-4.0 * p.mass * R);
    });
    CHECK(cross.finite);
    CHECK(cross.R1 > 0.0);
    CHECK(std::isfinite(cross.R0));
    // the crossing is genuine: g dips below the threshold just inside R1
    const double alpha = p.order + 0.5 - 0.5 * p.dim;
    const double thr = -2.0 * p.norm_const * kb.c_inf * ball_volume(p.dim) *
                       std::pow(p.mass, 0.5 * (p.dim - 1) + p.order) /
                       std::pow(3.0, 0.5 * (p.dim + 1) + p.order);
    auto g = [&](double R) {
        return std::pow(R, alpha) * std::exp(-p.mass * R) * (-1.0);
    };
    CHECK(g(cross.R1 * 0.999) <= thr);
    CHECK(g(cross.R1 * 1.001) > thr);

    const DecayRadiusResult bad =
        decay_radius(p, kb, [&](double) { return -2.0 * m2s; });
    CHECK_FALSE(bad.finite);
}

TEST_CASE("average I: dual quadrature, monotonicity, scale identity") {
    auto p = make_params(1, 0.5, 1.0);
    const KernelBounds kb = fit_kernel_bounds(p);
    const double r = std::max(2.0, kb.R_inf / p.mass);

    const AverageIResult I = average_I(p, kb, r);
    CHECK(I.in_regime);
    const double ref =
        2.0 * std::pow(r, -p.order) *
        simpson(
            [&](double t) {
                return std::pow(t, -1.0 - p.order) * std::exp(-p.mass * r * t);
            },
            1.0, 1.0 + 80.0 / (p.mass * r), 40000);
    CHECK(std::abs(I.value - ref) < 1e-9);

    double prev = average_I(p, kb, r).value;
    for (double rr = r + 0.5; rr < r + 6.0; rr += 0.5) {
        const double cur = average_I(p, kb, rr).value;
        CHECK(cur < prev);
        prev = cur;
    }

    // I(r; m) = I(m r; 1) m^{s - (N-1)/2}
    auto p2 = make_params(1, 0.5, 2.5);
    const KernelBounds kb2 = fit_kernel_bounds(p2);
    const double lhs = average_I(p2, kb2, r).value;
    const double rhs = average_I(p, kb, p2.mass * r).value *
                       std::pow(p2.mass, p2.order - 0.5 * (p2.dim - 1));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    CHECK_FALSE(average_I(p, kb, 0.1 * kb.R_inf / p.mass).in_regime);
}

TEST_CASE("average inequality: constants give equality, Gaussians slack") {
    auto p = make_params(1, 0.5, 1.0);
    const KernelBounds kb = fit_kernel_bounds(p);
    QuadratureSpec q = default_quad(p, 30.0);
    const double r = std::max(2.0, kb.R_inf / p.mass);

    SampledField c = line_field([](double) { return 1.7; }, 15.0, 301,
                                ConstantLimits{1.7, 1.7});
    const AverageInequalityResult rc =
        average_inequality_check(p, q, kb, c, 0.0, r);
    CHECK(rc.verdict == Verdict::Pass);
    CHECK(std::abs(rc.slack) < 1e-6);

    SampledField g = line_field([](double x) { return std::exp(-x * x); },
                                15.0, 601, ZeroOutside{15.0});
    const AverageInequalityResult rg =
        average_inequality_check(p, q, kb, g, 0.0, r);
    CHECK(rg.verdict == Verdict::Pass);
    CHECK(rg.slack > 0.0);

    // a far bump below the max does not break the inequality
    SampledField gb = line_field(
        [](double x) {
            return std::exp(-x * x) +
                   0.3 * std::exp(-4.0 * (x - 6.0) * (x - 6.0));
        },
        15.0, 601, ZeroOutside{15.0});
    const AverageInequalityResult rb =
        average_inequality_check(p, q, kb, gb, 0.0, r);
    CHECK(rb.verdict == Verdict::Pass);

    // xbar off the max violates the ball-max precondition
    CHECK_THROWS_AS(average_inequality_check(p, q, kb, g, 1.0, r),
                    std::invalid_argument);

    const AverageInequalityResult small = average_inequality_check(
        p, q, kb, g, 0.0, 0.1 * kb.R_inf / p.mass);
    CHECK(small.verdict == Verdict::Inconclusive);
}

TEST_CASE("average inequality holds on randomized bump fields") {
    auto p = make_params(1, 0.5, 1.0);
    const KernelBounds kb = fit_kernel_bounds(p);
    QuadratureSpec q = default_quad(p, 30.0);
    const double r0 = std::max(2.0, kb.R_inf / p.mass);

    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> amp(0.2, 2.0), wid(0.5, 2.0),
        off(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const double A = amp(rng), W = wid(rng), c = off(rng);
        SampledField u = line_field(
            [&](double x) {
                return A * std::exp(-(x - c) * (x - c) / (W * W));
            },
            18.0, 601, ZeroOutside{18.0});
        for (double r : {r0, r0 + 1.0, r0 + 3.0}) {
            const AverageInequalityResult res =
                average_inequality_check(p, q, kb, u, c, r);
            CHECK(res.verdict == Verdict::Pass);
        }
    }
}

TEST_CASE("liouville iteration collapses to the fixed-point constant") {
    auto p = make_params(1, 0.5, 1.0);
    const double m2s = p.mass_power();
    auto f = [m2s](double t) { return 0.5 * m2s * t + 1.0; };
    const double C_star = 2.0 / m2s;  // linear fixed point, solved by hand

    const int n = 128;
    const double P = 16.0;
    Eigen::VectorXd x =
        Eigen::VectorXd::LinSpaced(n, 0.0, P * (n - 1.0) / n);

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> U(-1.0, 3.0);
    for (int seed = 0; seed < 3; ++seed) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = U(rng);
        SampledField init =
            make_field(Geometry::Line1D, 1, x, v, PeriodicTile{P});
        SolveOptions opts;
        opts.tol = 1e-7;
        opts.max_iter = 4000;
        const LiouvilleResult res = liouville_iterate(p, f, init, opts);
        CHECK(res.slope_ok);
        CHECK(res.verdict == Verdict::Pass);
        CHECK(res.C_star == doctest::Approx(C_star).epsilon(1e-12));
        CHECK(res.sup_dev < 1e-6);
    }
}

TEST_CASE("liouville iteration: trivial and boundary slope cases") {
    auto p = make_params(1, 0.5, 1.0);
    const int n = 64;
    const double P = 8.0;
    Eigen::VectorXd x =
        Eigen::VectorXd::LinSpaced(n, 0.0, P * (n - 1.0) / n);
    SampledField zero = make_field(Geometry::Line1D, 1, x,
                                   Eigen::VectorXd::Zero(n), PeriodicTile{P});
    SolveOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 200;
    const LiouvilleResult rz =
        liouville_iterate(p, [](double) { return 0.0; }, zero, opts);
    CHECK(rz.C_star == doctest::Approx(0.0));
    CHECK(rz.sup_dev < 1e-12);
    CHECK(rz.verdict == Verdict::Pass);

    // slope exactly m^{2s}: strictness fails, verdict inconclusive
    const double m2s = p.mass_power();
    const LiouvilleResult rb = liouville_iterate(
        p, [m2s](double t) { return m2s * t; }, zero, opts);
    CHECK_FALSE(rb.slope_ok);
    CHECK(rb.verdict == Verdict::Inconclusive);

    SampledField nonper = line_field([](double) { return 0.0; }, 4.0, 64,
                                     ZeroOutside{4.0});
    CHECK_THROWS_AS(
        liouville_iterate(p, [](double) { return 0.0; }, nonper, opts),
        std::invalid_argument);
}

TEST_CASE("diagnostics report serializes sorted checks to JSON") {
    DiagnosticsReport rep;
    rep.add({"zeta", Verdict::Fail, {1.5, -0.25}, 1e-8});
    rep.add({"alpha", Verdict::Pass, {0.0, 0.0}, 1e-6});
    rep.add({"mid", Verdict::Inconclusive, {2.0, 3.0}, 1e-7});
    REQUIRE(rep.checks.size() == 3);
    CHECK(rep.checks[0].name == "alpha");
    CHECK(rep.checks[2].name == "zeta");
    const std::string j = rep.to_json();
    CHECK(j.find("\"checks\"") != std::string::npos);
    CHECK(j.find("\"verdict\": \"fail\"") != std::string::npos);
    CHECK(j.find("\"witness\"") != std::string::npos);
    CHECK(j.find("\"alpha\"") < j.find("\"mid\""));
    CHECK(j.find("\"mid\"") < j.find("\"zeta\""));
}
