// relativ-op: batch front end for the pseudo-relativistic operator library.
// Configs in (JSON), artifacts out (CSV + JSON manifest).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "relativ/diagnostics.hpp"
#include "relativ/io.hpp"
#include "relativ/kernel.hpp"
#include "relativ/operator.hpp"
#include "relativ/solver.hpp"
#include "relativ/specfun.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace relativ;

namespace {

constexpr const char* kVersion = "relativ-op 0.1.0";

/// Verdict failures flip the process exit status to 2.
struct VerdictFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOpts {
    std::string config;
    std::string out_dir = ".";
    double tol_scale = 1.0;
    int threads = 0;  // 0: RELATIVOP_THREADS env or 1
    bool plot_script = false;
};

int resolve_threads(const GlobalOpts& g) {
    if (g.threads > 0) return g.threads;
    if (const char* env = std::getenv("RELATIVOP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

void reject_unknown(const ordered_json& obj,
                    std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument("config " + where + ": unknown key \"" +
                                        it.key() + "\"");
    }
}

ordered_json load_config(const GlobalOpts& g, const char* command) {
    if (g.config.empty())
        throw std::invalid_argument(std::string(command) +
                                    ": --config is required");
    ordered_json cfg = ordered_json::parse(read_text(g.config));
    if (cfg.contains("command") &&
        cfg["command"].get<std::string>() != command)
        throw std::invalid_argument("config names command \"" +
                                    cfg["command"].get<std::string>() +
                                    "\" but subcommand is " + command);
    return cfg;
}

OperatorParams params_from(const ordered_json& j) {
    reject_unknown(j, {"dim", "order", "mass"}, "params");
    return make_params(j.at("dim").get<int>(), j.at("order").get<double>(),
                       j.at("mass").get<double>());
}

QuadratureSpec quad_from(const ordered_json& cfg, const OperatorParams& p,
                         double span, double tol_scale) {
    QuadratureSpec q = default_quad(p, span);
    if (cfg.contains("quadrature")) {
        const ordered_json& j = cfg["quadrature"];
        reject_unknown(j,
                       {"near_radius", "near_nodes", "far_truncation_tol",
                        "far_nodes_per_decade", "interp_order"},
                       "quadrature");
        if (j.contains("near_radius"))
            q.near_radius = j["near_radius"].get<double>();
        if (j.contains("near_nodes"))
            q.near_nodes = j["near_nodes"].get<int>();
        if (j.contains("far_truncation_tol"))
            q.far_truncation_tol = j["far_truncation_tol"].get<double>();
        if (j.contains("far_nodes_per_decade"))
            q.far_nodes_per_decade = j["far_nodes_per_decade"].get<int>();
        if (j.contains("interp_order"))
            q.interp_order = j["interp_order"].get<int>();
    }
    q.far_truncation_tol *= tol_scale;
    return q;
}

/// Polynomial nonlinearity f(u) = sum_k a_k u^k from its coefficient list.
Nonlinearity poly_nonlinearity(const std::vector<double>& a) {
    return {[a](double u) {
                double acc = 0.0, pw = 1.0;
                for (double c : a) {
                    acc += c * pw;
                    pw *= u;
                }
                return acc;
            },
            [a](double u) {
                double acc = 0.0, pw = 1.0;
                for (std::size_t k = 1; k < a.size(); ++k) {
                    acc += double(k) * a[k] * pw;
                    pw *= u;
                }
                return acc;
            }};
}

struct Artifacts {
    const GlobalOpts* g;
    ordered_json manifest;
    std::vector<std::string> csv_files;

    explicit Artifacts(const GlobalOpts& go, const char* command) : g(&go) {
        fs::create_directories(go.out_dir);
        manifest["version"] = kVersion;
        manifest["command"] = command;
        manifest["tol_scale"] = go.tol_scale;
        manifest["outputs"] = ordered_json::array();
    }

    std::string write(const std::string& name, const std::string& content) {
        const std::string path = (fs::path(g->out_dir) / name).string();
        write_text_atomic(path, content);
        manifest["outputs"].push_back(
            {{"path", name}, {"hash", content_hash(content)}});
        if (name.size() > 4 && name.substr(name.size() - 4) == ".csv")
            csv_files.push_back(name);
        return path;
    }

    void finish() {
        if (g->plot_script && !csv_files.empty()) {
            std::string gp =
                "set datafile separator \",\"\nset key autotitle "
                "columnhead\n";
            for (const auto& f : csv_files)
                gp += "plot '" + f + "' using 1:2 with lines\npause -1\n";
            write("plot.gp", gp);
        }
        const std::string path =
            (fs::path(g->out_dir) / "manifest.json").string();
        write_text_atomic(path, manifest.dump(2) + "\n");
    }
};

ordered_json check_to_json(const DiagnosticCheck& c) {
    return {{"name", c.name},
            {"verdict", verdict_name(c.verdict)},
            {"witness",
             {{"location", c.witness.location}, {"value", c.witness.value}}},
            {"tol", c.tol}};
}

ordered_json report_to_json(const DiagnosticsReport& rep) {
    ordered_json j;
    j["checks"] = ordered_json::array();
    for (const auto& c : rep.checks) j["checks"].push_back(check_to_json(c));
    return j;
}

bool any_failed(const DiagnosticsReport& rep) {
    for (const auto& c : rep.checks)
        if (c.verdict == Verdict::Fail) return true;
    return false;
}

// ---------------------------------------------------------------- bessel ---

void run_bessel(const GlobalOpts& g, double nu, double r) {
    if (!g.config.empty()) {
        ordered_json cfg = load_config(g, "bessel");
        reject_unknown(cfg, {"command", "nu", "r_min", "r_max", "count"},
                       "bessel");
        const double cnu = cfg.at("nu").get<double>();
        const double r0 = cfg.at("r_min").get<double>();
        const double r1 = cfg.at("r_max").get<double>();
        const int n = cfg.at("count").get<int>();
        if (n < 2 || !(r1 > r0) || !(r0 > 0.0))
            throw std::invalid_argument(
                "bessel: need r_max > r_min > 0 and count >= 2");
        Artifacts art(g, "bessel");
        art.manifest["nu"] = cnu;
        std::string csv = "r,K\r\n";
        for (int i = 0; i < n; ++i) {
            const double ri = r0 * std::pow(r1 / r0, double(i) / (n - 1));
            csv += format_sig17(ri) + "," + format_sig17(bessel_k(cnu, ri)) +
                   "\r\n";
        }
        art.write("bessel.csv", csv);
        art.finish();
        return;
    }
    if (!(nu > 0.0) || !(r > 0.0))
        throw std::invalid_argument("bessel: give --nu and --r, or --config");
    std::cout << format_sig17(bessel_k(nu, r)) << "\n";
}

// ---------------------------------------------------------------- kernel ---

void run_kernel(const GlobalOpts& g) {
    ordered_json cfg = load_config(g, "kernel");
    reject_unknown(cfg, {"command", "params", "safety", "samples"}, "kernel");
    const OperatorParams p = params_from(cfg.at("params"));
    const double safety =
        cfg.contains("safety") ? cfg["safety"].get<double>() : 0.5;
    const int samples =
        cfg.contains("samples") ? cfg["samples"].get<int>() : 200;
    const KernelBounds kb = fit_kernel_bounds(p, safety);

    Artifacts art(g, "kernel");
    art.manifest["params"] = {{"dim", p.dim}, {"order", p.order},
                              {"mass", p.mass}, {"norm_const", p.norm_const}};
    ordered_json bj = {{"r0", kb.r0},     {"R_inf", kb.R_inf},
                       {"c0", kb.c0},     {"C0", kb.C0},
                       {"c_inf", kb.c_inf}, {"C_inf", kb.C_inf},
                       {"safety", safety}};
    art.write("kernel_bounds.json", bj.dump(2) + "\n");

    std::string csv = "r,J\r\n";
    const double lo = 1e-2 / p.mass, hi = 20.0 / p.mass;
    for (int i = 0; i < samples; ++i) {
        const double r = lo * std::pow(hi / lo, double(i) / (samples - 1));
        csv += format_sig17(r) + "," + format_sig17(kernel_eval(p, r)) +
               "\r\n";
    }
    art.write("kernel.csv", csv);
    art.finish();
}

// -------------------------------------------------------------------- op ---

void run_op(const GlobalOpts& g) {
    ordered_json cfg = load_config(g, "op");
    reject_unknown(cfg, {"command", "params", "quadrature", "field"}, "op");
    const OperatorParams p = params_from(cfg.at("params"));
    const ordered_json& fj = cfg.at("field");
    reject_unknown(fj, {"csv", "sidecar"}, "field");
    const fs::path base = fs::path(g.config).parent_path();
    auto resolve = [&](const std::string& s) {
        const fs::path q(s);
        return q.is_absolute() ? q.string() : (base / q).string();
    };
    const SampledField u = load_field(resolve(fj.at("csv").get<std::string>()),
                                      resolve(fj.at("sidecar").get<std::string>()));
    const double span =
        u.nodes[u.nodes.size() - 1] - (u.geometry == Geometry::Line1D
                                           ? u.nodes[0]
                                           : -u.nodes[u.nodes.size() - 1]);
    const QuadratureSpec q = quad_from(cfg, p, span, g.tol_scale);
    const Eigen::VectorXd out = apply_on_grid(p, q, u, resolve_threads(g));

    Artifacts art(g, "op");
    art.manifest["params"] = {{"dim", p.dim}, {"order", p.order},
                              {"mass", p.mass}};
    std::string csv = "coordinate,value\r\n";
    for (Eigen::Index i = 0; i < out.size(); ++i)
        csv += format_sig17(u.nodes[i]) + "," + format_sig17(out[i]) + "\r\n";
    art.write("op.csv", csv);
    art.finish();
}

// ----------------------------------------------------------------- solve ---

std::vector<double> coeffs_from(const ordered_json& pj) {
    std::vector<double> a;
    for (const auto& v : pj.at("f_poly")) a.push_back(v.get<double>());
    if (a.empty())
        throw std::invalid_argument("solve: f_poly must not be empty");
    return a;
}

void run_solve(const GlobalOpts& g) {
    ordered_json cfg = load_config(g, "solve");
    reject_unknown(cfg, {"command", "params", "quadrature", "problem", "tol",
                         "max_iter"},
                   "solve");
    const OperatorParams p = params_from(cfg.at("params"));
    const ordered_json& pj = cfg.at("problem");
    const std::string type = pj.at("type").get<std::string>();

    ProblemSpec problem;
    double span = 0.0;
    if (type == "ball") {
        reject_unknown(pj, {"type", "dim", "f_poly", "nodes"}, "problem");
        BallRadialProblem b;
        b.dim = pj.contains("dim") ? pj["dim"].get<int>() : p.dim;
        b.f = poly_nonlinearity(coeffs_from(pj));
        if (pj.contains("nodes")) b.nodes = pj["nodes"].get<int>();
        span = 2.0;
        problem = b;
    } else if (type == "line_profile") {
        reject_unknown(pj, {"type", "f_poly", "half_length", "nodes"},
                       "problem");
        LineProfileProblem l;
        l.f = poly_nonlinearity(coeffs_from(pj));
        if (pj.contains("half_length"))
            l.half_length = pj["half_length"].get<double>();
        if (pj.contains("nodes")) l.nodes = pj["nodes"].get<int>();
        span = 2.0 * l.half_length;
        problem = l;
    } else if (type == "whole_space") {
        reject_unknown(pj, {"type", "dim", "omega", "p", "half_length",
                            "nodes"},
                       "problem");
        WholeSpaceProblem w;
        w.dim = pj.contains("dim") ? pj["dim"].get<int>() : p.dim;
        if (pj.contains("omega")) w.omega = pj["omega"].get<double>();
        if (pj.contains("p")) w.p = pj["p"].get<double>();
        if (pj.contains("half_length"))
            w.half_length = pj["half_length"].get<double>();
        if (pj.contains("nodes")) w.nodes = pj["nodes"].get<int>();
        span = 2.0 * w.half_length;
        problem = w;
    } else if (type == "hartree") {
        reject_unknown(pj, {"type", "omega", "half_length", "nodes"},
                       "problem");
        HartreeProblem h;
        if (pj.contains("omega")) h.omega = pj["omega"].get<double>();
        if (pj.contains("half_length"))
            h.half_length = pj["half_length"].get<double>();
        if (pj.contains("nodes")) h.nodes = pj["nodes"].get<int>();
        span = 2.0 * h.half_length;
        problem = h;
    } else {
        throw std::invalid_argument("solve: unknown problem type \"" + type +
                                    "\"");
    }

    const QuadratureSpec q = quad_from(cfg, p, span, g.tol_scale);
    SolveOptions opts;
    opts.threads = resolve_threads(g);
    if (cfg.contains("tol")) opts.tol = cfg["tol"].get<double>();
    opts.tol *= g.tol_scale;
    if (cfg.contains("max_iter")) opts.max_iter = cfg["max_iter"].get<int>();

    const SolveReport rep = solve(problem, p, q, opts);
    const auto& u = rep.field;
    const int n = int(u.values.size());

    // theorem-consistency checks for the converged solution
    DiagnosticsReport diag;
    const double qual_tol = 10.0 * opts.tol;
    if (rep.converged && type == "ball") {
        Eigen::VectorXd lambdas =
            Eigen::VectorXd::LinSpaced(41, -1.0, 1.0);
        const MovingPlaneResult mp = moving_plane_sweep(u, lambdas, qual_tol);
        const double cell = lambdas[1] - lambdas[0];
        diag.add({"radial_symmetry",
                  mp.found_center && std::abs(mp.lambda0) <= cell + 1e-12
                      ? Verdict::Pass
                      : Verdict::Fail,
                  {mp.lambda0, mp.found_center ? 1.0 : 0.0},
                  cell});
        double min_interior = 1e300;
        double where = 0.0;
        for (int i = 1; i + 1 < n; ++i)
            if (u.values[i] < min_interior) {
                min_interior = u.values[i];
                where = u.nodes[i];
            }
        diag.add({"positivity",
                  min_interior > 0.0 ? Verdict::Pass : Verdict::Fail,
                  {where, min_interior},
                  0.0});
    } else if (rep.converged && type == "line_profile") {
        Eigen::VectorXd taus = Eigen::VectorXd::LinSpaced(16, 0.25, 4.0);
        const SlidingResult sl = sliding_sweep(u, taus, qual_tol);
        double worst = -1e300;
        double where = 0.0;
        for (int k = 0; k < sl.sup_w.size(); ++k)
            if (sl.sup_w[k] > worst) {
                worst = sl.sup_w[k];
                where = sl.taus[k];
            }
        diag.add({"monotone_increasing",
                  sl.strict ? Verdict::Pass : Verdict::Fail,
                  {where, worst},
                  qual_tol});
    } else if (rep.converged &&
               (type == "whole_space" || type == "hartree")) {
        double worst = 0.0;
        double where = 0.0;
        for (int i = n / 2; i + 1 < n; ++i) {
            const double rise = u.values[i + 1] - u.values[i];
            if (rise > worst) {
                worst = rise;
                where = u.nodes[i];
            }
        }
        diag.add({"radial_decrease",
                  worst <= qual_tol ? Verdict::Pass : Verdict::Fail,
                  {where, worst},
                  qual_tol});
    }

    Artifacts art(g, "solve");
    art.manifest["params"] = {{"dim", p.dim}, {"order", p.order},
                              {"mass", p.mass}};
    art.manifest["problem"] = pj;
    art.manifest["tolerance"] = opts.tol;
    art.write("solution.csv", field_to_csv(u));
    art.write("solution.json", field_sidecar(u));

    ordered_json report;
    report["residual_sup"] = rep.residual_sup;
    report["iterations"] = rep.iterations;
    report["converged"] = rep.converged;
    report["method"] =
        rep.method == SolveMethod::Newton ? "newton" : "damped_picard";
    report["truncation_bound"] = rep.truncation_bound;
    report["diagnostics"] = report_to_json(diag);
    art.write("report.json", report.dump(2) + "\n");
    art.manifest["verdicts"] = report_to_json(diag)["checks"];
    art.finish();

    if (!rep.converged && type != "hartree")
        throw VerdictFailure("solve: did not converge (residual " +
                             format_sig17(rep.residual_sup) + ")");
    if (any_failed(diag))
        throw VerdictFailure("solve: theorem-consistency check failed");
}

// ------------------------------------------------------------------ diag ---

void run_diag(const GlobalOpts& g) {
    ordered_json cfg = load_config(g, "diag");
    reject_unknown(cfg, {"command", "params", "checks", "safety", "r"},
                   "diag");
    const OperatorParams p = params_from(cfg.at("params"));
    const double safety =
        cfg.contains("safety") ? cfg["safety"].get<double>() : 0.5;
    const KernelBounds kb = fit_kernel_bounds(p, safety);

    DiagnosticsReport rep;
    Artifacts art(g, "diag");
    art.manifest["params"] = {{"dim", p.dim}, {"order", p.order},
                              {"mass", p.mass}};
    art.manifest["safety"] = safety;

    for (const auto& cj : cfg.at("checks")) {
        const std::string name = cj.get<std::string>();
        if (name == "narrow_region") {
            const double C = narrow_region_constant(p, kb);
            const double d = kb.r0 / (4.0 * p.mass);
            const bool ok = C > 0.0 && narrow_region_admissible(p, kb, 0.0, d);
            rep.add({"narrow_region", ok ? Verdict::Pass : Verdict::Fail,
                     {d, C}, 0.0});
        } else if (name == "decay_radius") {
            const DecayRadiusResult dr =
                decay_radius(p, kb, [](double) { return 0.0; });
            rep.add({"decay_radius",
                     dr.finite ? Verdict::Pass : Verdict::Fail,
                     {dr.R0, dr.R1},
                     0.0});
        } else if (name == "average_I") {
            const double r = cfg.contains("r")
                                 ? cfg["r"].get<double>()
                                 : kb.R_inf / p.mass;
            const AverageIResult I = average_I(p, kb, r);
            rep.add({"average_I",
                     I.in_regime
                         ? (I.value > 0.0 ? Verdict::Pass : Verdict::Fail)
                         : Verdict::Inconclusive,
                     {r, I.value},
                     0.0});
            std::string csv = "r,I\r\n";
            for (int i = 0; i < 40; ++i) {
                const double ri = r * (1.0 + 0.25 * i);
                csv += format_sig17(ri) + "," +
                       format_sig17(average_I(p, kb, ri).value) + "\r\n";
            }
            art.write("average_I.csv", csv);
        } else {
            throw std::invalid_argument("diag: unknown check \"" + name +
                                        "\"");
        }
    }

    art.write("diag_report.json", rep.to_json() + "\n");
    art.manifest["verdicts"] = report_to_json(rep)["checks"];
    art.finish();
    if (any_failed(rep)) throw VerdictFailure("diag: check failed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-relativistic operator toolbox"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config, "JSON run configuration");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--tol-scale", g.tol_scale, "scale factor on tolerances")
        ->check(CLI::PositiveNumber);
    app.add_option("--threads", g.threads,
                   "worker threads (RELATIVOP_THREADS as fallback)");
    app.add_flag("--emit-plot-script", g.plot_script,
                 "write a gnuplot script next to the CSVs");

    double nu = 0.0, r = 0.0;
    CLI::App* bessel = app.add_subcommand("bessel", "modified Bessel K_nu");
    bessel->add_option("--nu", nu, "order");
    bessel->add_option("--r", r, "argument");
    CLI::App* kernel =
        app.add_subcommand("kernel", "jump kernel and fitted bounds");
    CLI::App* op = app.add_subcommand("op", "apply the operator to a field");
    CLI::App* solve = app.add_subcommand("solve", "semilinear model problems");
    CLI::App* diag = app.add_subcommand("diag", "theorem diagnostics");

    try {
        app.parse(argc, argv);
        if (bessel->parsed()) run_bessel(g, nu, r);
        if (kernel->parsed()) run_kernel(g);
        if (op->parsed()) run_op(g);
        if (solve->parsed()) run_solve(g);
        if (diag->parsed()) run_diag(g);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const VerdictFailure& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
