#include "relativ/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace relativ {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule.
const double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
const double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk15(const std::function<double(double)>& f, double a, double b,
          double* result, double* err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double fsum = f(c - x) + f(c + x);
        resk += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }
    *result = resk * h;
    *err = std::abs((resk - resg) * h);
}

struct Panel {
    double a, b, value, err;
};

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration from the Chebyshev estimate of the i-th root.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    auto [pos, ok] = cache.emplace(n, std::move(rule));
    return pos->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol, int max_intervals) {
    if (a == b) return 0.0;
    std::vector<Panel> heap;
    Panel p0;
    p0.a = a;
    p0.b = b;
    gk15(f, a, b, &p0.value, &p0.err);
    heap.push_back(p0);
    double total = p0.value, toterr = p0.err;

    while (toterr > abs_tol + rel_tol * std::abs(total)) {
        if ((int)heap.size() >= max_intervals)
            throw QuadratureError("adaptive quadrature: interval budget exhausted");
        // Split the panel with the largest error estimate.
        size_t worst = 0;
        for (size_t i = 1; i < heap.size(); ++i)
            if (heap[i].err > heap[worst].err) worst = i;
        Panel parent = heap[worst];
        const double mid = 0.5 * (parent.a + parent.b);
        if (mid <= parent.a || mid >= parent.b)
            throw QuadratureError("adaptive quadrature: interval too small");
        Panel left, right;
        left.a = parent.a;
        left.b = mid;
        right.a = mid;
        right.b = parent.b;
        gk15(f, left.a, left.b, &left.value, &left.err);
        gk15(f, right.a, right.b, &right.value, &right.err);
        total += left.value + right.value - parent.value;
        toterr += left.err + right.err - parent.err;
        heap[worst] = left;
        heap.push_back(right);
    }
    return total;
}

double integrate_to_inf(const std::function<double(double)>& f, double a,
                        double abs_tol, double rel_tol, int max_panels) {
    if (a <= 0.0) throw QuadratureError("integrate_to_inf requires a > 0");
    double total = 0.0;
    double lo = a;
    const double panel_tol = 0.25 * abs_tol;
    for (int k = 0; k < max_panels; ++k) {
        const double hi = 2.0 * lo;
        const double part =
            integrate(f, lo, hi, panel_tol, 0.1 * rel_tol);
        total += part;
        if (std::abs(part) < abs_tol + rel_tol * std::abs(total)) return total;
        lo = hi;
    }
    throw QuadratureError("integrate_to_inf: panel budget exhausted");
}

}  // namespace relativ
