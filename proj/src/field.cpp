#include "relativ/field.hpp"

#include <algorithm>
#include <cmath>

namespace relativ {

namespace {

bool is_radial(Geometry g) { return g != Geometry::Line1D; }

}  // namespace

SampledField make_field(Geometry geometry, int dim, Eigen::VectorXd nodes,
                        Eigen::VectorXd values, ExtensionRule extension,
                        double limit_tol) {
    const Eigen::Index n = nodes.size();
    if (n < 8) throw std::invalid_argument("make_field: fewer than 8 nodes");
    if (values.size() != n)
        throw std::invalid_argument("make_field: nodes/values size mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("make_field: non-finite value");
        if (i > 0 && !(nodes[i] > nodes[i - 1]))
            throw std::invalid_argument("make_field: nodes not strictly increasing");
    }
    if (geometry == Geometry::Line1D) {
        if (dim != 1) throw std::invalid_argument("make_field: Line1D requires dim 1");
    } else {
        if (geometry == Geometry::Radial3D) dim = 3;
        if (dim < 1 || dim > 3)
            throw std::invalid_argument("make_field: dim must lie in {1,2,3}");
        if (nodes[0] != 0.0)
            throw std::invalid_argument("make_field: radial grid must start at 0");
    }
    if (const auto* cl = std::get_if<ConstantLimits>(&extension)) {
        const bool left_ok = is_radial(geometry) ||
                             std::abs(values[0] - cl->left) <= limit_tol;
        if (!left_ok || std::abs(values[n - 1] - cl->right) > limit_tol)
            throw std::invalid_argument(
                "make_field: boundary values too far from the declared limits");
    }
    if (const auto* pt = std::get_if<PeriodicTile>(&extension)) {
        if (!(pt->period > 0.0))
            throw std::invalid_argument("make_field: period must be > 0");
        if (nodes[n - 1] - nodes[0] >= pt->period)
            throw std::invalid_argument("make_field: grid spans more than one period");
    }
    SampledField f;
    f.geometry = geometry;
    f.dim = dim;
    f.nodes = std::move(nodes);
    f.values = std::move(values);
    f.extension = std::move(extension);
    return f;
}

FieldEvaluator::FieldEvaluator(const SampledField& field, int interp_order)
    : field_(&field), order_(interp_order) {
    if (interp_order != 1 && interp_order != 3)
        throw std::invalid_argument("FieldEvaluator: interp_order must be 1 or 3");
}

InterpStencil FieldEvaluator::stencil(double x) const {
    const SampledField& f = *field_;
    const Eigen::Index n = f.nodes.size();
    InterpStencil st;

    if (is_radial(f.geometry)) x = std::abs(x);

    const double lo = f.nodes[0];
    const double hi = f.nodes[n - 1];

    // Periodic tiling wraps the coordinate; the stencil may then wrap the
    // index too, with node coordinates shifted by a period.
    double shift[4] = {0.0, 0.0, 0.0, 0.0};
    bool periodic = false;
    double period = 0.0;
    if (const auto* pt = std::get_if<PeriodicTile>(&f.extension)) {
        periodic = true;
        period = pt->period;
        x = lo + std::fmod(x - lo, period);
        if (x < lo) x += period;
    } else if (x < lo || x > hi) {
        // Pure extension value: affine only.
        if (std::get_if<ZeroOutside>(&f.extension)) {
            st.affine = 0.0;
        } else if (const auto* cl = std::get_if<ConstantLimits>(&f.extension)) {
            st.affine = (x < lo) ? cl->left : cl->right;
        } else if (const auto* dp = std::get_if<DecayPower>(&f.extension)) {
            st.affine = dp->amplitude * std::pow(std::abs(x), -dp->exponent);
        }
        return st;
    }

    // Locate the cell [nodes[i], nodes[i+1]] containing x.
    const double* begin = f.nodes.data();
    Eigen::Index i = std::upper_bound(begin, begin + n, x) - begin - 1;
    i = std::clamp<Eigen::Index>(i, 0, n - 2);

    if (order_ == 1) {
        st.count = 2;
        st.idx[0] = int(i);
        st.idx[1] = int(i + 1);
        const double h = f.nodes[i + 1] - f.nodes[i];
        st.w[1] = (x - f.nodes[i]) / h;
        st.w[0] = 1.0 - st.w[1];
        return st;
    }

    st.count = 4;
    double xs[4];
    if (periodic) {
        for (int k = 0; k < 4; ++k) {
            Eigen::Index j = i - 1 + k;
            if (j < 0) {
                j += n;
                shift[k] = -period;
            } else if (j >= n) {
                j -= n;
                shift[k] = period;
            }
            st.idx[k] = int(j);
            xs[k] = f.nodes[st.idx[k]] + shift[k];
        }
    } else {
        const Eigen::Index js = std::clamp<Eigen::Index>(i - 1, 0, n - 4);
        for (int k = 0; k < 4; ++k) {
            st.idx[k] = int(js + k);
            xs[k] = f.nodes[st.idx[k]];
        }
    }
    for (int k = 0; k < 4; ++k) {
        double w = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != k) w *= (x - xs[j]) / (xs[k] - xs[j]);
        st.w[k] = w;
    }
    return st;
}

double FieldEvaluator::operator()(double x) const {
    const InterpStencil st = stencil(x);
    double v = st.affine;
    for (int k = 0; k < st.count; ++k) v += st.w[k] * field_->values[st.idx[k]];
    return v;
}

MeanFunctional FieldEvaluator::exterior_mean() const {
    const SampledField& f = *field_;
    MeanFunctional m;
    m.weights = Eigen::VectorXd::Zero(f.nodes.size());
    if (const auto* cl = std::get_if<ConstantLimits>(&f.extension)) {
        // A far sphere sees only the right limit in radial geometry; on the
        // line it averages the two half-lines.
        m.affine = is_radial(f.geometry) ? cl->right
                                         : 0.5 * (cl->left + cl->right);
    } else if (const auto* pt = std::get_if<PeriodicTile>(&f.extension)) {
        // Period average by the wrapped trapezoid rule.
        const Eigen::Index n = f.nodes.size();
        const double P = pt->period;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double next =
                (i + 1 < n) ? f.nodes[i + 1] : f.nodes[0] + P;
            const double prev =
                (i > 0) ? f.nodes[i - 1] : f.nodes[n - 1] - P;
            m.weights[i] = 0.5 * (next - prev) / P;
        }
    }
    // ZeroOutside and DecayPower both vanish at infinity.
    return m;
}

}  // namespace relativ
