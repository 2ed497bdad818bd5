#include "elliptow/averaging.hpp"

#include <cmath>

#include "elliptow/error.hpp"

namespace elliptow {

double avg_over_ellipsoid(const PointFn& u, const Ellipsoid& ell, const QuadratureRule& quad) {
    if (quad.size() == 0) throw ParamError("avg_over_ellipsoid: empty quadrature rule");
    double acc = 0.0;
    for (std::size_t i = 0; i < quad.size(); ++i)
        acc += quad.weights[i] * u(ellipsoid_map(quad.nodes[i], ell));
    return acc;
}

double sampled_average(const PointFn& u, const Vec& x, const Vec& x0, double r, const Params& prm,
                       const QuadratureRule& quad) {
    return avg_over_ellipsoid(u, sampling_ellipsoid(x0, x, r, prm), quad);
}

MinMaxAverage minmax_average(const PointFn& u, const Vec& x0, double r, const Params& prm,
                             const QuadratureRule& quad, const SearchRule& search,
                             const std::vector<Vec>& extra_directions) {
    if (!(r > 0.0)) throw ParamError("minmax_average: r must be positive");
    MinMaxAverage out;
    bool first = true;
    auto consider = [&](const Vec& z) {
        double v = sampled_average(u, x0 + r * z, x0, r, prm, quad);
        if (first || v < out.lo) {
            out.lo = v;
            out.arg_lo = z;
        }
        if (first || v > out.hi) {
            out.hi = v;
            out.arg_hi = z;
        }
        first = false;
    };
    if (search.include_center) consider(Vec(x0.dim()));
    for (const Vec& d : search.directions)
        for (double t : search.radial_levels) consider(t * d);
    for (const Vec& d : extra_directions) {
        Vec dn = d.normalized_or_zero();
        if (dn.norm2() == 0.0) continue;
        for (double t : search.radial_levels) consider(t * dn);
    }
    if (first) throw ParamError("minmax_average: empty search rule");
    out.value = 0.5 * (out.lo + out.hi);
    return out;
}

namespace {
Vec unit_gradient(const SmoothTestFunction& f, const Vec& x) {
    Vec g = f.gradient(x);
    double n = g.norm();
    if (n == 0.0) throw ParamError("singular gradient: grad f(x) = 0");
    return (1.0 / n) * g;
}
}  // namespace

double infinity_laplacian(const SmoothTestFunction& f, const Vec& x) {
    return f.hessian(x).quad(unit_gradient(f, x));
}

double one_laplacian(const SmoothTestFunction& f, const Vec& x) {
    Vec g = f.gradient(x);
    double n = g.norm();
    if (n == 0.0) throw ParamError("singular gradient: grad f(x) = 0");
    SymMat h = f.hessian(x);
    return (h.trace() - h.quad((1.0 / n) * g)) / n;
}

double p_laplacian(const SmoothTestFunction& f, const Vec& x, double p) {
    Vec g = f.gradient(x);
    double n = g.norm();
    if (n == 0.0) throw ParamError("singular gradient: grad f(x) = 0");
    SymMat h = f.hessian(x);
    double dinf = h.quad((1.0 / n) * g);
    return std::pow(n, p - 2.0) * (h.trace() + (p - 2.0) * dinf);
}

double expansion_prediction(const SmoothTestFunction& f, const Vec& x0, double r, const Params& prm) {
    double gn = f.gradient(x0).norm();
    if (gn == 0.0) throw ParamError("singular gradient: grad f(x0) = 0");
    double dp = p_laplacian(f, x0, prm.p);
    return prm.gamma * prm.gamma * r * r / (2.0 * (prm.n + 2)) * std::pow(gn, 2.0 - prm.p) * dp;
}

double expansion_residual(const SmoothTestFunction& f, const Vec& x0, double r, const Params& prm,
                          const QuadratureRule& quad, const SearchRule& search) {
    Vec g = f.gradient(x0);
    if (g.norm() == 0.0) throw ParamError("singular gradient: grad f(x0) = 0");
    std::vector<Vec> extra = {g, -g};
    MinMaxAverage s = minmax_average(f.value, x0, r, prm, quad, search, extra);
    return s.value - f.value(x0) - expansion_prediction(f, x0, r, prm);
}

}  // namespace elliptow
