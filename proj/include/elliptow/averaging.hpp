#pragma once

#include <functional>
#include <string>
#include <vector>

#include "elliptow/geometry.hpp"
#include "elliptow/quadrature.hpp"
#include "elliptow/scaling.hpp"
#include "elliptow/vec.hpp"

namespace elliptow {

using PointFn = std::function<double(const Vec&)>;

/// C^2 test function with analytic derivative oracles.
struct SmoothTestFunction {
    std::string name;
    PointFn value;
    std::function<Vec(const Vec&)> gradient;
    std::function<SymMat(const Vec&)> hessian;
};

/// Normalized average of u over the ellipsoid, computed as the quadrature
/// image of the unit-ball rule under the ellipsoid chart. Exact for affine u
/// with a symmetric rule; well defined down to aspect 0, where it becomes the
/// slice average on the collapsed disk.
double avg_over_ellipsoid(const PointFn& u, const Ellipsoid& ell, const QuadratureRule& quad);

/// Average of u over the position-dependent sampling ellipsoid at x relative
/// to the expansion center x0 at scale r.
double sampled_average(const PointFn& u, const Vec& x, const Vec& x0, double r, const Params& prm,
                       const QuadratureRule& quad);

/// Result of the half-(inf+sup) relaxation over deterministic shifts.
struct MinMaxAverage {
    double value = 0.0;  // 0.5 * (lo + hi)
    double lo = 0.0;
    double hi = 0.0;
    Vec arg_lo;  // shift z (|z| <= 1) attaining lo: the sample sits at x0 + r z
    Vec arg_hi;
};

/// 0.5*(min + max) of sampled_average over the search grid of shifts
/// {t*d : d in directions, t in radial_levels} (plus the center when flagged,
/// plus any extra directions, e.g. the gradient line). Deterministic first-hit
/// tie-break; extremal shifts are reported for strategy reuse.
MinMaxAverage minmax_average(const PointFn& u, const Vec& x0, double r, const Params& prm,
                             const QuadratureRule& quad, const SearchRule& search,
                             const std::vector<Vec>& extra_directions = {});

/// <Hess f . g/|g|, g/|g|> at x; throws on vanishing gradient.
double infinity_laplacian(const SmoothTestFunction& f, const Vec& x);

/// |grad|^{-1} (Laplacian - infinity Laplacian).
double one_laplacian(const SmoothTestFunction& f, const Vec& x);

/// |grad f|^{p-2} (Laplacian f + (p-2) infinity-Laplacian f).
double p_laplacian(const SmoothTestFunction& f, const Vec& x, double p);

/// Second-order prediction for the relaxed average increment:
/// gamma^2 r^2 / (2(N+2)) * |grad f|^{2-p} * p-Laplacian. For the degenerate
/// branch gamma^2 = (N+2)/(p-1) this reduces to r^2/(2(p-1)) * same factor.
double expansion_prediction(const SmoothTestFunction& f, const Vec& x0, double r, const Params& prm);

/// minmax_average(f)(x0) - f(x0) - expansion_prediction; o(r^2) by the
/// mean-value expansion. The search grid is augmented with the exact
/// gradient directions, where the extrema concentrate.
double expansion_residual(const SmoothTestFunction& f, const Vec& x0, double r, const Params& prm,
                          const QuadratureRule& quad, const SearchRule& search);

}  // namespace elliptow
