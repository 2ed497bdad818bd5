#include "elliptow/quadrature.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "elliptow/error.hpp"

namespace elliptow {

namespace {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

void push_symmetric(QuadratureRule& q, const Vec& node, double weight) {
    q.nodes.push_back(node);
    q.weights.push_back(weight);
    q.nodes.push_back(-node);
    q.weights.push_back(weight);
}

void normalize(QuadratureRule& q) {
    double s = 0.0;
    for (double w : q.weights) s += w;
    for (double& w : q.weights) w /= s;
}

}  // namespace

QuadratureRule QuadratureRule::ball_product(int dim, int n_radial, int n_angular) {
    if (dim != 2 && dim != 3)
        throw ParamError("ball_product supports dim 2 or 3; use ball_monte_carlo otherwise");
    if (n_radial < 1 || n_angular < 2) throw ParamError("ball_product: rule too small");
    if (n_angular % 2) ++n_angular;

    std::vector<double> gx, gw;
    gauss_legendre(n_radial, gx, gw);
    // Map to [0,1] and fold in the t^{N-1} Jacobian.
    std::vector<double> rt(n_radial), rw(n_radial);
    for (int i = 0; i < n_radial; ++i) {
        rt[i] = 0.5 * (gx[i] + 1.0);
        rw[i] = 0.5 * gw[i] * std::pow(rt[i], dim - 1);
    }

    QuadratureRule q;
    q.symmetric = true;
    if (dim == 2) {
        int half = n_angular / 2;
        for (int i = 0; i < n_radial; ++i)
            for (int k = 0; k < half; ++k) {
                double th = M_PI * k / half;
                Vec node{rt[i] * std::cos(th), rt[i] * std::sin(th)};
                push_symmetric(q, node, rw[i] / n_angular);
            }
    } else {
        int n_polar = std::max(4, n_angular / 2);
        if (n_polar % 2) ++n_polar;
        std::vector<double> px, pw;
        gauss_legendre(n_polar, px, pw);
        for (int i = 0; i < n_radial; ++i)
            for (int j = n_polar / 2; j < n_polar; ++j) {  // mu > 0 half; negation covers the rest
                double mu = px[j];
                double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                for (int k = 0; k < n_angular; ++k) {
                    double ph = 2.0 * M_PI * k / n_angular;
                    Vec node{rt[i] * s * std::cos(ph), rt[i] * s * std::sin(ph), rt[i] * mu};
                    push_symmetric(q, node, rw[i] * pw[j] / (2.0 * n_angular));
                }
            }
    }
    normalize(q);
    return q;
}

QuadratureRule QuadratureRule::ball_monte_carlo(int dim, int n, std::uint64_t seed) {
    if (dim < 1 || dim > Vec::kMaxDim) throw ParamError("ball_monte_carlo: bad dimension");
    if (n < 2) throw ParamError("ball_monte_carlo: need at least 2 nodes");
    std::mt19937_64 eng(seed);
    auto u01 = [&] { return (eng() >> 11) * 0x1.0p-53; };

    QuadratureRule q;
    q.symmetric = true;
    int half = (n + 1) / 2;
    double w = 0.5 / half;
    for (int k = 0; k < half; ++k) {
        Vec y(dim);
        if (dim <= 3) {
            do {
                for (int i = 0; i < dim; ++i) y[i] = 2.0 * u01() - 1.0;
            } while (y.norm2() >= 1.0);
        } else {
            // Gaussian direction, radius ~ U^{1/dim}.
            double n2;
            do {
                for (int i = 0; i < dim; ++i) {
                    double u1 = std::max(u01(), 1e-300), u2 = u01();
                    y[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
                }
                n2 = y.norm2();
            } while (n2 == 0.0);
            double r = std::pow(u01(), 1.0 / dim);
            y *= r / std::sqrt(n2);
        }
        push_symmetric(q, y, w);
    }
    return q;
}

SearchRule SearchRule::uniform(int dim, int n_directions, std::vector<double> levels,
                               bool include_center, std::uint64_t seed) {
    if (n_directions < 2) throw ParamError("SearchRule: need at least 2 directions");
    if (n_directions % 2) ++n_directions;
    if (levels.empty()) levels = {1.0};
    bool has_one = false;
    for (double t : levels) {
        if (!(t > 0.0 && t <= 1.0)) throw ParamError("SearchRule: radial levels must lie in (0,1]");
        if (t == 1.0) has_one = true;
    }
    if (!has_one) levels.push_back(1.0);

    SearchRule s;
    s.radial_levels = std::move(levels);
    s.include_center = include_center;
    int half = n_directions / 2;
    if (dim == 2) {
        for (int k = 0; k < half; ++k) {
            double th = M_PI * k / half;
            Vec d{std::cos(th), std::sin(th)};
            s.directions.push_back(d);
            s.directions.push_back(-d);
        }
    } else if (dim == 3) {
        // Fibonacci hemisphere, symmetrized.
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < half; ++k) {
            double z = (k + 0.5) / half;  // (0, 1]: upper hemisphere
            double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            double th = ga * k;
            Vec d{rho * std::cos(th), rho * std::sin(th), z};
            s.directions.push_back(d);
            s.directions.push_back(-d);
        }
    } else {
        std::mt19937_64 eng(seed);
        auto u01 = [&] { return (eng() >> 11) * 0x1.0p-53; };
        for (int k = 0; k < half; ++k) {
            Vec d(dim);
            double n2 = 0.0;
            do {
                for (int i = 0; i < dim; ++i) {
                    double u1 = std::max(u01(), 1e-300), u2 = u01();
                    d[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
                }
                n2 = d.norm2();
            } while (n2 == 0.0);
            d *= 1.0 / std::sqrt(n2);
            s.directions.push_back(d);
            s.directions.push_back(-d);
        }
    }
    return s;
}

}  // namespace elliptow
