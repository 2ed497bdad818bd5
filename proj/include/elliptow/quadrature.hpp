#pragma once

#include <cstdint>
#include <vector>

#include "elliptow/vec.hpp"

namespace elliptow {

/// Normalized quadrature rule on the closed unit ball. Symmetric rules store
/// node/weight pairs closed under y -> -y with the negation exact in floating
/// point, so odd integrands cancel to machine precision.
struct QuadratureRule {
    std::vector<Vec> nodes;
    std::vector<double> weights;  // nonnegative, sum to 1
    bool symmetric = false;

    std::size_t size() const { return nodes.size(); }

    /// Product rule: Gauss-Legendre in radius (with the t^{N-1} volume weight
    /// folded into the weights) times a symmetrized sphere grid. Exact on all
    /// quadratics for n_radial >= 2 (N=2) or 3 (N=3) and even n_angular >= 4.
    /// In 3-D, n_angular counts azimuthal nodes; the polar count is
    /// max(4, n_angular/2) rounded up to even. Supports dim 2 and 3.
    static QuadratureRule ball_product(int dim, int n_radial, int n_angular);

    /// Antithetic Monte Carlo fallback for any dimension (n rounded up to even).
    static QuadratureRule ball_monte_carlo(int dim, int n, std::uint64_t seed);
};

/// Discretization of the inf/sup search over the closed unit ball: directions
/// (closed under sign flip) times radial levels in (0, 1], optionally plus the
/// center. Level 1 is always present: extrema of near-linear integrands sit on
/// the boundary.
struct SearchRule {
    std::vector<Vec> directions;
    std::vector<double> radial_levels;
    bool include_center = true;

    std::size_t candidate_count() const {
        return directions.size() * radial_levels.size() + (include_center ? 1 : 0);
    }

    /// Evenly spaced directions in 2-D, symmetrized Fibonacci points in 3-D,
    /// antithetic Gaussian directions above. n_directions is rounded up to even.
    static SearchRule uniform(int dim, int n_directions, std::vector<double> levels = {1.0},
                              bool include_center = true, std::uint64_t seed = 7);
};

}  // namespace elliptow
