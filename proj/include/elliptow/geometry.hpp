#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "elliptow/error.hpp"
#include "elliptow/scaling.hpp"
#include "elliptow/vec.hpp"

namespace elliptow {

/// Ellipsoid with semi-axis aspect*radius along the unit orientation vector
/// and radius across it. A zero orientation means the ball B(center, radius)
/// regardless of aspect.
struct Ellipsoid {
    Vec center;
    double radius = 1.0;    // rho > 0
    double aspect = 1.0;    // alpha >= 0; 0 collapses the orientation axis
    Vec orientation;        // |nu| = 1, or nu = 0 for a ball

    bool is_ball() const { return orientation.norm2() == 0.0; }
    /// |det| of the affine map from the unit ball: aspect * radius^N (1 for a
    /// zero orientation, where the map is a pure dilation).
    double volume_factor() const;
};

/// Affine image of a closed-unit-ball point under the ellipsoid chart:
/// center + rho*alpha*<y,nu>nu + rho*(y - <y,nu>nu).
Vec ellipsoid_map(const Vec& y, const Ellipsoid& E);

/// The position-dependent stochastic sampling set: centered at x, radius
/// gamma*r, aspect 1 + (a-1)|x-x0|^2/r^2, oriented along (x-x0)/|x-x0|
/// (zero orientation at x = x0). Requires |x - x0| <= r.
Ellipsoid sampling_ellipsoid(const Vec& x0, const Vec& x, double r, const Params& prm);

/// Bounded open set presented through a signed-distance oracle (negative
/// inside) plus a bounding box. Built-in shapes have exact analytic distances;
/// custom oracles are validated by seeded sampling.
class Domain {
public:
    enum class Kind { Ball, Annulus, Box, BallWithCorkscrew, Custom };

    struct CorkscrewWitness {
        Vec center;
        double radius = 0.0;  // mu * scale
        double scale = 0.0;   // the r it was built for
    };

    static Domain ball(const Vec& center, double radius);
    /// {r_inner < |x - center| < r_outer}.
    static Domain annulus(const Vec& center, double r_inner, double r_outer);
    static Domain box(const BBox& b);
    /// Ball B(0, radius) minus closed balls of radius mu*r placed tangentially
    /// at boundary_point for each r in depth_scales, so that every excluded
    /// ball realizes an exterior ball B(x, mu*r) inside B(boundary_point, r).
    /// Exclusions that disconnect the ball raise ConstructionError (checked by
    /// grid flood fill).
    static Domain ball_with_corkscrew(double radius, double mu, const Vec& boundary_point,
                                      const std::vector<double>& depth_scales);
    /// User oracle; Lipschitz and box-containment are checked on 10^4 seeded
    /// sample pairs, not proved.
    static Domain custom(std::function<double(const Vec&)> signed_distance, const BBox& bounding_box,
                         std::uint64_t validation_seed = 2024);

    Kind kind() const { return kind_; }
    int dim() const { return bbox_.dim(); }
    const BBox& bounding_box() const { return bbox_; }

    double signed_distance(const Vec& x) const;
    /// Membership, consistent with signed_distance(x) < 0 but cheaper for the
    /// built-in shapes (no square roots).
    bool contains(const Vec& x) const;
    /// Radius of the largest ball around the deepest interior point; used to
    /// sanity-check sampling footprints in run configs.
    double inradius() const;

    const std::vector<CorkscrewWitness>& corkscrew_witnesses() const { return witnesses_; }
    /// Witness whose scale is within a factor of 2 of the requested one, if any.
    std::optional<CorkscrewWitness> witness_near_scale(double scale) const;
    const Vec& corkscrew_anchor() const { return anchor_; }
    double corkscrew_mu() const { return mu_; }

private:
    Domain() = default;

    Kind kind_ = Kind::Ball;
    BBox bbox_;
    // ball / annulus / corkscrew
    Vec center_;
    double r_inner_ = 0.0;
    double r_outer_ = 0.0;
    // corkscrew
    double mu_ = 0.0;
    Vec anchor_;
    std::vector<CorkscrewWitness> witnesses_;
    // custom
    std::function<double(const Vec&)> oracle_;
};

/// d_eps(x) = min{eps, dist(x, complement of D)} / eps, in [0, 1]: zero
/// outside D, one at depth >= eps.
double scaled_distance(const Domain& dom, const Vec& x, double eps);

}  // namespace elliptow
