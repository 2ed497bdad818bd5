#include "elliptow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>

namespace elliptow {

double Ellipsoid::volume_factor() const {
    if (is_ball()) return std::pow(radius, center.dim());
    return aspect * std::pow(radius, center.dim());
}

Vec ellipsoid_map(const Vec& y, const Ellipsoid& E) {
    // One formula covers the ball case: <y,0>*0 = 0.
    double yn = dot(y, E.orientation);
    Vec out = E.center;
    for (int i = 0; i < y.dim(); ++i)
        out[i] += E.radius * (y[i] + (E.aspect - 1.0) * yn * E.orientation[i]);
    return out;
}

Ellipsoid sampling_ellipsoid(const Vec& x0, const Vec& x, double r, const Params& prm) {
    if (!(r > 0.0)) throw ParamError("sampling_ellipsoid: radius r must be positive");
    Vec d = x - x0;
    double dn = d.norm();
    if (dn > r * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "sampling-radius violation: |x - x0| = " << dn << " exceeds r = " << r;
        throw ParamError(os.str());
    }
    double t2 = std::min(1.0, (dn * dn) / (r * r));
    Ellipsoid e;
    e.center = x;
    e.radius = prm.gamma * r;
    e.aspect = 1.0 + (prm.a - 1.0) * t2;  // degenerate branch (a = 0) gives 1 - t^2
    e.orientation = dn == 0.0 ? Vec(x.dim()) : (1.0 / dn) * d;
    return e;
}

namespace {

double box_signed_distance(const BBox& b, const Vec& x) {
    // Exact SDF of an axis-aligned box.
    double out2 = 0.0;
    double inside = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < b.dim(); ++i) {
        double q = std::max(b.lo[i] - x[i], x[i] - b.hi[i]);
        if (q > 0.0) out2 += q * q;
        inside = std::max(inside, q);
    }
    if (out2 > 0.0) return std::sqrt(out2);
    return inside;
}

}  // namespace

Domain Domain::ball(const Vec& center, double radius) {
    if (!(radius > 0.0)) throw ParamError("ball: radius must be positive");
    Domain d;
    d.kind_ = Kind::Ball;
    d.center_ = center;
    d.r_outer_ = radius;
    d.bbox_ = BBox{center, center}.inflated(radius);
    return d;
}

Domain Domain::annulus(const Vec& center, double r_inner, double r_outer) {
    if (!(0.0 < r_inner && r_inner < r_outer))
        throw ParamError("annulus: need 0 < r_inner < r_outer");
    Domain d;
    d.kind_ = Kind::Annulus;
    d.center_ = center;
    d.r_inner_ = r_inner;
    d.r_outer_ = r_outer;
    d.bbox_ = BBox{center, center}.inflated(r_outer);
    return d;
}

Domain Domain::box(const BBox& b) {
    for (int i = 0; i < b.dim(); ++i)
        if (!(b.lo[i] < b.hi[i])) throw ParamError("box: lo must be strictly below hi");
    Domain d;
    d.kind_ = Kind::Box;
    d.bbox_ = b;
    return d;
}

Domain Domain::ball_with_corkscrew(double radius, double mu, const Vec& boundary_point,
                                   const std::vector<double>& depth_scales) {
    if (!(mu > 0.0 && mu < 1.0)) throw ParamError("ball_with_corkscrew: mu must lie in (0,1)");
    if (!(radius > 0.0)) throw ParamError("ball_with_corkscrew: radius must be positive");
    double bn = boundary_point.norm();
    if (std::abs(bn - radius) > 1e-9 * radius)
        throw ConstructionError("ball_with_corkscrew: boundary_point is off the sphere |x| = radius");

    Domain d;
    d.kind_ = Kind::BallWithCorkscrew;
    d.center_ = Vec(boundary_point.dim());
    d.r_outer_ = radius;
    d.mu_ = mu;
    d.anchor_ = boundary_point;
    d.bbox_ = BBox{d.center_, d.center_}.inflated(radius);

    Vec inward = (-1.0 / bn) * boundary_point;
    for (double r : depth_scales) {
        if (!(r > 0.0 && r <= radius))
            throw ConstructionError("ball_with_corkscrew: depth scale must lie in (0, radius]");
        CorkscrewWitness w;
        w.scale = r;
        w.radius = mu * r;
        w.center = boundary_point + ((1.0 - mu) * r) * inward;
        d.witnesses_.push_back(w);
    }

    if (!d.witnesses_.empty()) {
        // The exclusions must leave the ball connected and keep an interior.
        if (d.contains(d.center_) == false && radius > 0)
            throw ConstructionError("ball_with_corkscrew: exclusions swallow the center");
        // Coarse flood fill over the bounding box; cells are inside-samples.
        int n = d.dim() == 2 ? 96 : 32;
        double h = 2.0 * radius / n;
        auto cell_center = [&](const std::vector<int>& idx) {
            Vec x(d.dim());
            for (int i = 0; i < d.dim(); ++i) x[i] = -radius + (idx[i] + 0.5) * h;
            return x;
        };
        std::vector<int> shape(d.dim(), n);
        long total = 1;
        for (int s : shape) total *= s;
        std::vector<char> inside(total, 0), seen(total, 0);
        long n_inside = 0, seed = -1;
        double best_depth = 0.0;
        for (long f = 0; f < total; ++f) {
            std::vector<int> idx(d.dim());
            long rem = f;
            for (int i = d.dim() - 1; i >= 0; --i) {
                idx[i] = rem % n;
                rem /= n;
            }
            Vec x = cell_center(idx);
            if (d.contains(x)) {
                inside[f] = 1;
                ++n_inside;
                double depth = -d.signed_distance(x);
                if (depth > best_depth) {
                    best_depth = depth;
                    seed = f;
                }
            }
        }
        if (seed >= 0) {
            std::queue<long> q;
            q.push(seed);
            seen[seed] = 1;
            long reached = 0;
            while (!q.empty()) {
                long f = q.front();
                q.pop();
                ++reached;
                long stride = 1;
                for (int i = d.dim() - 1; i >= 0; --i) {
                    long c = (f / stride) % n;
                    if (c > 0 && inside[f - stride] && !seen[f - stride]) {
                        seen[f - stride] = 1;
                        q.push(f - stride);
                    }
                    if (c + 1 < n && inside[f + stride] && !seen[f + stride]) {
                        seen[f + stride] = 1;
                        q.push(f + stride);
                    }
                    stride *= n;
                }
            }
            if (reached < n_inside)
                throw ConstructionError(
                    "ball_with_corkscrew: exclusions disconnect the domain (flood-fill check)");
        }
    }
    return d;
}

Domain Domain::custom(std::function<double(const Vec&)> signed_distance, const BBox& bounding_box,
                      std::uint64_t validation_seed) {
    Domain d;
    d.kind_ = Kind::Custom;
    d.bbox_ = bounding_box;
    d.oracle_ = std::move(signed_distance);

    // Randomized validation: 1-Lipschitz on pairs, and {sd < 0} inside the box.
    std::mt19937_64 eng(validation_seed);
    auto u01 = [&] { return (eng() >> 11) * 0x1.0p-53; };
    BBox probe = bounding_box.inflated(0.1 * bounding_box.max_extent());
    auto sample = [&] {
        Vec x(probe.dim());
        for (int i = 0; i < probe.dim(); ++i) x[i] = probe.lo[i] + u01() * (probe.hi[i] - probe.lo[i]);
        return x;
    };
    for (int k = 0; k < 10000; ++k) {
        Vec x = sample(), y = sample();
        double sx = d.oracle_(x), sy = d.oracle_(y);
        double gap = (x - y).norm();
        if (std::abs(sx - sy) > gap * (1.0 + 1e-9) + 1e-12)
            throw ConstructionError("custom domain: signed_distance failed the sampled 1-Lipschitz check");
        if (sx < 0.0 && !bounding_box.contains(x))
            throw ConstructionError("custom domain: interior point sampled outside the bounding box");
    }
    return d;
}

double Domain::signed_distance(const Vec& x) const {
    switch (kind_) {
        case Kind::Ball:
            return (x - center_).norm() - r_outer_;
        case Kind::Annulus: {
            double t = (x - center_).norm();
            return std::max(t - r_outer_, r_inner_ - t);
        }
        case Kind::Box:
            return box_signed_distance(bbox_, x);
        case Kind::BallWithCorkscrew: {
            double sd = (x - center_).norm() - r_outer_;
            for (const auto& w : witnesses_) sd = std::max(sd, w.radius - (x - w.center).norm());
            return sd;
        }
        case Kind::Custom:
            return oracle_(x);
    }
    return 0.0;
}

bool Domain::contains(const Vec& x) const {
    switch (kind_) {
        case Kind::Ball:
            return (x - center_).norm2() < r_outer_ * r_outer_;
        case Kind::Annulus: {
            double t2 = (x - center_).norm2();
            return t2 > r_inner_ * r_inner_ && t2 < r_outer_ * r_outer_;
        }
        case Kind::Box: {
            for (int i = 0; i < dim(); ++i)
                if (!(x[i] > bbox_.lo[i] && x[i] < bbox_.hi[i])) return false;
            return true;
        }
        case Kind::BallWithCorkscrew: {
            if ((x - center_).norm2() >= r_outer_ * r_outer_) return false;
            for (const auto& w : witnesses_)
                if ((x - w.center).norm2() <= w.radius * w.radius) return false;
            return true;
        }
        case Kind::Custom:
            return oracle_(x) < 0.0;
    }
    return false;
}

double Domain::inradius() const {
    switch (kind_) {
        case Kind::Ball:
            return r_outer_;
        case Kind::Annulus:
            return 0.5 * (r_outer_ - r_inner_);
        case Kind::Box: {
            double m = std::numeric_limits<double>::infinity();
            for (int i = 0; i < dim(); ++i) m = std::min(m, 0.5 * (bbox_.hi[i] - bbox_.lo[i]));
            return m;
        }
        case Kind::BallWithCorkscrew: {
            double depth = r_outer_;
            for (const auto& w : witnesses_)
                depth = std::min(depth, (center_ - w.center).norm() - w.radius);
            return depth;
        }
        case Kind::Custom: {
            // Depth at the box midpoint as a cheap proxy.
            Vec mid = 0.5 * (bbox_.lo + bbox_.hi);
            return std::max(0.0, -signed_distance(mid));
        }
    }
    return 0.0;
}

std::optional<Domain::CorkscrewWitness> Domain::witness_near_scale(double scale) const {
    const CorkscrewWitness* best = nullptr;
    double best_ratio = 2.0;
    for (const auto& w : witnesses_) {
        double ratio = w.scale > scale ? w.scale / scale : scale / w.scale;
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best = &w;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

double scaled_distance(const Domain& dom, const Vec& x, double eps) {
    if (!(eps > 0.0)) throw ParamError("scaled_distance: eps must be positive");
    double depth = std::max(0.0, -dom.signed_distance(x));
    return std::min(eps, depth) / eps;
}

}  // namespace elliptow
