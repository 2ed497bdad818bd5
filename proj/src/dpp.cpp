#include "elliptow/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>

#include "elliptow/error.hpp"
#include "elliptow/quadrature.hpp"

namespace elliptow {

void SolverConfig::validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("SolverConfig: eps must lie in (0,1)");
    double hh = resolved_h();
    if (!(hh > 0.0) || hh > eps / 8.0 * (1.0 + 1e-12))
        throw ConfigError("SolverConfig: lattice spacing must satisfy h <= eps/8");
    if (!(tol != 0.0)) throw ConfigError("SolverConfig: tol must be nonzero (negative = default)");
    if (max_iter < 1) throw ConfigError("SolverConfig: max_iter must be >= 1");
    if (quad_radial < 2 || quad_angular < 4) throw ConfigError("SolverConfig: quadrature rule too small");
    for (double t : search_levels)
        if (!(t > 0.0 && t <= 1.0)) throw ConfigError("SolverConfig: search levels must lie in (0,1]");
}

namespace {

constexpr std::uint16_t kNoHint = 0xffff;

/// Translation-invariant evaluation plan: for every search shift z and
/// quadrature node y, the sampled position is x + off with off independent of
/// x, so the interpolation cell offset and corner weights are shared by the
/// whole lattice. An optional radial "hint" adds, per lattice point, the two
/// table directions closest to the line through the hint center; the search
/// set stays position-fixed, so the operator remains monotone.
struct Plan {
    int dim = 2;
    double h = 0.0;
    double eps = 0.0;
    double margin = 0.0;

    struct Tap {
        long didx = 0;
        std::array<double, 8> w{};  // 2^dim corner weights
    };
    std::vector<Tap> taps;      // candidate-major, n_cands * n_quad entries
    std::vector<Vec> tap_off;   // real offsets, same order
    int n_cands = 0;
    int n_quad = 0;

    // Hint table: taps for hint_m directions x n_levels levels.
    int hint_m = 0;
    int n_hint_cands = 0;  // per point: 2 * n_levels when active
    int n_levels = 0;
    std::vector<Tap> hint_taps;
    std::vector<Vec> hint_tap_off;
    std::vector<std::uint16_t> hint_dir;  // per lattice point, kNoHint if none

    std::vector<long> safe, band, exterior;
    std::vector<double> dvals;  // d_eps at lattice points
    std::vector<double> fvals;  // F at lattice points

    // Cached band-point data: per (band point, candidate) the constant
    // contribution of taps falling outside the domain, plus a bitmask of the
    // taps that interpolate. Hint candidates follow the shared ones.
    std::vector<double> band_const;
    std::vector<std::uint64_t> band_mask;
    int cands_total = 0;
    int mask_words = 0;

    double data_min = 0.0;
    double data_max = 0.0;

    const Tap* hint_taps_for(std::uint16_t dir_index, int level) const {
        return hint_taps.data() + (static_cast<std::size_t>(dir_index) * n_levels + level) * n_quad;
    }
};

Vec search_shift_offset(const Vec& z, const Vec& y, const Params& prm, double eps) {
    Vec nu = z.normalized_or_zero();
    double t2 = std::min(1.0, z.norm2());
    double alpha = 1.0 + (prm.a - 1.0) * t2;
    double yn = dot(y, nu);
    Vec off = eps * z;
    for (int i = 0; i < y.dim(); ++i)
        off[i] += prm.gamma * eps * (y[i] + (alpha - 1.0) * yn * nu[i]);
    return off;
}

Plan::Tap make_tap(const Vec& off, double qweight, double h, int dim,
                   const std::array<long, Vec::kMaxDim>& stride) {
    Plan::Tap tap;
    double frac[Vec::kMaxDim];
    for (int i = 0; i < dim; ++i) {
        double t = off[i] / h;
        double fl = std::floor(t);
        tap.didx += static_cast<long>(fl) * stride[i];
        frac[i] = t - fl;
    }
    int corners = 1 << dim;
    for (int m = 0; m < corners; ++m) {
        double w = qweight;
        for (int i = 0; i < dim; ++i) w *= (m & (1 << i)) ? frac[i] : 1.0 - frac[i];
        tap.w[m] = w;
    }
    return tap;
}

Plan build_plan(const GridField& grid, const Domain& dom, const SolverConfig& cfg, const Params& prm) {
    Plan plan;
    plan.dim = grid.dim();
    plan.h = grid.spacing();
    plan.eps = cfg.eps;
    plan.margin = cfg.eps * prm.footprint_factor();
    if (plan.dim != 2 && plan.dim != 3)
        throw ConfigError("grid solver supports dimensions 2 and 3");
    if (cfg.search_hint != SolverConfig::Hint::None && plan.dim != 2)
        throw ConfigError("search hint is only available in dimension 2");

    QuadratureRule quad = QuadratureRule::ball_product(plan.dim, cfg.quad_radial, cfg.quad_angular);
    SearchRule search = SearchRule::uniform(plan.dim, cfg.resolved_directions(plan.dim),
                                            cfg.search_levels, cfg.search_center);

    std::vector<Vec> shifts;
    if (search.include_center) shifts.push_back(Vec(plan.dim));
    for (const Vec& d : search.directions)
        for (double t : search.radial_levels) shifts.push_back(t * d);

    plan.n_cands = static_cast<int>(shifts.size());
    plan.n_quad = static_cast<int>(quad.size());
    plan.n_levels = static_cast<int>(search.radial_levels.size());

    std::array<long, Vec::kMaxDim> stride{};
    stride[0] = 1;
    for (int i = 1; i < plan.dim; ++i) stride[i] = stride[i - 1] * grid.shape(i - 1);

    plan.taps.reserve(static_cast<std::size_t>(plan.n_cands) * plan.n_quad);
    for (const Vec& z : shifts)
        for (std::size_t q = 0; q < quad.size(); ++q) {
            Vec off = search_shift_offset(z, quad.nodes[q], prm, cfg.eps);
            plan.taps.push_back(make_tap(off, quad.weights[q], plan.h, plan.dim, stride));
            plan.tap_off.push_back(off);
        }

    const long total = grid.size();
    const DataFunction& F = grid.boundary();

    if (cfg.search_hint == SolverConfig::Hint::Radial) {
        plan.hint_m = 256;
        plan.n_hint_cands = 2 * plan.n_levels;
        plan.hint_taps.reserve(static_cast<std::size_t>(plan.hint_m) * plan.n_levels * plan.n_quad);
        for (int k = 0; k < plan.hint_m; ++k) {
            double th = 2.0 * M_PI * k / plan.hint_m;
            Vec d{std::cos(th), std::sin(th)};
            for (double t : search.radial_levels)
                for (std::size_t q = 0; q < quad.size(); ++q) {
                    Vec off = search_shift_offset(t * d, quad.nodes[q], prm, cfg.eps);
                    plan.hint_taps.push_back(make_tap(off, quad.weights[q], plan.h, plan.dim, stride));
                    plan.hint_tap_off.push_back(off);
                }
        }
        Vec center = cfg.hint_center.empty() ? Vec(plan.dim) : Vec::from(cfg.hint_center);
        plan.hint_dir.assign(total, kNoHint);
        for (long p = 0; p < total; ++p) {
            Vec d = grid.point(p) - center;
            if (d.norm2() == 0.0) continue;
            double th = std::atan2(d[1], d[0]);
            long k = std::lround(th / (2.0 * M_PI) * plan.hint_m);
            plan.hint_dir[p] = static_cast<std::uint16_t>(((k % plan.hint_m) + plan.hint_m) % plan.hint_m);
        }
    }
    plan.cands_total = plan.n_cands + plan.n_hint_cands;

    plan.dvals.assign(total, 0.0);
    plan.fvals.assign(total, 0.0);

    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -dmin;
#pragma omp parallel for schedule(static) reduction(min : dmin) reduction(max : dmax)
    for (long p = 0; p < total; ++p) {
        Vec x = grid.point(p);
        double fv = F.value(x);
        plan.fvals[p] = fv;
        dmin = std::min(dmin, fv);
        dmax = std::max(dmax, fv);
        if (dom.contains(x)) {
            double depth = std::max(0.0, -dom.signed_distance(x));
            plan.dvals[p] = std::min(cfg.eps, depth) / cfg.eps;
        }
    }

    const double safe_slack = 1e-12 * (1.0 + plan.margin);
    for (long p = 0; p < total; ++p) {
        Vec x = grid.point(p);
        if (!dom.contains(x)) {
            plan.exterior.push_back(p);
        } else if (-dom.signed_distance(x) > plan.margin + safe_slack) {
            plan.safe.push_back(p);
        } else {
            plan.band.push_back(p);
        }
    }

    // Band cache: constant (outside-domain) contributions and interpolation
    // masks, shared candidates first, then this point's hint candidates.
    const int n_taps_total = plan.cands_total * plan.n_quad;
    plan.mask_words = (n_taps_total + 63) / 64;
    plan.band_const.assign(plan.band.size() * static_cast<std::size_t>(plan.cands_total), 0.0);
    plan.band_mask.assign(plan.band.size() * static_cast<std::size_t>(plan.mask_words), 0);
#pragma omp parallel for schedule(static) reduction(min : dmin) reduction(max : dmax)
    for (long b = 0; b < static_cast<long>(plan.band.size()); ++b) {
        const long p = plan.band[b];
        Vec x = grid.point(p);
        double* cst = &plan.band_const[b * static_cast<std::size_t>(plan.cands_total)];
        std::uint64_t* mask = &plan.band_mask[b * static_cast<std::size_t>(plan.mask_words)];
        for (int c = 0; c < plan.cands_total; ++c) {
            for (int q = 0; q < plan.n_quad; ++q) {
                const int t = c * plan.n_quad + q;
                const Plan::Tap* tap;
                const Vec* off;
                if (c < plan.n_cands) {
                    tap = &plan.taps[t];
                    off = &plan.tap_off[t];
                } else {
                    int hc = c - plan.n_cands;  // [0, 2*n_levels)
                    std::uint16_t k = plan.hint_dir[p];
                    if (k == kNoHint) {  // no hint line at this point: reuse candidate 0
                        tap = &plan.taps[q];
                        off = &plan.tap_off[q];
                    } else {
                        std::uint16_t kk = hc < plan.n_levels
                                               ? k
                                               : static_cast<std::uint16_t>((k + plan.hint_m / 2) % plan.hint_m);
                        int level = hc % plan.n_levels;
                        std::size_t base =
                            (static_cast<std::size_t>(kk) * plan.n_levels + level) * plan.n_quad;
                        tap = &plan.hint_taps[base + q];
                        off = &plan.hint_tap_off[base + q];
                    }
                }
                Vec w = x + *off;
                if (dom.contains(w)) {
                    mask[t >> 6] |= std::uint64_t(1) << (t & 63);
                } else {
                    double fv = F.value(w);
                    double qw = 0.0;
                    for (int m = 0; m < (1 << plan.dim); ++m) qw += tap->w[m];
                    cst[c] += qw * fv;
                    dmin = std::min(dmin, fv);
                    dmax = std::max(dmax, fv);
                }
            }
        }
    }
    plan.data_min = dmin;
    plan.data_max = dmax;
    return plan;
}

struct SweepResult {
    double sup_update = 0.0;
    double min_increment = 0.0;
};

template <int DIM>
SweepResult sweep(const Plan& plan, const GridField& grid, const std::vector<double>& oldv,
                  std::vector<double>& newv) {
    const int corners = 1 << DIM;
    long sx[8];
    {
        std::array<long, Vec::kMaxDim> stride{};
        stride[0] = 1;
        for (int i = 1; i < DIM; ++i) stride[i] = stride[i - 1] * grid.shape(i - 1);
        for (int m = 0; m < corners; ++m) {
            long off = 0;
            for (int i = 0; i < DIM; ++i)
                if (m & (1 << i)) off += stride[i];
            sx[m] = off;
        }
    }
    const Plan::Tap* taps = plan.taps.data();
    const double* ov = oldv.data();
    const int n_cands = plan.n_cands;
    const int n_quad = plan.n_quad;
    const bool hint = plan.n_hint_cands > 0;

    auto tap_sum = [&](const Plan::Tap* tc, long p) {
        double acc = 0.0;
        for (int q = 0; q < n_quad; ++q) {
            const Plan::Tap& t = tc[q];
            const double* base = ov + p + t.didx;
            double a = 0.0;
            for (int m = 0; m < corners; ++m) a += t.w[m] * base[sx[m]];
            acc += a;
        }
        return acc;
    };

    double sup_update = 0.0;
    double min_inc = std::numeric_limits<double>::infinity();

#pragma omp parallel reduction(max : sup_update) reduction(min : min_inc)
    {
#pragma omp for schedule(static) nowait
        for (long s = 0; s < static_cast<long>(plan.safe.size()); ++s) {
            const long p = plan.safe[s];
            double lo = 0.0, hi = 0.0;
            for (int c = 0; c < n_cands; ++c) {
                double acc = tap_sum(taps + static_cast<std::size_t>(c) * n_quad, p);
                if (c == 0) {
                    lo = hi = acc;
                } else {
                    lo = std::min(lo, acc);
                    hi = std::max(hi, acc);
                }
            }
            if (hint) {
                std::uint16_t k = plan.hint_dir[p];
                if (k != kNoHint) {
                    std::uint16_t k2 = static_cast<std::uint16_t>((k + plan.hint_m / 2) % plan.hint_m);
                    for (std::uint16_t kk : {k, k2})
                        for (int level = 0; level < plan.n_levels; ++level) {
                            double acc = tap_sum(plan.hint_taps_for(kk, level), p);
                            lo = std::min(lo, acc);
                            hi = std::max(hi, acc);
                        }
                }
            }
            double nv = 0.5 * (lo + hi);  // d_eps = 1 on safe points
            double old = ov[p];
            newv[p] = nv;
            sup_update = std::max(sup_update, std::abs(nv - old));
            min_inc = std::min(min_inc, nv - old);
        }

#pragma omp for schedule(static)
        for (long b = 0; b < static_cast<long>(plan.band.size()); ++b) {
            const long p = plan.band[b];
            const double* cst = &plan.band_const[b * static_cast<std::size_t>(plan.cands_total)];
            const std::uint64_t* mask = &plan.band_mask[b * static_cast<std::size_t>(plan.mask_words)];
            double lo = 0.0, hi = 0.0;
            std::uint16_t k = plan.hint_dir[p];
            std::uint16_t k2 = hint && k != kNoHint
                                   ? static_cast<std::uint16_t>((k + plan.hint_m / 2) % plan.hint_m)
                                   : kNoHint;
            for (int c = 0; c < plan.cands_total; ++c) {
                const Plan::Tap* tc;
                if (c < n_cands) {
                    tc = taps + static_cast<std::size_t>(c) * n_quad;
                } else if (k == kNoHint) {
                    tc = taps;  // cache was built the same way; duplicate of candidate 0
                } else {
                    int hc = c - n_cands;
                    tc = plan.hint_taps_for(hc < plan.n_levels ? k : k2, hc % plan.n_levels);
                }
                double acc = cst[c];
                for (int q = 0; q < n_quad; ++q) {
                    const int tix = c * n_quad + q;
                    if (!(mask[tix >> 6] & (std::uint64_t(1) << (tix & 63)))) continue;
                    const Plan::Tap& t = tc[q];
                    const double* base = ov + p + t.didx;
                    double a = 0.0;
                    for (int m = 0; m < corners; ++m) a += t.w[m] * base[sx[m]];
                    acc += a;
                }
                if (c == 0) {
                    lo = hi = acc;
                } else {
                    lo = std::min(lo, acc);
                    hi = std::max(hi, acc);
                }
            }
            double d = plan.dvals[p];
            double nv = d * 0.5 * (lo + hi) + (1.0 - d) * plan.fvals[p];
            double old = ov[p];
            newv[p] = nv;
            sup_update = std::max(sup_update, std::abs(nv - old));
            min_inc = std::min(min_inc, nv - old);
        }
    }
    SweepResult st;
    st.sup_update = sup_update;
    st.min_increment = plan.safe.empty() && plan.band.empty() ? 0.0 : min_inc;
    return st;
}

SweepResult run_sweep(const Plan& plan, const GridField& grid, const std::vector<double>& oldv,
                      std::vector<double>& newv) {
    if (plan.dim == 2) return sweep<2>(plan, grid, oldv, newv);
    return sweep<3>(plan, grid, oldv, newv);
}

GridField make_grid(const DataFnPtr& data, const Domain& dom, const SolverConfig& cfg,
                    const Params& prm) {
    cfg.validate();
    if (prm.n != dom.dim()) throw ConfigError("solver: Params dimension does not match the domain");
    double margin = cfg.eps * prm.footprint_factor();
    return GridField(dom.bounding_box().inflated(margin), cfg.resolved_h(), data);
}

}  // namespace

GridField make_solver_grid(const DataFnPtr& data, const Domain& dom, const SolverConfig& cfg,
                           const Params& prm) {
    return make_grid(data, dom, cfg, prm);
}

GridField apply_T(const GridField& field, const Domain& dom, const SolverConfig& cfg,
                  const Params& prm) {
    GridField out = make_grid(field.boundary_ptr(), dom, cfg, prm);
    if (out.size() != field.size() || out.spacing() != field.spacing() ||
        (out.box().lo - field.box().lo).norm() > 1e-12)
        throw ConfigError("apply_T: field lattice does not match the solver configuration");
    Plan plan = build_plan(field, dom, cfg, prm);
    for (long p : plan.exterior) out.value(p) = plan.fvals[p];
    run_sweep(plan, field, field.values(), out.values());
    out.eps = cfg.eps;
    out.params = prm;
    return out;
}

std::pair<GridField, SolveInfo> solve_dpp(const DataFnPtr& data, const Domain& dom,
                                          const SolverConfig& cfg, const Params& prm) {
    GridField grid = make_grid(data, dom, cfg, prm);
    Plan plan = build_plan(grid, dom, cfg, prm);

    SolveInfo info;
    info.data_min = plan.data_min;
    info.data_max = plan.data_max;
    double osc = plan.data_max - plan.data_min;
    info.tol_used = cfg.tol > 0.0 ? cfg.tol : 1e-9 * (osc > 0.0 ? osc : 1.0);
    const double mono_slack =
        1e-12 * std::max(1.0, std::max(std::abs(plan.data_min), std::abs(plan.data_max)));

    std::vector<double> oldv(grid.size()), newv(grid.size());
    if (cfg.init == SolverConfig::Init::MinData) {
        std::fill(oldv.begin(), oldv.end(), plan.data_min);
        info.monotone = true;
    } else {
        oldv = plan.fvals;
    }
    for (long p : plan.exterior) newv[p] = plan.fvals[p];
    if (cfg.init == SolverConfig::Init::Data)
        for (long p : plan.exterior) oldv[p] = plan.fvals[p];

    std::deque<double> updates;
    double qhat = 0.0;
    for (long it = 1; it <= cfg.max_iter; ++it) {
        SweepResult st = run_sweep(plan, grid, oldv, newv);
        if (it == 1)
            for (long p : plan.exterior) {
                double nv = plan.fvals[p];
                st.sup_update = std::max(st.sup_update, std::abs(nv - oldv[p]));
                st.min_increment = std::min(st.min_increment, nv - oldv[p]);
                oldv[p] = nv;
            }
        info.iterations = it;
        info.final_update = st.sup_update;
        if (info.monotone && st.min_increment < -mono_slack)
            throw Error("solve_dpp: nondecreasing-iterates check failed (update " +
                        std::to_string(st.min_increment) + ")");
        std::swap(oldv, newv);

        updates.push_back(st.sup_update);
        if (updates.size() > 4) updates.pop_front();
        double scale = std::max({1.0, std::abs(plan.data_min), std::abs(plan.data_max)});
        if (st.sup_update <= 5e-15 * scale) {  // exact fixed point up to rounding
            info.converged = true;
            info.est_tail = st.sup_update;
            break;
        }
        if (updates.size() >= 2) {
            qhat = 0.0;
            for (std::size_t i = 1; i < updates.size(); ++i)
                if (updates[i - 1] > 0.0) qhat = std::max(qhat, updates[i] / updates[i - 1]);
            qhat = std::min(qhat, 0.999999);
            info.contraction = qhat;
            info.est_tail = st.sup_update * qhat / (1.0 - qhat);
            if (st.sup_update < info.tol_used && info.est_tail < info.tol_used) {
                info.converged = true;
                break;
            }
        }
    }
    grid.values() = oldv;
    grid.eps = cfg.eps;
    grid.params = prm;
    return {std::move(grid), info};
}

double sup_distance(const GridField& a, const GridField& b) {
    if (a.size() != b.size()) throw ConfigError("sup_distance: fields on different lattices");
    double m = 0.0;
    for (long p = 0; p < a.size(); ++p) m = std::max(m, std::abs(a.value(p) - b.value(p)));
    return m;
}

}  // namespace elliptow
