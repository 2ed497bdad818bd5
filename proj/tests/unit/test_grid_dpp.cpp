#include <doctest.h>

#include <cmath>
#include <random>

#include "elliptow/dpp.hpp"
#include "elliptow/registry.hpp"

using namespace elliptow;

namespace {

SolverConfig small_cfg(double eps = 0.3) {
    SolverConfig cfg;
    cfg.eps = eps;
    cfg.h = eps / 8.0;
    cfg.quad_radial = 2;
    cfg.quad_angular = 6;
    cfg.search_directions = 12;
    cfg.search_levels = {1.0};
    return cfg;
}

}  // namespace

TEST_CASE("grid field evaluation") {
    Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
    DataFnPtr F = make_data_fn("lin", [](const Vec& x) { return 2.0 * x[0] - x[1] + 0.5; });
    GridField g(dom.bounding_box().inflated(0.5), 0.25, F);
    // Store affine data; interpolation must reproduce it everywhere inside.
    for (long p = 0; p < g.size(); ++p) g.value(p) = F->value(g.point(p));

    SUBCASE("outside the domain: exact data values") {
        Vec x{1.3, 0.2};
        CHECK(g.eval(dom, x) == F->value(x));
    }
    SUBCASE("lattice point inside: stored value") {
        long p = g.flat_index(Vec{0.0, 0.0});
        CHECK(g.eval(dom, g.point(p)) == g.value(p));
    }
    SUBCASE("multilinear exactness on affine data, cell midpoints included") {
        std::mt19937_64 eng(2);
        auto u01 = [&] { return (eng() >> 11) * 0x1.0p-53; };
        for (int k = 0; k < 200; ++k) {
            Vec x{1.6 * u01() - 0.8, 1.6 * u01() - 0.8};
            CHECK(g.interpolate(x) == doctest::Approx(F->value(x)).epsilon(1e-13));
        }
        Vec mid{0.125, 0.125};  // cell midpoint
        CHECK(g.interpolate(mid) == doctest::Approx(F->value(mid)).epsilon(1e-13));
    }
    SUBCASE("outside the box: error") {
        CHECK_THROWS_AS(g.eval(dom, Vec{5.0, 0.0}), Error);
    }
}

TEST_CASE("solver config invariants") {
    SolverConfig cfg = small_cfg();
    cfg.h = cfg.eps / 4.0;  // too coarse
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.h = cfg.eps / 8.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.eps = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("apply_T: constant fixed point, monotonicity, data bounds") {
    Params prm = make_params_default(2, 3.0, Branch::AspectBelowOne);
    Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
    SolverConfig cfg = small_cfg();

    SUBCASE("constant data is an exact fixed point") {
        DataFnPtr F = make_data_fn("const", [](const Vec&) { return 4.25; });
        GridField w = make_solver_grid(F, dom, cfg, prm);
        for (long p = 0; p < w.size(); ++p) w.value(p) = 4.25;
        GridField tw = apply_T(w, dom, cfg, prm);
        for (long p = 0; p < tw.size(); ++p) CHECK(tw.value(p) == doctest::Approx(4.25).epsilon(1e-14));
    }

    SUBCASE("pointwise order is preserved and averages respect data bounds") {
        DataFnPtr F = make_data_fn("bump", [](const Vec& x) { return std::cos(2.0 * x[0]) + 0.3 * x[1]; });
        GridField w = make_solver_grid(F, dom, cfg, prm);
        GridField w2 = make_solver_grid(F, dom, cfg, prm);
        std::mt19937_64 eng(13);
        auto u01 = [&] { return (eng() >> 11) * 0x1.0p-53; };
        double fmin = 1e300, fmax = -1e300;
        for (long p = 0; p < w.size(); ++p) {
            double f = F->value(w.point(p));
            fmin = std::min(fmin, f);
            fmax = std::max(fmax, f);
        }
        for (long p = 0; p < w.size(); ++p) {
            w.value(p) = fmin + (fmax - fmin) * u01();
            w2.value(p) = w.value(p) + 0.5 * u01();  // w2 >= w
        }
        GridField tw = apply_T(w, dom, cfg, prm);
        GridField tw2 = apply_T(w2, dom, cfg, prm);
        for (long p = 0; p < tw.size(); ++p) CHECK(tw.value(p) <= tw2.value(p) + 1e-12);

        // One application from the constant inf F field stays below sup F.
        GridField lo = make_solver_grid(F, dom, cfg, prm);
        for (long p = 0; p < lo.size(); ++p) lo.value(p) = fmin;
        GridField tlo = apply_T(lo, dom, cfg, prm);
        for (long p = 0; p < tlo.size(); ++p) {
            CHECK(tlo.value(p) <= fmax + 1e-12);
            CHECK(tlo.value(p) >= fmin - 1e-12);
        }
    }
}

TEST_CASE("solve_dpp: constants, data monotonicity, residual, init independence") {
    Params prm = make_params_default(2, 3.0, Branch::AspectBelowOne);
    Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
    SolverConfig cfg = small_cfg();

    SUBCASE("constant data solves immediately") {
        DataFnPtr F = make_data_fn("const", [](const Vec&) { return 5.0; });
        auto [u, info] = solve_dpp(F, dom, cfg, prm);
        CHECK(info.converged);
        CHECK(info.iterations <= 2);
        for (long p = 0; p < u.size(); ++p) CHECK(std::abs(u.value(p) - 5.0) <= 1e-12);
    }

    DataFnPtr F = make_data_fn("data", [](const Vec& x) { return std::cos(2.0 * x[0]) + 0.3 * x[1]; });
    DataFnPtr Fbar = make_data_fn("data+", [](const Vec& x) {
        return std::cos(2.0 * x[0]) + 0.3 * x[1] + 0.25 * (1.0 + std::sin(x[0] + x[1]));
    });

    SUBCASE("monotone in the data and bounded by it") {
        cfg.tol = 1e-10;
        auto [u, info] = solve_dpp(F, dom, cfg, prm);
        auto [ubar, info2] = solve_dpp(Fbar, dom, cfg, prm);
        REQUIRE(info.converged);
        REQUIRE(info2.converged);
        double fsup = std::max(std::abs(info.data_min), std::abs(info.data_max));
        for (long p = 0; p < u.size(); ++p) {
            CHECK(u.value(p) <= ubar.value(p) + 1e-9);
            CHECK(std::abs(u.value(p)) <= fsup + 1e-9);
        }

        // Residual: one more application moves the field by less than tol*50.
        GridField tu = apply_T(u, dom, cfg, prm);
        CHECK(sup_distance(tu, u) < 50.0 * info.tol_used);

        // Fixed point independent of the start.
        SolverConfig cfg2 = cfg;
        cfg2.init = SolverConfig::Init::Data;
        auto [u2, info3] = solve_dpp(F, dom, cfg2, prm);
        REQUIRE(info3.converged);
        CHECK(sup_distance(u, u2) <= 10.0 * info.tol_used);
    }

    SUBCASE("degenerate scaling is accepted by the solver") {
        Params dg = make_params(2, 3.0, 0.0, Branch::DegenerateAspectZero);
        cfg.tol = 1e-8;
        auto [u, info] = solve_dpp(F, dom, cfg, dg);
        CHECK(info.converged);
        double fsup = std::max(std::abs(info.data_min), std::abs(info.data_max));
        for (long p = 0; p < u.size(); ++p) CHECK(std::abs(u.value(p)) <= fsup + 1e-9);
    }

    SUBCASE("max_iter exhaustion reports instead of throwing") {
        SolverConfig capped = cfg;
        capped.max_iter = 2;
        capped.tol = 1e-14;
        auto [u, info] = solve_dpp(F, dom, capped, prm);
        CHECK(!info.converged);
        CHECK(info.iterations == 2);
        CHECK(info.final_update > 0.0);
    }
}

TEST_CASE("solve_dpp on a small annulus tracks the radial p-harmonic data") {
    // Coarse sanity run of the O(eps) discretization; the acceptance suite
    // runs the real sweep.
    Params prm = make_params_default(2, 3.0, Branch::AspectBelowOne);
    Domain dom = Domain::annulus(Vec{0.0, 0.0}, 1.0, 2.0);
    RadialPHarmonic rp{3.0, 2};
    DataFnPtr F = rp.data(Vec(2), 0.5, 4.0);

    SolverConfig cfg = small_cfg(0.2);
    cfg.tol = 1e-7;
    auto [u, info] = solve_dpp(F, dom, cfg, prm);
    REQUIRE(info.converged);
    double err = 0.0;
    for (long p = 0; p < u.size(); ++p) {
        Vec x = u.point(p);
        if (dom.contains(x)) err = std::max(err, std::abs(u.value(p) - F->value(x)));
    }
    CHECK(err < 0.08);  // |v| ranges over [1, sqrt(2)]; the scheme error is O(eps)
}
