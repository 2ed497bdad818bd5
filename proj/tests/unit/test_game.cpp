#include <doctest.h>

#include <cmath>

#include "elliptow/game.hpp"
#include "elliptow/registry.hpp"

using namespace elliptow;

namespace {

Strategy const_strategy(const std::string& name, const Vec& v) {
    return Strategy{name, [v](const History&) { return v; }};
}

}  // namespace

TEST_CASE("game step formula") {
    Params prm = make_params(2, 3.0, 2.0, Branch::AspectAboveOne);  // gamma=2, a=1
    Vec x{0.5, -0.25};

    SUBCASE("zero shift: pure ball noise") {
        Vec w{0.3, 0.1};
        Vec out = game_step(x, Vec(2), w, prm, 0.1);
        CHECK(out[0] == doctest::Approx(x[0] + 0.1 * 2.0 * 0.3));
        CHECK(out[1] == doctest::Approx(x[1] + 0.1 * 2.0 * 0.1));
    }
    SUBCASE("a = 1: isotropic noise regardless of sigma") {
        Vec out = game_step(x, Vec{1.0, 0.0}, Vec{1.0, 0.0}, prm, 0.1);
        CHECK(out[0] == doctest::Approx(x[0] + 0.3));
        CHECK(out[1] == doctest::Approx(x[1]));
    }
    SUBCASE("independent reimplementation on random inputs") {
        Params pb = make_params(2, 2.0, std::sqrt(8.0), Branch::AspectBelowOne);
        RngStream rng(5, 0);
        for (int k = 0; k < 200; ++k) {
            Vec sigma = 0.9 * rng.uniform_ball(2);
            Vec w = rng.uniform_ball(2);
            double eps = 0.05 + 0.2 * rng.uniform01();
            Vec got = game_step(x, sigma, w, pb, eps);
            double ws = w[0] * sigma[0] + w[1] * sigma[1];
            for (int i = 0; i < 2; ++i) {
                double want = x[i] + eps * (sigma[i] + pb.gamma * w[i] + pb.gamma * (pb.a - 1.0) * ws * sigma[i]);
                CHECK(got[i] == doctest::Approx(want).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("rng streams reproduce bit for bit and differ across ids") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    bool all_equal_c = true;
    for (int k = 0; k < 100; ++k) {
        double ua = a.uniform01(), ub = b.uniform01(), uc = c.uniform01();
        CHECK(ua == ub);
        all_equal_c = all_equal_c && (ua == uc);
    }
    CHECK(!all_equal_c);

    SUBCASE("ball samples stay strictly inside") {
        RngStream r(9, 1);
        for (int k = 0; k < 1000; ++k) {
            CHECK(r.uniform_ball(2).norm2() < 1.0);
            CHECK(r.uniform_ball(5).norm2() < 1.0);  // Gaussian path
        }
    }
}

TEST_CASE("play: stopping rule, replay determinism, record consistency") {
    Params prm = make_params(2, 3.0, 2.0, Branch::AspectAboveOne);
    Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
    DataFnPtr F = make_data_fn("lin", [](const Vec& x) { return x[0] + 2.0; });
    StrategyContext ctx;
    ctx.dim = 2;
    Strategy pull = strategy_from_json(nlohmann::json("radial-pull"), ctx);

    SUBCASE("start outside the domain stops at once with payoff F(x0)") {
        Vec x0{2.0, 0.0};
        RngStream rng(1, 0);
        Trajectory tr = play(x0, pull, pull, dom, F, prm, 0.1, rng, 100);
        CHECK(tr.terminated);
        CHECK(tr.tau == 1);
        CHECK(tr.payoff == F->value(x0));
        CHECK(tr.positions.size() == 1);
    }

    SUBCASE("degenerate scaling rejected") {
        Params dg = make_params(2, 3.0, 0.0, Branch::DegenerateAspectZero);
        RngStream rng(1, 0);
        CHECK_THROWS_WITH_AS(play(Vec{0.0, 0.0}, pull, pull, dom, F, dg, 0.1, rng, 10),
                             doctest::Contains("unsupported"), ConfigError);
    }

    SUBCASE("fixed seed replays identically; records satisfy the update rule") {
        Vec x0{0.2, 0.1};
        Strategy push = strategy_from_json(nlohmann::json("radial-push"), ctx);
        RngStream r1(77, 3), r2(77, 3);
        Trajectory t1 = play(x0, push, pull, dom, F, prm, 0.1, r1, 10000);
        Trajectory t2 = play(x0, push, pull, dom, F, prm, 0.1, r2, 10000);
        REQUIRE(t1.terminated);
        REQUIRE(t1.tau == t2.tau);
        REQUIRE(t1.positions.size() == t2.positions.size());
        for (std::size_t k = 0; k < t1.positions.size(); ++k)
            for (int i = 0; i < 2; ++i) CHECK(t1.positions[k][i] == t2.positions[k][i]);

        // Thresholds: continue steps have t <= d, the stop step has t > d.
        for (long n = 1; n <= t1.tau; ++n) {
            double d = scaled_distance(dom, t1.positions[n - 1], 0.1);
            if (n < t1.tau)
                CHECK(t1.steps[n - 1].threshold <= d);
            else
                CHECK(t1.steps[n - 1].threshold > d);
        }
        // Steps recompute exactly from the records and the (deterministic) strategies.
        for (long n = 1; n < t1.tau; ++n) {
            const Vec& xp = t1.positions[n - 1];
            History h{std::span<const Vec>(t1.positions.data(), n),
                      std::span<const StepRecord>(t1.steps.data(), n - 1)};
            Vec sigma = clamp_shift((t1.steps[n - 1].coin == 1 ? push : pull).decide(h));
            Vec want = game_step(xp, sigma, t1.steps[n - 1].noise, prm, 0.1);
            for (int i = 0; i < 2; ++i) CHECK(t1.positions[n][i] == want[i]);
        }
    }
}

TEST_CASE("greedy strategies") {
    Params prm = make_params(2, 3.0, 2.0, Branch::AspectAboveOne);
    QuadratureRule quad = QuadratureRule::ball_product(2, 3, 8);
    SearchRule search = SearchRule::uniform(2, 32, {1.0});

    SUBCASE("linear oracle: minimizer the downhill direction, maximizer uphill") {
        Vec b{0.6, -0.8};
        PointFn lin = [b](const Vec& x) { return dot(b, x); };
        Strategy mn = greedy_strategy_fn("mn", lin, prm, 0.1, GreedyMode::Minimize, search, quad);
        Strategy mx = greedy_strategy_fn("mx", lin, prm, 0.1, GreedyMode::Maximize, search, quad);
        std::vector<Vec> pos = {Vec{0.0, 0.0}};
        History h{std::span<const Vec>(pos), {}};
        Vec zn = mn.decide(h), zx = mx.decide(h);
        CHECK(dot(zn, b) < -0.95 * (1.0 - kSigmaMargin));
        CHECK(dot(zx, b) > 0.95 * (1.0 - kSigmaMargin));
        CHECK(zn.norm() <= 1.0 - kSigmaMargin + 1e-15);
    }

    SUBCASE("radial profile: the minimizer pulls toward the inner sphere") {
        RadialPHarmonic rp{3.0, 2};
        DataFnPtr v = rp.data(Vec(2), 0.25, 8.0);
        Strategy mn = greedy_strategy_fn("mn", [v](const Vec& x) { return v->value(x); }, prm, 0.05,
                                         GreedyMode::Minimize, search, quad);
        RngStream rng(3, 0);
        for (int k = 0; k < 100; ++k) {
            Vec d = rng.uniform_ball(2).normalized_or_zero();
            if (d.norm2() == 0.0) continue;
            Vec x = (1.2 + 0.6 * rng.uniform01()) * d;
            std::vector<Vec> pos = {x};
            History h{std::span<const Vec>(pos), {}};
            CHECK(dot(mn.decide(h), (-1.0) * d) > 0.0);
        }
    }

    SUBCASE("solved-field provenance is enforced") {
        Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
        DataFnPtr F = make_data_fn("lin", [](const Vec& x) { return x[0]; });
        SolverConfig cfg;
        cfg.eps = 0.3;
        cfg.h = cfg.eps / 8.0;
        cfg.quad_radial = 2;
        cfg.quad_angular = 6;
        cfg.search_directions = 8;
        cfg.search_levels = {1.0};
        auto [u, info] = solve_dpp(F, dom, cfg, prm);
        auto shared = std::make_shared<const GridField>(std::move(u));
        CHECK_NOTHROW(greedy_strategy(shared, dom, prm, 0.3, GreedyMode::Minimize, search, quad));
        CHECK_THROWS_AS(greedy_strategy(shared, dom, prm, 0.2, GreedyMode::Minimize, search, quad),
                        ConfigError);
        Params other = make_params(2, 3.0, 2.5, Branch::AspectAboveOne);
        CHECK_THROWS_AS(greedy_strategy(shared, dom, other, 0.3, GreedyMode::Minimize, search, quad),
                        ConfigError);
    }
}

TEST_CASE("concatenated strategy dispatch") {
    Vec center{0.0, 0.0};
    Strategy s1 = const_strategy("s1", Vec{0.1, 0.0});
    Strategy s2 = const_strategy("s2", Vec{0.0, 0.2});
    Strategy s3 = const_strategy("s3", Vec{-0.3, 0.0});

    SUBCASE("single stage equals the strategy itself") {
        Strategy c = concatenated_strategy({s1}, {0.5}, center);
        std::vector<Vec> pos = {Vec{0.9, 0.0}};  // outside the single ball: still s1
        History h{std::span<const Vec>(pos), {}};
        CHECK(c.decide(h)[0] == doctest::Approx(0.1));
    }

    SUBCASE("history inside ball 1 uses stage 1 with the full history") {
        Strategy c = concatenated_strategy({s1, s2, s3}, {0.2, 0.5, 1.0}, center);
        std::vector<Vec> pos = {Vec{0.05, 0.0}, Vec{0.1, 0.05}};
        std::vector<StepRecord> steps(1);
        History h{std::span<const Vec>(pos), std::span<const StepRecord>(steps)};
        CHECK(c.decide(h)[0] == doctest::Approx(0.1));
    }

    SUBCASE("exit of ball k switches to stage k+1 with the history re-rooted") {
        // Probe strategy that reports the re-rooted history length via its output.
        Strategy probe{"probe", [](const History& h) {
                           return Vec{0.001 * double(h.positions.size()),
                                      h.positions[0].norm()};
                       }};
        Strategy c = concatenated_strategy({s1, probe, s3}, {0.2, 0.5, 1.0}, center);
        // Positions: in, in, exit ball1 at step 2 (|x| >= 0.2), then two more.
        std::vector<Vec> pos = {Vec{0.05, 0.0}, Vec{0.15, 0.0}, Vec{0.25, 0.0}, Vec{0.3, 0.0},
                                Vec{0.35, 0.0}};
        std::vector<StepRecord> steps(4);
        History h{std::span<const Vec>(pos), std::span<const StepRecord>(steps)};
        Vec out = c.decide(h);
        CHECK(out[0] == doctest::Approx(0.001 * 3));  // re-rooted positions: x_2, x_3, x_4
        CHECK(out[1] == doctest::Approx(0.25));       // re-rooted history starts at the exit step

        // Exiting ball 2 as well routes to stage 3.
        pos.push_back(Vec{0.6, 0.0});
        std::vector<StepRecord> steps2(5);
        History h2{std::span<const Vec>(pos), std::span<const StepRecord>(steps2)};
        CHECK(c.decide(h2)[0] == doctest::Approx(-0.3));
    }

    SUBCASE("configuration errors") {
        CHECK_THROWS_AS(concatenated_strategy({s1, s2}, {0.5}, center), ConfigError);
        CHECK_THROWS_AS(concatenated_strategy({s1, s2}, {0.5, 0.5}, center), ConfigError);
    }
}

TEST_CASE("estimate_value") {
    Params prm = make_params(2, 3.0, 2.0, Branch::AspectAboveOne);
    Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
    Strategy zero = const_strategy("zero", Vec(2));

    SUBCASE("constant data: mean c, zero standard error") {
        DataFnPtr F = make_data_fn("const", [](const Vec&) { return 3.25; });
        ValueEstimate est = estimate_value(Vec{0.1, 0.0}, zero, zero, dom, F, prm, 0.1, 200, 11, 10000);
        CHECK(est.mean == doctest::Approx(3.25));
        CHECK(est.std_error == doctest::Approx(0.0));
        CHECK(est.unterminated_fraction == 0.0);
    }
    SUBCASE("start outside the domain: mean F(x0)") {
        DataFnPtr F = make_data_fn("lin", [](const Vec& x) { return x[0] - x[1]; });
        Vec x0{3.0, 1.0};
        ValueEstimate est = estimate_value(x0, zero, zero, dom, F, prm, 0.1, 50, 11, 100);
        CHECK(est.mean == doctest::Approx(2.0));
        CHECK(est.std_error == doctest::Approx(0.0));
    }
    SUBCASE("deterministic across repeated calls") {
        DataFnPtr F = make_data_fn("lin", [](const Vec& x) { return x[0]; });
        ValueEstimate a = estimate_value(Vec{0.0, 0.0}, zero, zero, dom, F, prm, 0.1, 500, 123, 10000);
        ValueEstimate b = estimate_value(Vec{0.0, 0.0}, zero, zero, dom, F, prm, 0.1, 500, 123, 10000);
        CHECK(a.mean == b.mean);
        CHECK(a.std_error == b.std_error);
    }
    SUBCASE("all runs unterminated raises an estimation failure") {
        DataFnPtr F = make_data_fn("const", [](const Vec&) { return 0.0; });
        CHECK_THROWS_AS(estimate_value(Vec{0.0, 0.0}, zero, zero, dom, F, prm, 0.1, 8, 11, 1),
                        EstimationError);
    }
}

TEST_CASE("pairwise sum is exact on a known vector") {
    std::vector<double> xs(1000);
    for (int i = 0; i < 1000; ++i) xs[i] = 1.0 / (i + 1.0);
    double s = pairwise_sum(xs);
    double ref = 0.0;
    for (int i = 999; i >= 0; --i) ref += xs[i];
    CHECK(s == doctest::Approx(ref).epsilon(1e-14));
}
