// Acceptance suite: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line. Run with --criterion N for one of them,
// or with no arguments for the full battery.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "elliptow/bench.hpp"
#include "elliptow/dpp.hpp"
#include "elliptow/error.hpp"

using namespace elliptow;
using nlohmann::json;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

// --- 1. Interpolation identities ------------------------------------------

Outcome identity_suite() {
    Outcome out;
    json spec{{"kind", "quadratic"}, {"matrix", {{2.0, 0.6}, {0.6, 1.0}}}, {"coeffs", {0.4, -0.3}}};
    SmoothTestFunction f = test_function_from_json(spec, 2);

    auto divergence_form = [&](const Vec& x, double p, double h) {
        auto flux_div = [&](double hh) {
            double acc = 0.0;
            for (int i = 0; i < 2; ++i) {
                auto flux = [&](double t) {
                    Vec y = x;
                    y[i] += t;
                    Vec g = f.gradient(y);
                    return std::pow(g.norm(), p - 2.0) * g[i];
                };
                acc += (flux(-2 * hh) - 8 * flux(-hh) + 8 * flux(hh) - flux(2 * hh)) / (12 * hh);
            }
            return acc;
        };
        double r1 = (16.0 * flux_div(h / 2) - flux_div(h)) / 15.0;
        double r2 = (16.0 * flux_div(h / 4) - flux_div(h / 2)) / 15.0;
        return (64.0 * r2 - r1) / 63.0;
    };

    std::mt19937_64 eng(2027);
    auto u01 = [&] { return (eng() >> 11) * 0x1.0p-53; };
    int checked = 0;
    for (int k = 0; k < 400 && checked < 100; ++k) {
        Vec x{2.0 * u01() - 1.0, 2.0 * u01() - 1.0};
        double gn = f.gradient(x).norm();
        if (gn < 0.8) continue;
        double p = 1.3 + 2.9 * u01();
        double lhs = p_laplacian(f, x, p);
        double scale = std::max(1.0, std::abs(lhs));

        double div_fd = divergence_form(x, p, 0.025);
        out.require(std::abs(lhs - div_fd) <= 1e-10 * scale, "divergence-form mismatch");

        double mv2 = std::pow(gn, p - 2.0) * (gn * one_laplacian(f, x) + (p - 1.0) * infinity_laplacian(f, x));
        out.require(std::abs(lhs - mv2) <= 1e-10 * scale, "1-laplacian interpolation mismatch");

        double q = p + 0.3 + u01(), s = q + 0.3 + u01();
        double lp = std::pow(gn, 2.0 - p) * p_laplacian(f, x, p);
        double lq = std::pow(gn, 2.0 - q) * p_laplacian(f, x, q);
        double ls = std::pow(gn, 2.0 - s) * p_laplacian(f, x, s);
        double tri_scale = std::max({std::abs(lp), std::abs(lq), std::abs(ls), 1.0});
        out.require(std::abs((s - q) * lp - ((s - p) * lq + (p - q) * ls)) <= 1e-10 * tri_scale,
                    "three-exponent identity mismatch");
        ++checked;
    }
    out.require(checked == 100, "could not sample 100 admissible points");
    out.detail = out.detail.empty() ? "100 random points within 1e-10 relative" : out.detail;
    return out;
}

// --- 2. Expansion order -----------------------------------------------------

Outcome expansion_order() {
    json cfg{{"params", {{"n", 2}, {"p", 3.0}, {"gamma", 2.0}, {"branch", "AspectAboveOne"}}},
             {"test_function", {{"kind", "norm-squared"}}},
             {"x0", {1.0, 0.0}},
             {"r_list", {0.05, 0.025}},
             {"checks",
              json::array({json{{"variant", "main"}, {"r", 0.05}, {"lo", 2.7}, {"hi", 3.3}},
                           json{{"variant", "main"}, {"r", 0.025}, {"lo", 2.85}, {"hi", 3.15}},
                           json{{"variant", "degenerate"}, {"r", 0.05}, {"lo", 1.35}, {"hi", 1.65}},
                           json{{"variant", "degenerate"}, {"r", 0.025}, {"lo", 1.425}, {"hi", 1.575}}})}};
    JobResult job = run_job("expansion-check", cfg);
    Outcome out;
    out.passed = job.all_passed;
    double main_r = job.manifest["results"]["main"][0]["measured_over_r2"].get<double>();
    double dg_r = job.manifest["results"]["degenerate"][0]["measured_over_r2"].get<double>();
    out.detail = "measured/r^2 = " + format_double(main_r) + " (target 3), degenerate " +
                 format_double(dg_r) + " (target 1.5)";
    return out;
}

// --- 3. DPP well-posedness ---------------------------------------------------

Outcome dpp_wellposed() {
    Outcome out;
    Params prm = make_params_default(2, 3.0, Branch::AspectBelowOne);
    Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
    SolverConfig cfg;
    cfg.eps = 0.1;
    cfg.h = cfg.eps / 8.0;  // about 200 lattice cells across the inflated box
    cfg.quad_radial = 2;
    cfg.quad_angular = 6;
    cfg.search_directions = 16;
    cfg.search_levels = {1.0};

    // Constant data: exact fixed point.
    DataFnPtr Fc = make_data_fn("const", [](const Vec&) { return 5.0; });
    auto [uc, infoc] = solve_dpp(Fc, dom, cfg, prm);
    double cerr = 0.0;
    for (long p = 0; p < uc.size(); ++p) cerr = std::max(cerr, std::abs(uc.value(p) - 5.0));
    out.require(cerr <= 1e-12, "constant data not exact (err " + format_double(cerr) + ")");

    // Monotone iterates (checked inside the solver every sweep) and sup bound.
    DataFnPtr F = make_data_fn("bump", [](const Vec& x) { return std::cos(2.0 * x[0]) + 0.3 * x[1]; });
    auto [u1, info1] = solve_dpp(F, dom, cfg, prm);
    out.require(info1.converged, "solver did not converge");
    out.require(info1.monotone, "nondecreasing-iterates check inactive");
    double fsup = std::max(std::abs(info1.data_min), std::abs(info1.data_max));
    double usup = 0.0;
    for (long p = 0; p < u1.size(); ++p) usup = std::max(usup, std::abs(u1.value(p)));
    out.require(usup <= fsup + 1e-9, "sup bound violated");

    // Initialization independence within 10*tol.
    SolverConfig cfg2 = cfg;
    cfg2.init = SolverConfig::Init::Data;
    auto [u2, info2] = solve_dpp(F, dom, cfg2, prm);
    out.require(info2.converged, "data-start solve did not converge");
    double gap = sup_distance(u1, u2);
    out.require(gap <= 10.0 * info1.tol_used,
                "init gap " + format_double(gap) + " > 10*tol " + format_double(10.0 * info1.tol_used));
    if (out.passed)
        out.detail = "lattice " + std::to_string(u1.shape(0)) + "^2, init gap " + format_double(gap) +
                     ", iterations " + std::to_string(info1.iterations) + "/" +
                     std::to_string(info2.iterations);
    return out;
}

// --- 4. Convergence rate ----------------------------------------------------

Outcome convergence_rate() {
    json cfg{{"params", {{"n", 2}, {"p", 3.0}, {"gamma", 2.0}, {"branch", "AspectBelowOne"}}},
             {"domain", {{"kind", "annulus"}, {"center", {0.0, 0.0}}, {"r_inner", 1.0}, {"r_outer", 2.0}}},
             {"data", {{"kind", "radial-pharmonic"}, {"p", 3.0}, {"clamp_lo", 0.5}, {"clamp_hi", 4.0}}},
             {"eps_list", {0.1, 0.05, 0.025}},
             {"solver",
              {{"h_over_eps", 0.125},
               {"tol", 5e-5},
               {"quad_radial", 2},
               {"quad_angular", 6},
               {"search_directions", 16},
               {"search_levels", {1.0}},
               {"init", "data"}}},
             {"assert_ratio_max", 0.7},
             {"seed", 1}};
    JobResult job = run_job("convergence", cfg);
    Outcome out;
    out.passed = job.all_passed;
    std::string errs;
    for (const auto& row : job.manifest["results"]["rows"])
        errs += (errs.empty() ? "" : " -> ") + format_double(row["sup_error"].get<double>());
    out.detail = "sup errors " + errs;
    return out;
}

// --- 5. Termination ----------------------------------------------------------

Outcome termination() {
    json cfg{{"params", {{"n", 2}, {"p", 3.0}}},
             {"domain", {{"kind", "ball"}, {"center", {0.0, 0.0}}, {"radius", 1.0}}},
             {"data", {{"kind", "constant"}, {"value", 0.0}}},
             {"eps", 0.1},
             {"n_runs", 10000},
             {"cap", 10000},
             {"seed", 11},
             {"strategies", {{"max", "zero"}, {"min", "zero"}}},
             {"x0_list", json::array({json::array({0.0, 0.0})})},
             {"assert_unterminated_max", 1e-3}};
    JobResult job = run_job("simulate", cfg);
    Outcome out;
    out.passed = job.all_passed;
    out.detail = "unterminated fraction " +
                 format_double(job.manifest["results"]["estimates"][0]["unterminated_fraction"].get<double>());
    return out;
}

// --- 6. Value identity --------------------------------------------------------

Outcome value_identity() {
    json cfg{{"params", {{"n", 2}, {"p", 3.0}, {"gamma", 2.0}, {"branch", "AspectBelowOne"}}},
             {"domain", {{"kind", "annulus"}, {"center", {0.0, 0.0}}, {"r_inner", 1.0}, {"r_outer", 2.0}}},
             {"data", {{"kind", "radial-pharmonic"}, {"p", 3.0}, {"clamp_lo", 0.5}, {"clamp_hi", 4.0}}},
             {"eps", 0.1},
             {"n_runs", 10000},
             {"cap", 100000},
             {"tol_disc", 0.02},
             {"seed", 5},
             {"solver",
              {{"tol", 1e-7},
               {"quad_radial", 2},
               {"quad_angular", 6},
               {"search_directions", 16},
               {"search_levels", {1.0}}}},
             {"x0_list", json::array({json::array({1.5, 0.0}), json::array({0.0, 1.25}),
                                      json::array({-1.75, 0.0}), json::array({1.06, 1.06}),
                                      json::array({0.0, -1.5})})}};
    JobResult job = run_job("crosscheck", cfg);
    Outcome out;
    out.passed = job.all_passed;
    double worst = 0.0;
    for (const auto& row : job.manifest["results"]["rows"])
        if (row["pairing"].get<std::string>() == "greedy-max|greedy-min")
            worst = std::max(worst, std::abs(row["mean"].get<double>() - row["u_eps"].get<double>()));
    out.detail = "worst greedy-vs-greedy gap " + format_double(worst);
    return out;
}

// --- 7. Annulus exit bound -----------------------------------------------------

Outcome annulus_bound() {
    json cfg{{"params", {{"n", 3}, {"p", 2.0}, {"gamma", 3.0}, {"branch", "AspectBelowOne"}}},
             {"radii", {1.0, 2.0, 4.0}},
             {"x0", {2.0, 0.0, 0.0}},
             {"eps", 0.05},
             {"xi", 0.05},
             {"n_runs", 10000},
             {"cap", 20000},
             {"seed", 21},
             {"adversaries", json::array({"zero", "greedy-max"})},
             {"pull_strategy", "greedy-min"},
             {"quadrature", {{"radial", 2}, {"angular", 4}}},
             {"search", {{"directions", 16}, {"levels", {1.0}}, {"center", true}}}};
    JobResult job = run_job("annulus", cfg);
    Outcome out;
    out.passed = job.all_passed;
    std::string probs;
    for (const auto& row : job.manifest["results"]["rows"])
        probs += (probs.empty() ? "" : ", ") + row["adversary"].get<std::string>() + ": " +
                 format_double(row["exit_prob"].get<double>());
    out.detail = "bound 2/3 + 0.05; exit probabilities " + probs;
    return out;
}

// --- 8. Reproducibility ---------------------------------------------------------

Outcome reproducibility() {
    Outcome out;
    std::vector<std::pair<std::string, json>> jobs;
    jobs.emplace_back("expansion-check",
                      json{{"params", {{"n", 2}, {"p", 3.0}, {"gamma", 2.0}, {"branch", "AspectAboveOne"}}},
                           {"test_function", {{"kind", "norm-squared"}}},
                           {"x0", {1.0, 0.0}},
                           {"r_list", {0.1, 0.05}}});
    jobs.emplace_back("simulate",
                      json{{"params", {{"n", 2}, {"p", 3.0}}},
                           {"domain", {{"kind", "ball"}, {"center", {0.0, 0.0}}, {"radius", 1.0}}},
                           {"data", {{"kind", "linear"}, {"coeffs", {1.0, -0.5}}}},
                           {"eps", 0.15},
                           {"n_runs", 2000},
                           {"cap", 20000},
                           {"seed", 33},
                           {"strategies", {{"max", "radial-push"}, {"min", "radial-pull"}}},
                           {"x0_list", json::array({json::array({0.25, 0.0})})},
                           {"write_trajectories", true}});
    jobs.emplace_back("convergence",
                      json{{"params", {{"n", 2}, {"p", 3.0}, {"gamma", 2.0}, {"branch", "AspectBelowOne"}}},
                           {"domain",
                            {{"kind", "annulus"}, {"center", {0.0, 0.0}}, {"r_inner", 1.0}, {"r_outer", 2.0}}},
                           {"data",
                            {{"kind", "radial-pharmonic"}, {"p", 3.0}, {"clamp_lo", 0.5}, {"clamp_hi", 4.0}}},
                           {"eps_list", {0.1}},
                           {"solver",
                            {{"tol", 1e-5},
                             {"quad_radial", 2},
                             {"quad_angular", 6},
                             {"search_directions", 16},
                             {"search_levels", {1.0}},
                             {"init", "data"}}},
                           {"seed", 3}});
    for (const auto& [kind, cfg] : jobs) {
        JobResult first = run_job(kind, cfg);
        JobResult again = run_job(kind, first.manifest["config"]);
        out.require(first.manifest.dump() == again.manifest.dump(), kind + ": manifest differs");
        out.require(first.csv_files.size() == again.csv_files.size(), kind + ": outputs differ");
        for (const auto& [name, contents] : first.csv_files) {
            auto it = again.csv_files.find(name);
            out.require(it != again.csv_files.end() && it->second == contents,
                        kind + ": " + name + " differs");
        }
    }
    if (out.passed) out.detail = "3 experiment kinds re-run bit-identically from their manifests";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    struct Entry {
        int num;
        const char* name;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {1, "identity suite (interpolation, 1-laplacian, three-exponent)", identity_suite},
        {2, "expansion order for the relaxed ellipsoid average", expansion_order},
        {3, "DPP well-posedness (exactness, monotone iterates, sup bound, init independence)",
         dpp_wellposed},
        {4, "first-order convergence to p-harmonic data on the annulus", convergence_rate},
        {5, "almost-sure termination at desk scale", termination},
        {6, "game value matches the DPP solution", value_identity},
        {7, "annulus walk exit bound", annulus_bound},
        {8, "manifest re-runs are bit-identical", reproducibility},
    };

    int failures = 0;
    for (const auto& e : entries) {
        if (only != 0 && e.num != only) continue;
        Outcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out.passed = false;
            out.detail = std::string("exception: ") + ex.what();
        }
        std::cout << (out.passed ? "[PASS] " : "[FAIL] ") << "criterion " << e.num << ": " << e.name
                  << (out.detail.empty() ? "" : " -- " + out.detail) << "\n";
        if (!out.passed) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
