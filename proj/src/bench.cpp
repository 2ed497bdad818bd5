#include "elliptow/bench.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "elliptow/error.hpp"

namespace elliptow {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

constexpr std::uint64_t kDefaultSeed = 2024;

json& ensure(json& cfg, const std::string& key, const json& fallback) {
    if (!cfg.contains(key)) cfg[key] = fallback;
    return cfg[key];
}

class Csv {
public:
    explicit Csv(std::vector<std::string> columns) : ncols_(columns.size()) {
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ += columns[i] + (i + 1 < columns.size() ? "," : "\n");
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ += cells[i] + (i + 1 < cells.size() ? "," : "\n");
    }
    std::string str() const { return out_; }

private:
    std::string out_;
    std::size_t ncols_;
};

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf")); }

struct Criteria {
    json list = json::array();
    bool all_passed = true;

    void add(const std::string& name, bool passed, const json& detail = {}) {
        json entry{{"name", name}, {"passed", passed}};
        if (!detail.is_null()) entry["detail"] = detail;
        list.push_back(entry);
        all_passed = all_passed && passed;
    }
    void info(const std::string& name, const json& detail) {
        list.push_back(json{{"name", name}, {"reported", true}, {"detail", detail}});
    }
};

QuadratureRule quad_from_cfg(json& cfg, int dim, int def_radial, int def_angular) {
    json& q = ensure(cfg, "quadrature", json::object());
    int nr = ensure(q, "radial", def_radial).get<int>();
    int na = ensure(q, "angular", def_angular).get<int>();
    return QuadratureRule::ball_product(dim, nr, na);
}

SearchRule search_from_cfg(json& cfg, int dim, int def_dirs, std::vector<double> def_levels) {
    if (def_dirs <= 0) def_dirs = dim == 2 ? 64 : 256;
    json& s = ensure(cfg, "search", json::object());
    int nd = ensure(s, "directions", def_dirs).get<int>();
    auto levels = ensure(s, "levels", def_levels).get<std::vector<double>>();
    bool center = ensure(s, "center", true).get<bool>();
    return SearchRule::uniform(dim, nd, levels, center);
}

SolverConfig solver_from_cfg(json& cfg, double eps) {
    json& s = ensure(cfg, "solver", json::object());
    SolverConfig sc;
    sc.eps = eps;
    sc.h = ensure(s, "h_over_eps", 0.125).get<double>() * eps;
    sc.tol = ensure(s, "tol", -1.0).get<double>();
    sc.max_iter = ensure(s, "max_iter", 100000L).get<long>();
    sc.quad_radial = ensure(s, "quad_radial", 3).get<int>();
    sc.quad_angular = ensure(s, "quad_angular", 8).get<int>();
    sc.search_directions = ensure(s, "search_directions", 0).get<int>();
    sc.search_levels = ensure(s, "search_levels", std::vector<double>{0.5, 1.0}).get<std::vector<double>>();
    sc.search_center = ensure(s, "search_center", true).get<bool>();
    std::string init = ensure(s, "init", "min-data").get<std::string>();
    if (init == "min-data")
        sc.init = SolverConfig::Init::MinData;
    else if (init == "data")
        sc.init = SolverConfig::Init::Data;
    else
        throw ConfigError("solver.init must be 'min-data' or 'data'");
    std::string hint = ensure(s, "search_hint", "none").get<std::string>();
    if (hint == "radial") {
        sc.search_hint = SolverConfig::Hint::Radial;
        sc.hint_center = ensure(s, "hint_center", std::vector<double>{}).get<std::vector<double>>();
    } else if (hint != "none") {
        throw ConfigError("solver.search_hint must be 'none' or 'radial'");
    }
    return sc;
}

void check_interior_probe(const Domain& dom, const Params& prm, double eps) {
    double reach = eps * prm.footprint_factor();
    if (reach >= dom.inradius())
        throw ConfigError("eps*(1 + gamma*max(a,1)) = " + format_double(reach) +
                          " is not smaller than the domain inradius " + format_double(dom.inradius()));
}

json estimate_to_json(const ValueEstimate& est) {
    return json{{"mean", est.mean},
                {"std_error", est.std_error},
                {"unterminated_fraction", est.unterminated_fraction},
                {"n_used", est.n_used},
                {"n_runs", est.n_runs}};
}

struct ProbEstimate {
    double prob = 0.0;
    double std_error = 0.0;
    double unterminated_fraction = 0.0;
    long n_used = 0;
};

/// Seeded Monte Carlo probability of a trajectory event; unterminated runs
/// are excluded and reported.
ProbEstimate mc_probability(const Vec& x0, const Strategy& smax, const Strategy& smin,
                            const Domain& dom, const DataFnPtr& data, const Params& prm, double eps,
                            long n_runs, std::uint64_t seed, long cap,
                            const std::function<bool(const Trajectory&)>& event) {
    std::vector<char> hit(n_runs, 0), ok(n_runs, 0);
#pragma omp parallel for schedule(dynamic, 8)
    for (long r = 0; r < n_runs; ++r) {
        RngStream rng(seed, static_cast<std::uint64_t>(r));
        Trajectory tr = play(x0, smax, smin, dom, data, prm, eps, rng, cap);
        if (tr.terminated) {
            ok[r] = 1;
            hit[r] = event(tr) ? 1 : 0;
        }
    }
    long used = 0, hits = 0;
    for (long r = 0; r < n_runs; ++r) {
        used += ok[r];
        hits += hit[r];
    }
    if (used == 0) throw EstimationError("mc_probability: every run hit the step cap");
    ProbEstimate pe;
    pe.n_used = used;
    pe.prob = double(hits) / double(used);
    pe.std_error = std::sqrt(std::max(0.0, pe.prob * (1.0 - pe.prob) / double(used)));
    pe.unterminated_fraction = double(n_runs - used) / double(n_runs);
    return pe;
}

// ---------------------------------------------------------------------------

JobResult job_expansion_check(json& cfg, Criteria& crit) {
    Params prm = params_from_json(cfg.at("params"));
    int dim = prm.n;
    Vec x0 = Vec::from(cfg.at("x0").get<std::vector<double>>());
    if (x0.dim() != dim) throw ConfigError("x0 dimension does not match params.n");
    auto r_list = cfg.at("r_list").get<std::vector<double>>();
    SmoothTestFunction f = test_function_from_json(cfg.at("test_function"), dim);
    if (f.gradient(x0).norm() == 0.0)
        throw ConfigError("expansion-check: test function gradient vanishes at x0");

    QuadratureRule quad = quad_from_cfg(cfg, dim, 6, 24);
    SearchRule search = search_from_cfg(cfg, dim, 0, {0.25, 0.5, 0.75, 1.0});
    bool run_degenerate = ensure(cfg, "degenerate_variant", true).get<bool>();

    JobResult job;
    auto run_table = [&](const Params& p, const std::string& label) {
        Csv csv({"r", "s_minus_u", "predicted", "residual", "residual_over_r2"});
        json rows = json::array();
        for (double r : r_list) {
            std::vector<Vec> extra = {f.gradient(x0), -f.gradient(x0)};
            MinMaxAverage s = minmax_average(f.value, x0, r, p, quad, search, extra);
            double measured = s.value - f.value(x0);
            double predicted = expansion_prediction(f, x0, r, p);
            double residual = measured - predicted;
            csv.row({fmt(r), fmt(measured), fmt(predicted), fmt(residual), fmt(residual / (r * r))});
            rows.push_back(json{{"r", r},
                                {"measured", measured},
                                {"predicted", predicted},
                                {"residual", residual},
                                {"measured_over_r2", measured / (r * r)}});
        }
        job.csv_files[label + ".csv"] = csv.str();
        return rows;
    };

    json results;
    results["params"] = params_to_json(prm);
    results["main"] = run_table(prm, "expansion");
    if (run_degenerate && prm.branch != Branch::DegenerateAspectZero) {
        Params dg = make_params(prm.n, prm.p, 0.0, Branch::DegenerateAspectZero);
        results["degenerate_params"] = params_to_json(dg);
        results["degenerate"] = run_table(dg, "expansion_degenerate");
    }

    for (const auto& chk : ensure(cfg, "checks", json::array())) {
        std::string variant = chk.value("variant", "main");
        double r = chk.at("r").get<double>();
        double lo = chk.at("lo").get<double>(), hi = chk.at("hi").get<double>();
        bool found = false;
        for (const auto& row : results[variant]) {
            if (row["r"].get<double>() == r) {
                double v = row["measured_over_r2"].get<double>();
                crit.add("measured/r^2 in [" + fmt(lo) + "," + fmt(hi) + "] at r=" + fmt(r) + " (" + variant + ")",
                         v >= lo && v <= hi, v);
                found = true;
            }
        }
        if (!found) throw ConfigError("expansion-check: check references r not in r_list");
    }
    job.manifest["results"] = results;
    return job;
}

// ---------------------------------------------------------------------------

JobResult job_solve_dpp(json& cfg, Criteria& crit) {
    Params prm = params_from_json(cfg.at("params"));
    Domain dom = domain_from_json(cfg.at("domain"));
    if (dom.dim() != prm.n) throw ConfigError("domain dimension does not match params.n");
    DataFnPtr data = data_function_from_json(cfg.at("data"), prm.n);
    auto eps_list = cfg.at("eps_list").get<std::vector<double>>();
    bool write_fields = ensure(cfg, "write_fields", true).get<bool>();

    JobResult job;
    json runs = json::array();
    for (double eps : eps_list) {
        check_interior_probe(dom, prm, eps);
        SolverConfig sc = solver_from_cfg(cfg, eps);
        auto [field, info] = solve_dpp(data, dom, sc, prm);
        json r{{"eps", eps},
               {"h", field.spacing()},
               {"lattice", field.size()},
               {"iterations", info.iterations},
               {"converged", info.converged},
               {"final_update", info.final_update},
               {"est_tail", info.est_tail},
               {"contraction", info.contraction},
               {"tol", info.tol_used},
               {"data_min", info.data_min},
               {"data_max", info.data_max}};
        crit.add("solver converged at eps=" + fmt(eps), info.converged,
                 json{{"final_update", info.final_update}});
        if (write_fields) {
            std::vector<std::string> cols;
            for (int i = 0; i < field.dim(); ++i) cols.push_back("x" + std::to_string(i));
            cols.push_back("value");
            Csv csv(cols);
            for (long p = 0; p < field.size(); ++p) {
                Vec x = field.point(p);
                std::vector<std::string> cells;
                for (int i = 0; i < field.dim(); ++i) cells.push_back(fmt(x[i]));
                cells.push_back(fmt(field.value(p)));
                csv.row(cells);
            }
            std::string name = "field_eps_" + fmt(eps) + ".csv";
            job.csv_files[name] = csv.str();
            r["field_csv"] = name;
        }
        runs.push_back(r);
    }
    job.manifest["results"] = json{{"runs", runs}};
    return job;
}

// ---------------------------------------------------------------------------

JobResult job_convergence(json& cfg, Criteria& crit) {
    Params prm = params_from_json(cfg.at("params"));
    Domain dom = domain_from_json(cfg.at("domain"));
    if (dom.dim() != prm.n) throw ConfigError("domain dimension does not match params.n");
    DataFnPtr data = data_function_from_json(cfg.at("data"), prm.n);
    auto eps_list = cfg.at("eps_list").get<std::vector<double>>();

    // The rate statement needs p-harmonic data with nonvanishing gradient
    // around the closure: the radial profile on an annulus (constants are the
    // trivial case). Anything else still runs, with the order column dropped.
    std::string dkind = cfg.at("data").at("kind").get<std::string>();
    bool pharmonic = (dkind == "radial-pharmonic" && dom.kind() == Domain::Kind::Annulus &&
                      std::abs(cfg["data"]["p"].get<double>() - prm.p) < 1e-12) ||
                     dkind == "constant";
    json warning;
    if (!pharmonic)
        warning = "data is not the p-harmonic radial profile on an annulus; order column suppressed";

    JobResult job;
    Csv csv({"eps", "sup_error", "observed_order"});
    Csv eq_csv({"eps", "delta", "max_boundary_gap"});
    json rows = json::array();
    double prev_err = 0.0, prev_eps = 0.0;
    bool have_prev = false;
    std::vector<double> errors;

    for (double eps : eps_list) {
        check_interior_probe(dom, prm, eps);
        SolverConfig sc = solver_from_cfg(cfg, eps);
        auto [field, info] = solve_dpp(data, dom, sc, prm);
        crit.add("solver converged at eps=" + fmt(eps), info.converged,
                 json{{"iterations", info.iterations}, {"final_update", info.final_update}});

        double err = 0.0;
        for (long p = 0; p < field.size(); ++p) {
            Vec x = field.point(p);
            if (dom.contains(x)) err = std::max(err, std::abs(field.value(p) - data->value(x)));
        }
        errors.push_back(err);
        double order = std::numeric_limits<double>::quiet_NaN();
        if (have_prev && pharmonic && err > 0.0 && prev_err > 0.0)
            order = std::log(prev_err / err) / std::log(prev_eps / eps);
        csv.row({fmt(eps), fmt(err), fmt(order)});
        rows.push_back(json{{"eps", eps},
                            {"sup_error", err},
                            {"iterations", info.iterations},
                            {"converged", info.converged},
                            {"est_tail", info.est_tail}});
        prev_err = err;
        prev_eps = eps;
        have_prev = true;

        // Boundary-equicontinuity diagnostic: worst |u(y0) - u(x0)| over
        // boundary points x0 and interior y0 within delta.
        if (dom.kind() == Domain::Kind::Annulus || dom.kind() == Domain::Kind::Ball) {
            Vec c(prm.n);
            std::vector<double> radii;
            if (dom.kind() == Domain::Kind::Annulus) {
                radii = {dom.inradius() > 0 ? dom.bounding_box().max_extent() / 2.0 : 0.0};
                radii.clear();
            }
            // sample both spheres for the annulus, the single sphere for a ball
            std::vector<std::pair<double, double>> shells;  // (radius, inward sign)
            if (dom.kind() == Domain::Kind::Annulus) {
                double r_out = dom.bounding_box().max_extent() / 2.0;
                double r_in = r_out - 2.0 * dom.inradius();
                shells = {{r_in, +1.0}, {r_out, -1.0}};
            } else {
                shells = {{dom.inradius(), -1.0}};
            }
            for (double delta : {2.0 * eps, 4.0 * eps, 8.0 * eps}) {
                double worst = 0.0;
                const int n_dirs = prm.n == 2 ? 32 : 64;
                SearchRule dirs = SearchRule::uniform(prm.n, n_dirs);
                for (const auto& [rad, inward] : shells) {
                    for (const Vec& d : dirs.directions) {
                        Vec xb = c + rad * d;
                        double ub = field.eval(dom, xb);
                        for (double t : {0.25, 0.5, 0.75, 1.0}) {
                            Vec y = c + (rad + inward * t * delta) * d;
                            if (!dom.contains(y)) continue;
                            worst = std::max(worst, std::abs(field.eval(dom, y) - ub));
                        }
                    }
                }
                eq_csv.row({fmt(eps), fmt(delta), fmt(worst)});
            }
        }
    }

    if (cfg.contains("assert_ratio_max")) {
        double cap = cfg["assert_ratio_max"].get<double>();
        for (std::size_t i = 1; i < errors.size(); ++i) {
            double ratio = errors[i] / errors[i - 1];
            crit.add("error ratio eps=" + fmt(eps_list[i]) + "/" + fmt(eps_list[i - 1]) + " <= " + fmt(cap),
                     ratio <= cap, ratio);
        }
    }

    job.csv_files["convergence.csv"] = csv.str();
    job.csv_files["equicontinuity.csv"] = eq_csv.str();
    json results{{"rows", rows}};
    if (!warning.is_null()) results["warning"] = warning;
    job.manifest["results"] = results;
    return job;
}

// ---------------------------------------------------------------------------

JobResult job_simulate(json& cfg, Criteria& crit) {
    Params prm = params_from_json(cfg.at("params"));
    Domain dom = domain_from_json(cfg.at("domain"));
    if (dom.dim() != prm.n) throw ConfigError("domain dimension does not match params.n");
    DataFnPtr data = data_function_from_json(cfg.at("data"), prm.n);
    double eps = cfg.at("eps").get<double>();
    long n_runs = ensure(cfg, "n_runs", 10000L).get<long>();
    long cap = ensure(cfg, "cap", 10000L).get<long>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    StrategyContext ctx;
    ctx.dim = prm.n;
    ctx.prm = prm;
    ctx.eps = eps;
    ctx.dom = &dom;
    ctx.data = data;
    ctx.quad = quad_from_cfg(cfg, prm.n, 3, 8);
    ctx.search = search_from_cfg(cfg, prm.n, prm.n == 2 ? 32 : 64, {1.0});

    std::shared_ptr<GridField> solved;
    if (ensure(cfg, "solve_field", false).get<bool>()) {
        SolverConfig sc = solver_from_cfg(cfg, eps);
        auto [field, info] = solve_dpp(data, dom, sc, prm);
        crit.add("solver converged", info.converged, info.iterations);
        solved = std::make_shared<GridField>(std::move(field));
        ctx.solved = solved;
    }

    Strategy smax = strategy_from_json(cfg.at("strategies").at("max"), ctx);
    Strategy smin = strategy_from_json(cfg.at("strategies").at("min"), ctx);

    JobResult job;
    json summaries = json::array();
    Csv traj_csv({"x0_index", "run", "step", "coords", "coin", "threshold"});
    bool write_traj = ensure(cfg, "write_trajectories", false).get<bool>();
    long traj_limit = ensure(cfg, "trajectory_limit", 16L).get<long>();

    int x0_index = 0;
    for (const auto& jx : cfg.at("x0_list")) {
        Vec x0 = Vec::from(jx.get<std::vector<double>>());
        ValueEstimate est = estimate_value(x0, smax, smin, dom, data, prm, eps, n_runs, seed, cap);
        json s = estimate_to_json(est);
        s["x0"] = jx;
        summaries.push_back(s);
        if (cfg.contains("assert_unterminated_max")) {
            double um = cfg["assert_unterminated_max"].get<double>();
            crit.add("unterminated fraction <= " + fmt(um) + " at x0 #" + std::to_string(x0_index),
                     est.unterminated_fraction <= um, est.unterminated_fraction);
        }
        if (write_traj) {
            for (long r = 0; r < std::min(traj_limit, n_runs); ++r) {
                RngStream rng(seed, static_cast<std::uint64_t>(r));
                Trajectory tr = play(x0, smax, smin, dom, data, prm, eps, rng, cap);
                for (std::size_t k = 0; k < tr.positions.size(); ++k) {
                    std::string coords;
                    for (int i = 0; i < prm.n; ++i)
                        coords += (i ? ";" : "") + fmt(tr.positions[k][i]);
                    traj_csv.row({std::to_string(x0_index), std::to_string(r), std::to_string(k), coords,
                                  k < tr.steps.size() ? std::to_string(tr.steps[k].coin) : "",
                                  k < tr.steps.size() ? fmt(tr.steps[k].threshold) : ""});
                }
            }
        }
        ++x0_index;
    }
    if (write_traj) job.csv_files["trajectories.csv"] = traj_csv.str();
    job.manifest["results"] = json{{"strategies", json{{"max", smax.name}, {"min", smin.name}}},
                                   {"estimates", summaries}};
    return job;
}

// ---------------------------------------------------------------------------

JobResult job_annulus(json& cfg, Criteria& crit) {
    Params prm = params_from_json(cfg.at("params"));
    int dim = prm.n;
    auto radii = cfg.at("radii").get<std::vector<double>>();
    if (radii.size() != 3 || !(0 < radii[0] && radii[0] < radii[1] && radii[1] < radii[2]))
        throw ConfigError("annulus: radii must be 0 < R1 < R2 < R3");
    double r1 = radii[0], r2 = radii[1], r3 = radii[2];
    Vec x0 = Vec::from(cfg.at("x0").get<std::vector<double>>());
    if (x0.dim() != dim || x0.norm() > r2 + 1e-12)
        throw ConfigError("annulus: start x0 must satisfy |x0| <= R2");
    double eps = cfg.at("eps").get<double>();
    double xi = ensure(cfg, "xi", 0.05).get<double>();
    long n_runs = ensure(cfg, "n_runs", 10000L).get<long>();
    long cap = ensure(cfg, "cap", 100000L).get<long>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    Domain dom = Domain::annulus(Vec(dim), r1, r3);
    RadialPHarmonic rp{prm.p, dim};
    DataFnPtr data = rp.data(Vec(dim), r1 / 2.0, 2.0 * r3);
    if (eps * prm.footprint_factor() >= r1)
        throw ConfigError("annulus: sampling footprint reaches the origin; lower eps");

    double bound_ratio = (rp.profile(r2) - rp.profile(r1)) / (rp.profile(r3) - rp.profile(r1));
    double bound = bound_ratio + xi;

    StrategyContext ctx;
    ctx.dim = dim;
    ctx.prm = prm;
    ctx.eps = eps;
    ctx.dom = &dom;
    ctx.data = data;
    ctx.quad = quad_from_cfg(cfg, dim, 2, dim == 2 ? 8 : 4);
    ctx.search = search_from_cfg(cfg, dim, dim == 2 ? 32 : 16, {1.0});
    // The barrier is radial: hand the greedy search its exact gradient line.
    ctx.data_hint = [](const Vec& x) { return std::vector<Vec>{x, -x}; };

    std::string pull_kind = ensure(cfg, "pull_strategy", "greedy-min").get<std::string>();
    Strategy puller = strategy_from_json(json(pull_kind), ctx);

    double exit_radius = r3 - eps;
    auto exited = [exit_radius](const Trajectory& tr) {
        return tr.positions.back().norm() > exit_radius;
    };

    JobResult job;
    Csv csv({"adversary", "exit_prob", "std_error", "bound_ratio", "xi", "passed", "unterminated_fraction"});
    json rows = json::array();
    for (const auto& adv_spec : ensure(cfg, "adversaries", json::array({"zero", "greedy-max"}))) {
        Strategy adv = strategy_from_json(adv_spec, ctx);
        ProbEstimate pe = mc_probability(x0, adv, puller, dom, data, prm, eps, n_runs, seed, cap, exited);
        bool passed = pe.prob <= bound;
        csv.row({adv.name, fmt(pe.prob), fmt(pe.std_error), fmt(bound_ratio), fmt(xi),
                 passed ? "1" : "0", fmt(pe.unterminated_fraction)});
        rows.push_back(json{{"adversary", adv.name},
                            {"exit_prob", pe.prob},
                            {"std_error", pe.std_error},
                            {"unterminated_fraction", pe.unterminated_fraction}});
        crit.add("exit probability <= " + fmt(bound) + " vs " + adv.name, passed, pe.prob);
        crit.add("unterminated fraction <= 0.01 vs " + adv.name, pe.unterminated_fraction <= 0.01,
                 pe.unterminated_fraction);
    }
    job.csv_files["annulus.csv"] = csv.str();

    // Limit table for the exit-bound ratio: R3 -> inf at fixed (R1, R2), and
    // the (M R1, M^2 R1) scaling. Reported, never asserted.
    Csv lim({"case", "R1", "R2", "R3", "ratio", "analytic_limit"});
    double lim_a = prm.p < dim ? 1.0 - std::pow(r2 / r1, (prm.p - dim) / (prm.p - 1.0)) : 0.0;
    for (double scale : {1.0, 10.0, 100.0}) {
        double rr3 = scale == 1.0 ? r3 : scale * r2;
        double ratio = (rp.profile(r2) - rp.profile(r1)) / (rp.profile(rr3) - rp.profile(r1));
        lim.row({"R3-to-inf", fmt(r1), fmt(r2), fmt(rr3), fmt(ratio), fmt(lim_a)});
    }
    double lim_b = prm.p == double(dim) ? 0.5 : (prm.p > dim ? 0.0 : std::numeric_limits<double>::quiet_NaN());
    for (double m : {2.0, 5.0, 10.0, 50.0}) {
        double ratio = (rp.profile(m * r1) - rp.profile(r1)) / (rp.profile(m * m * r1) - rp.profile(r1));
        lim.row({"M-scaling", fmt(r1), fmt(m * r1), fmt(m * m * r1), fmt(ratio), fmt(lim_b)});
    }
    job.csv_files["exit_bound_limits.csv"] = lim.str();

    job.manifest["results"] =
        json{{"bound_ratio", bound_ratio}, {"bound", bound}, {"pull_strategy", puller.name}, {"rows", rows}};
    return job;
}

// ---------------------------------------------------------------------------

JobResult job_regularity(json& cfg, Criteria& crit) {
    Params prm = params_from_json(cfg.at("params"));
    int dim = prm.n;
    Domain dom = domain_from_json(cfg.at("domain"));
    if (dom.dim() != dim) throw ConfigError("domain dimension does not match params.n");
    if (dom.kind() != Domain::Kind::Ball && dom.kind() != Domain::Kind::BallWithCorkscrew)
        throw ConfigError("regularity: domain must be a ball or ball-with-corkscrew");

    Vec x0 = Vec::from(cfg.at("x0").get<std::vector<double>>());
    double eta = ensure(cfg, "eta", 0.1).get<double>();
    double r3 = ensure(cfg, "R3", 8.0).get<double>();
    long n_runs = ensure(cfg, "n_runs", 2000L).get<long>();
    long cap = ensure(cfg, "cap", 200000L).get<long>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    auto deltas = cfg.at("delta_list").get<std::vector<double>>();
    auto delta_hats = cfg.at("delta_hat_list").get<std::vector<double>>();
    auto eps_list = cfg.at("eps_list").get<std::vector<double>>();

    double mu = dom.kind() == Domain::Kind::BallWithCorkscrew ? dom.corkscrew_mu() : 0.5;
    double r2 = 2.0 / mu;
    double ball_r = dom.bounding_box().max_extent() / 2.0;
    if (std::abs(x0.norm() - ball_r) > 1e-9 * ball_r)
        throw ConfigError("regularity: x0 must lie on the outer sphere");
    Vec outward = x0.normalized_or_zero();

    // Exterior witness ball of radius mu*s near x0 at scale s.
    auto witness_center = [&](double s) -> Vec {
        if (dom.kind() == Domain::Kind::Ball) return x0 + (mu * s) * outward;  // tangent exterior ball
        auto w = dom.witness_near_scale(s);
        if (!w)
            throw ConstructionError("regularity: no corkscrew witness ball near scale " + fmt(s));
        return w->center;
    };

    DataFnPtr data = data_function_from_json(
        ensure(cfg, "data", json{{"kind", "boundary-dip"}, {"x0", cfg.at("x0")}}), dim);

    JobResult job;
    Csv csv({"delta", "delta_hat", "eps", "start_offset", "adversary", "prob_in_delta", "std_error",
             "target", "met", "unterminated_fraction"});
    json rows = json::array();

    RadialPHarmonic rp{prm.p, dim};
    double theta0 =
        (rp.profile(r2) - rp.profile(1.0)) / (rp.profile(r3) - rp.profile(1.0)) + 0.05;
    int m = theta0 < 1.0 ? std::max(1, (int)std::ceil(std::log(eta) / std::log(theta0))) : 4;
    m = std::min(m, 6);

    for (double delta : deltas) {
        // Concentric stage balls delta_1 < ... < delta_m = delta; each stage
        // pulls toward the witness ball at its own scale.
        std::vector<double> stage_radii(m);
        for (int k = 0; k < m; ++k) stage_radii[k] = delta / double(1 << (m - 1 - k));
        std::vector<Strategy> stages;
        json stage_info = json::array();
        for (int k = 0; k < m; ++k) {
            double r = stage_radii[k] / (2.0 * r3);
            double s = stage_radii[k] / (mu * r3);
            Vec y0 = witness_center(s);
            stage_info.push_back(json{{"stage", k + 1},
                                      {"ball", stage_radii[k]},
                                      {"scale_r", r},
                                      {"annulus_radii", {r * 1.0, r * r2, r * r3}},
                                      {"witness_center", y0.to_std()}});
            Vec c = y0;
            double sgn = -(1.0 - kSigmaMargin);
            stages.push_back(Strategy{"pull-witness-" + std::to_string(k + 1),
                                      [c, sgn](const History& h) {
                                          return sgn * (h.current() - c).normalized_or_zero();
                                      }});
        }
        Strategy puller = concatenated_strategy(stages, stage_radii, x0);
        rows.push_back(json{{"delta", delta}, {"stages", stage_info}, {"m", m}, {"theta0", theta0}});

        for (double dh : delta_hats) {
            if (dh >= delta) continue;
            for (double eps : eps_list) {
                for (double t : {0.0, 0.5, 1.0}) {
                    Vec start = x0 - (t * dh) * outward;
                    for (const auto& adv_spec : ensure(cfg, "adversaries", json::array({"zero"}))) {
                        StrategyContext ctx;
                        ctx.dim = dim;
                        ctx.prm = prm;
                        ctx.eps = eps;
                        ctx.dom = &dom;
                        ctx.data = data;
                        ctx.quad = quad_from_cfg(cfg, dim, 3, dim == 2 ? 8 : 6);
                        ctx.search = search_from_cfg(cfg, dim, dim == 2 ? 16 : 32, {1.0});
                        Strategy adv = strategy_from_json(adv_spec, ctx);
                        auto near_x0 = [&x0, delta](const Trajectory& tr) {
                            return (tr.positions.back() - x0).norm() < delta;
                        };
                        ProbEstimate pe = mc_probability(start, adv, puller, dom, data, prm, eps,
                                                         n_runs, seed, cap, near_x0);
                        bool met = pe.prob >= 1.0 - eta;
                        csv.row({fmt(delta), fmt(dh), fmt(eps), fmt(t), adv.name, fmt(pe.prob),
                                 fmt(pe.std_error), fmt(1.0 - eta), met ? "1" : "0",
                                 fmt(pe.unterminated_fraction)});
                        crit.info("P(stop in B(x0," + fmt(delta) + ")) >= " + fmt(1.0 - eta) +
                                      " at eps=" + fmt(eps) + ", start offset " + fmt(t * dh),
                                  json{{"prob", pe.prob}, {"met", met}});
                    }
                }
            }
        }
    }
    job.csv_files["regularity.csv"] = csv.str();
    job.manifest["results"] = json{{"mu", mu}, {"R2", r2}, {"R3", r3}, {"stages", rows}};
    return job;
}

// ---------------------------------------------------------------------------

JobResult job_crosscheck(json& cfg, Criteria& crit) {
    Params prm = params_from_json(cfg.at("params"));
    Domain dom = domain_from_json(cfg.at("domain"));
    if (dom.dim() != prm.n) throw ConfigError("domain dimension does not match params.n");
    DataFnPtr data = data_function_from_json(cfg.at("data"), prm.n);
    double eps = cfg.at("eps").get<double>();
    long n_runs = ensure(cfg, "n_runs", 10000L).get<long>();
    long cap = ensure(cfg, "cap", 100000L).get<long>();
    double tol_disc = cfg.at("tol_disc").get<double>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    check_interior_probe(dom, prm, eps);
    SolverConfig sc = solver_from_cfg(cfg, eps);
    auto [field_solved, info] = solve_dpp(data, dom, sc, prm);
    crit.add("solver converged", info.converged, info.iterations);
    auto solved = std::make_shared<const GridField>(std::move(field_solved));

    StrategyContext ctx;
    ctx.dim = prm.n;
    ctx.prm = prm;
    ctx.eps = eps;
    ctx.dom = &dom;
    ctx.data = data;
    ctx.solved = solved;
    ctx.quad = quad_from_cfg(cfg, prm.n, 3, 8);
    ctx.search = search_from_cfg(cfg, prm.n, prm.n == 2 ? 32 : 64, {1.0});

    json pairings = ensure(cfg, "pairings", json::array({json::array({"greedy-max", "greedy-min"}),
                                                         json::array({"greedy-max", "zero"}),
                                                         json::array({"zero", "greedy-min"})}));

    JobResult job;
    Csv csv({"pairing", "x0", "mc_mean", "std_error", "u_eps", "diff", "tolerance", "passed",
             "unterminated_fraction"});
    json rows = json::array();
    for (const auto& pairing : pairings) {
        Strategy smax = strategy_from_json(pairing[0], ctx);
        Strategy smin = strategy_from_json(pairing[1], ctx);
        std::string pname = smax.name + "|" + smin.name;
        bool max_greedy = pairing[0].is_string() && pairing[0].get<std::string>() == "greedy-max";
        bool min_greedy = pairing[1].is_string() && pairing[1].get<std::string>() == "greedy-min";
        for (const auto& jx : cfg.at("x0_list")) {
            Vec x0 = Vec::from(jx.get<std::vector<double>>());
            double u = solved->eval(dom, x0);
            ValueEstimate est = estimate_value(x0, smax, smin, dom, data, prm, eps, n_runs, seed, cap);
            double tol = 3.0 * est.std_error + tol_disc;
            double diff = est.mean - u;
            bool passed;
            std::string name;
            if (max_greedy && min_greedy) {
                passed = std::abs(diff) <= tol;
                name = "|mc - u_eps| <= 3SE + tol_disc";
            } else if (max_greedy) {
                passed = diff >= -tol;
                name = "mc >= u_eps - (3SE + tol_disc)";
            } else {
                passed = diff <= tol;
                name = "mc <= u_eps + (3SE + tol_disc)";
            }
            bool valid = est.unterminated_fraction <= 0.01;
            crit.add(name + " [" + pname + " at " + jx.dump() + "]", passed && valid,
                     json{{"diff", diff}, {"tol", tol}});
            if (!valid)
                crit.add("report valid (unterminated <= 1%) [" + pname + "]", false,
                         est.unterminated_fraction);
            csv.row({pname, jx.dump(), fmt(est.mean), fmt(est.std_error), fmt(u), fmt(diff), fmt(tol),
                     passed ? "1" : "0", fmt(est.unterminated_fraction)});
            json r = estimate_to_json(est);
            r["pairing"] = pname;
            r["x0"] = jx;
            r["u_eps"] = u;
            rows.push_back(r);
        }
    }
    job.csv_files["crosscheck.csv"] = csv.str();
    job.manifest["results"] = json{{"solver_iterations", info.iterations}, {"rows", rows}};
    return job;
}

}  // namespace

json describe_params(int n, double p, std::optional<double> gamma, std::optional<std::string> branch) {
    Branch b = branch ? branch_from_string(*branch)
                      : (p < n + 4.0 ? Branch::AspectBelowOne : Branch::AspectAboveOne);
    GammaInterval iv = feasible_gamma_interval(n, p, b);
    json jiv;
    if (iv.empty) {
        jiv = json{{"empty", true}};
    } else {
        jiv = json{{"empty", false},
                   {"lo", iv.lo},
                   {"hi", std::isinf(iv.hi) ? json() : json(iv.hi)},
                   {"lo_open", iv.lo_open},
                   {"hi_open", iv.hi_open}};
    }
    Params prm = gamma ? make_params(n, p, *gamma, b) : make_params_default(n, p, b);
    return json{{"params", params_to_json(prm)}, {"feasible_gamma_interval", jiv}};
}

JobResult run_job(const std::string& kind, json config, std::optional<std::uint64_t> seed_override) {
    if (seed_override) config["seed"] = *seed_override;
    ensure(config, "seed", kDefaultSeed);

    Criteria crit;
    JobResult job;
    if (kind == "expansion-check")
        job = job_expansion_check(config, crit);
    else if (kind == "solve-dpp")
        job = job_solve_dpp(config, crit);
    else if (kind == "convergence")
        job = job_convergence(config, crit);
    else if (kind == "simulate")
        job = job_simulate(config, crit);
    else if (kind == "annulus")
        job = job_annulus(config, crit);
    else if (kind == "regularity")
        job = job_regularity(config, crit);
    else if (kind == "crosscheck")
        job = job_crosscheck(config, crit);
    else
        throw ConfigError("unknown experiment kind '" + kind + "'");

    job.manifest["tool"] = "ellip-tow";
    job.manifest["kind"] = kind;
    job.manifest["seed"] = config["seed"];
    job.manifest["config"] = config;
    job.manifest["criteria"] = crit.list;
    json outputs = json::array();
    for (const auto& [name, _] : job.csv_files) outputs.push_back(name);
    job.manifest["outputs"] = outputs;
    job.all_passed = crit.all_passed;
    job.manifest["all_passed"] = crit.all_passed;
    return job;
}

void write_job(const JobResult& job, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto write_atomic = [&](const std::string& name, const std::string& contents) {
        fs::path final_path = fs::path(out_dir) / name;
        fs::path tmp = final_path;
        tmp += ".tmp";
        {
            std::ofstream os(tmp, std::ios::binary);
            os << contents;
        }
        fs::rename(tmp, final_path);
    };
    write_atomic("manifest.json", job.manifest.dump(2) + "\n");
    for (const auto& [name, contents] : job.csv_files) write_atomic(name, contents);
}

}  // namespace elliptow
