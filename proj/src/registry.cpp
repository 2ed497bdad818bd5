#include "elliptow/registry.hpp"

#include <algorithm>
#include <cmath>

#include "elliptow/error.hpp"

namespace elliptow {

namespace {

Vec vec_from_json(const json& j, int dim = -1) {
    if (!j.is_array()) throw ConfigError("expected an array for a point/vector");
    Vec v(static_cast<int>(j.size()));
    for (int i = 0; i < v.dim(); ++i) v[i] = j[i].get<double>();
    if (dim >= 0 && v.dim() != dim) throw ConfigError("vector has wrong dimension");
    return v;
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double RadialPHarmonic::profile(double t) const {
    if (p == double(n)) return std::log(t);
    double beta = (p - n) / (p - 1.0);
    double s = sgn(p - n);
    // Exact special cases double as fast paths for the hot Monte Carlo loops.
    if (beta == -1.0) return s / t;
    if (beta == 0.5) return s * std::sqrt(t);
    if (beta == 1.0) return s * t;
    return s * std::pow(t, beta);
}

double RadialPHarmonic::dprofile(double t) const {
    if (p == double(n)) return 1.0 / t;
    double beta = (p - n) / (p - 1.0);
    return sgn(p - n) * beta * std::pow(t, beta - 1.0);
}

double RadialPHarmonic::d2profile(double t) const {
    if (p == double(n)) return -1.0 / (t * t);
    double beta = (p - n) / (p - 1.0);
    return sgn(p - n) * beta * (beta - 1.0) * std::pow(t, beta - 2.0);
}

SmoothTestFunction RadialPHarmonic::lift(const Vec& center) const {
    RadialPHarmonic rp = *this;
    Vec c = center;
    SmoothTestFunction f;
    f.name = "radial-pharmonic";
    f.value = [rp, c](const Vec& x) { return rp.profile((x - c).norm()); };
    f.gradient = [rp, c](const Vec& x) {
        Vec d = x - c;
        double t = d.norm();
        return (rp.dprofile(t) / t) * d;
    };
    f.hessian = [rp, c](const Vec& x) {
        Vec d = x - c;
        double t = d.norm();
        Vec u = (1.0 / t) * d;
        double v1 = rp.dprofile(t), v2 = rp.d2profile(t);
        SymMat h(x.dim());
        for (int i = 0; i < x.dim(); ++i)
            for (int j = 0; j < x.dim(); ++j) {
                double uij = u[i] * u[j];
                h(i, j) = v2 * uij + v1 / t * ((i == j ? 1.0 : 0.0) - uij);
            }
        return h;
    };
    return f;
}

DataFnPtr RadialPHarmonic::data(const Vec& center, double t_lo, double t_hi) const {
    if (!(0.0 < t_lo && t_lo < t_hi))
        throw ConfigError("radial-pharmonic data: need 0 < t_lo < t_hi clamp radii");
    RadialPHarmonic rp = *this;
    Vec c = center;
    return make_data_fn("radial-pharmonic", [rp, c, t_lo, t_hi](const Vec& x) {
        return rp.profile(std::clamp((x - c).norm(), t_lo, t_hi));
    });
}

Params params_from_json(const json& spec) {
    int n = spec.at("n").get<int>();
    double p = spec.at("p").get<double>();
    Branch b = spec.contains("branch") ? branch_from_string(spec["branch"].get<std::string>())
                                       : (p < n + 4.0 ? Branch::AspectBelowOne : Branch::AspectAboveOne);
    if (spec.contains("gamma")) return make_params(n, p, spec["gamma"].get<double>(), b);
    return make_params_default(n, p, b);
}

json params_to_json(const Params& prm) {
    return json{{"n", prm.n},
                {"p", prm.p},
                {"gamma", prm.gamma},
                {"a", prm.a},
                {"branch", to_string(prm.branch)},
                {"compat_residual", prm.compat_residual()},
                {"terminates", prm.satisfies_termination()}};
}

Domain domain_from_json(const json& spec) {
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "ball") return Domain::ball(vec_from_json(spec.at("center")), spec.at("radius").get<double>());
    if (kind == "annulus")
        return Domain::annulus(vec_from_json(spec.at("center")), spec.at("r_inner").get<double>(),
                               spec.at("r_outer").get<double>());
    if (kind == "box")
        return Domain::box(BBox{vec_from_json(spec.at("lo")), vec_from_json(spec.at("hi"))});
    if (kind == "ball-with-corkscrew")
        return Domain::ball_with_corkscrew(spec.at("radius").get<double>(), spec.at("mu").get<double>(),
                                           vec_from_json(spec.at("boundary_point")),
                                           spec.at("depth_scales").get<std::vector<double>>());
    throw ConfigError("unknown domain kind '" + kind + "'");
}

DataFnPtr data_function_from_json(const json& spec, int dim) {
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "constant") {
        double c = spec.at("value").get<double>();
        return make_data_fn("constant", [c](const Vec&) { return c; });
    }
    if (kind == "linear") {
        Vec b = vec_from_json(spec.at("coeffs"), dim);
        double c = spec.value("offset", 0.0);
        return make_data_fn("linear", [b, c](const Vec& x) { return dot(b, x) + c; });
    }
    if (kind == "radial-pharmonic") {
        RadialPHarmonic rp{spec.at("p").get<double>(), dim};
        Vec center = spec.contains("center") ? vec_from_json(spec["center"], dim) : Vec(dim);
        double t_lo = spec.at("clamp_lo").get<double>();
        double t_hi = spec.at("clamp_hi").get<double>();
        return rp.data(center, t_lo, t_hi);
    }
    if (kind == "boundary-dip") {
        // F(x) = -min{1, |x - x0|}: the probe data of the game-regularity test.
        Vec x0 = vec_from_json(spec.at("x0"), dim);
        return make_data_fn("boundary-dip",
                            [x0](const Vec& x) { return -std::min(1.0, (x - x0).norm()); });
    }
    throw ConfigError("unknown data function '" + kind + "'");
}

SmoothTestFunction test_function_from_json(const json& spec, int dim) {
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "norm-squared") {
        SmoothTestFunction f;
        f.name = "norm-squared";
        f.value = [](const Vec& x) { return x.norm2(); };
        f.gradient = [](const Vec& x) { return 2.0 * x; };
        f.hessian = [dim](const Vec&) {
            SymMat h(dim);
            for (int i = 0; i < dim; ++i) h(i, i) = 2.0;
            return h;
        };
        return f;
    }
    if (kind == "linear") {
        Vec b = vec_from_json(spec.at("coeffs"), dim);
        double c = spec.value("offset", 0.0);
        SmoothTestFunction f;
        f.name = "linear";
        f.value = [b, c](const Vec& x) { return dot(b, x) + c; };
        f.gradient = [b](const Vec&) { return b; };
        f.hessian = [dim](const Vec&) { return SymMat(dim); };
        return f;
    }
    if (kind == "quadratic") {
        // f = 0.5 <A x, x> + <b, x> + c with symmetric A given row-major.
        auto rows = spec.at("matrix");
        SymMat a(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) = rows[i][j].get<double>();
        Vec b = spec.contains("coeffs") ? vec_from_json(spec["coeffs"], dim) : Vec(dim);
        double c = spec.value("offset", 0.0);
        SmoothTestFunction f;
        f.name = "quadratic";
        f.value = [a, b, c](const Vec& x) { return 0.5 * dot(a.apply(x), x) + dot(b, x) + c; };
        f.gradient = [a, b](const Vec& x) { return a.apply(x) + b; };
        f.hessian = [a](const Vec&) { return a; };
        return f;
    }
    if (kind == "radial-pharmonic") {
        RadialPHarmonic rp{spec.at("p").get<double>(), dim};
        Vec center = spec.contains("center") ? vec_from_json(spec["center"], dim) : Vec(dim);
        return rp.lift(center);
    }
    throw ConfigError("unknown test function '" + kind + "'");
}

Strategy strategy_from_json(const json& spec, const StrategyContext& ctx) {
    std::string kind = spec.is_string() ? spec.get<std::string>() : spec.at("kind").get<std::string>();
    const json detail = spec.is_object() ? spec : json::object();

    if (kind == "zero") {
        int dim = ctx.dim;
        return Strategy{"zero", [dim](const History&) { return Vec(dim); }};
    }
    if (kind == "radial-pull" || kind == "radial-push") {
        Vec c = detail.contains("center") ? vec_from_json(detail["center"], ctx.dim) : Vec(ctx.dim);
        double s = (kind == "radial-pull" ? -1.0 : 1.0) * (1.0 - kSigmaMargin);
        return Strategy{kind, [c, s](const History& h) {
                            return s * (h.current() - c).normalized_or_zero();
                        }};
    }
    if (kind == "greedy-min" || kind == "greedy-max") {
        GreedyMode mode = kind == "greedy-min" ? GreedyMode::Minimize : GreedyMode::Maximize;
        std::string field = detail.value("field", ctx.solved ? "solved" : "data");
        if (field == "solved") {
            if (!ctx.solved || !ctx.dom)
                throw ConfigError("strategy '" + kind + "': no solved field in this run");
            return greedy_strategy(ctx.solved, *ctx.dom, ctx.prm, ctx.eps, mode, ctx.search, ctx.quad);
        }
        if (!ctx.data) throw ConfigError("strategy '" + kind + "': no data function in this run");
        DataFnPtr data = ctx.data;
        return greedy_strategy_fn(kind + "(data)", [data](const Vec& x) { return data->value(x); },
                                  ctx.prm, ctx.eps, mode, ctx.search, ctx.quad, ctx.data_hint);
    }
    if (kind == "concatenated") {
        Vec center = vec_from_json(detail.at("center"), ctx.dim);
        std::vector<double> radii = detail.at("balls").get<std::vector<double>>();
        std::vector<Strategy> inner;
        for (const auto& s : detail.at("inner")) inner.push_back(strategy_from_json(s, ctx));
        return concatenated_strategy(std::move(inner), std::move(radii), center);
    }
    throw ConfigError("unknown strategy '" + kind + "'");
}

}  // namespace elliptow
