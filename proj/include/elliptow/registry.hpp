#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "elliptow/averaging.hpp"
#include "elliptow/game.hpp"
#include "elliptow/geometry.hpp"
#include "elliptow/grid_field.hpp"
#include "elliptow/scaling.hpp"

namespace elliptow {

using json = nlohmann::json;

/// Radial profile v with p-harmonic lift x -> v(|x - center|):
/// v(t) = sgn(p-N) t^{(p-N)/(p-1)} for p != N, log t for p = N. Strictly
/// increasing; the lift solves the p-harmonic equation away from the center.
struct RadialPHarmonic {
    double p = 2.0;
    int n = 2;

    double profile(double t) const;
    double dprofile(double t) const;
    double d2profile(double t) const;

    /// Smooth oracle for x -> v(|x - center|) (singular at the center).
    SmoothTestFunction lift(const Vec& center) const;

    /// Bounded continuous data function: v(clamp(|x - center|, t_lo, t_hi)).
    DataFnPtr data(const Vec& center, double t_lo, double t_hi) const;
};

/// --- JSON-keyed registries -------------------------------------------------
/// Experiments reference domains, data functions, test functions and
/// strategies by name so run configs stay declarative and diffable.

Params params_from_json(const json& spec);
json params_to_json(const Params& prm);

Domain domain_from_json(const json& spec);

DataFnPtr data_function_from_json(const json& spec, int dim);

SmoothTestFunction test_function_from_json(const json& spec, int dim);

/// Context a strategy spec may draw on: the run's scaling/step, the analytic
/// data function, and an optional solved field.
struct StrategyContext {
    int dim = 2;
    Params prm;
    double eps = 0.1;
    const Domain* dom = nullptr;
    DataFnPtr data;
    std::shared_ptr<const GridField> solved;
    SearchRule search;
    QuadratureRule quad;
    HintDirections data_hint;  // analytic extremal directions for greedy-on-data
};

/// Registry names: zero | radial-pull | radial-push | greedy-min | greedy-max
/// | concatenated. Greedy strategies act on the solved field when
/// {"field":"solved"}, otherwise on the analytic data function.
Strategy strategy_from_json(const json& spec, const StrategyContext& ctx);

}  // namespace elliptow
