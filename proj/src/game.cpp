#include "elliptow/game.hpp"

#include <algorithm>
#include <cmath>

#include "elliptow/averaging.hpp"
#include "elliptow/error.hpp"

namespace elliptow {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Vec clamp_shift(const Vec& z) {
    double n = z.norm();
    double cap = 1.0 - kSigmaMargin;
    if (n <= cap || n == 0.0) return z;
    return (cap / n) * z;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id), eng_(splitmix64(seed ^ splitmix64(stream_id * 0x9e3779b97f4a7c15ULL + 1))) {}

double RngStream::uniform01() { return (eng_() >> 11) * 0x1.0p-53; }

double RngStream::uniform_open01() { return ((eng_() >> 11) + 0.5) * 0x1.0p-53; }

int RngStream::coin() { return (eng_() & 1) ? 1 : 2; }

Vec RngStream::uniform_ball(int dim) {
    Vec w(dim);
    if (dim <= 3) {
        do {
            for (int i = 0; i < dim; ++i) w[i] = 2.0 * uniform01() - 1.0;
        } while (w.norm2() >= 1.0);
        return w;
    }
    double n2;
    do {
        for (int i = 0; i < dim; ++i) {
            double u1 = std::max(uniform01(), 1e-300), u2 = uniform01();
            w[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        }
        n2 = w.norm2();
    } while (n2 == 0.0);
    double r = std::pow(uniform01(), 1.0 / dim);
    return (r / std::sqrt(n2)) * w;
}

Vec game_step(const Vec& x_prev, const Vec& sigma, const Vec& w, const Params& prm, double eps) {
    double ws = dot(w, sigma);
    Vec x = x_prev;
    for (int i = 0; i < x.dim(); ++i)
        x[i] += eps * (sigma[i] + prm.gamma * w[i] + prm.gamma * (prm.a - 1.0) * ws * sigma[i]);
    return x;
}

Trajectory play(const Vec& x0, const Strategy& player_max, const Strategy& player_min,
                const Domain& dom, const DataFnPtr& data, const Params& prm, double eps,
                RngStream& rng, long cap) {
    if (prm.branch == Branch::DegenerateAspectZero)
        throw ConfigError("play: DegenerateAspectZero scaling is unsupported for the game "
                          "(termination condition fails at a = 0)");
    if (!prm.satisfies_termination())
        throw ConfigError("play: scaling factors violate the termination condition "
                          "(need a<=1 with gamma*a>1, or a>=1 with gamma>1)");
    if (cap < 1) throw ParamError("play: cap must be >= 1");
    if (!data) throw ParamError("play: data function required");

    Trajectory tr;
    tr.positions.push_back(x0);
    tr.steps.reserve(64);

    for (long n = 1; n <= cap; ++n) {
        const Vec& x_prev = tr.positions.back();
        double d = scaled_distance(dom, x_prev, eps);

        StepRecord rec;
        rec.noise = rng.uniform_ball(x0.dim());
        rec.coin = rng.coin();
        rec.threshold = rng.uniform_open01();
        tr.steps.push_back(rec);

        if (rec.threshold > d) {
            tr.tau = n;
            tr.terminated = true;
            tr.payoff = data->value(x_prev);
            return tr;
        }

        History h{std::span<const Vec>(tr.positions),
                  std::span<const StepRecord>(tr.steps.data(), tr.steps.size() - 1)};
        const Strategy& acting = rec.coin == 1 ? player_max : player_min;
        Vec sigma = clamp_shift(acting.decide(h));
        tr.positions.push_back(game_step(x_prev, sigma, rec.noise, prm, eps));
    }
    tr.terminated = false;
    tr.tau = cap;
    return tr;
}

Strategy greedy_strategy_fn(std::string name, PointFn value_oracle, const Params& prm, double eps,
                            GreedyMode mode, const SearchRule& search, const QuadratureRule& quad,
                            HintDirections hint) {
    if (search.candidate_count() == 0) throw ConfigError("greedy strategy: empty search rule");
    auto decide = [value_oracle, prm, eps, mode, search, quad, hint](const History& h) {
        const Vec& x = h.current();
        bool first = true;
        double best = 0.0;
        Vec best_z(x.dim());
        auto consider = [&](const Vec& z) {
            double v = sampled_average(value_oracle, x + eps * z, x, eps, prm, quad);
            bool better = mode == GreedyMode::Minimize ? v < best : v > best;
            if (first || better) {
                best = v;
                best_z = z;
                first = false;
            }
        };
        if (search.include_center) consider(Vec(x.dim()));
        for (const Vec& d : search.directions)
            for (double t : search.radial_levels) consider(t * d);
        if (hint) {
            for (const Vec& d : hint(x)) {
                Vec dn = d.normalized_or_zero();
                if (dn.norm2() == 0.0) continue;
                for (double t : search.radial_levels) consider(t * dn);
            }
        }
        return clamp_shift(best_z);
    };
    return Strategy{std::move(name), std::move(decide)};
}

Strategy greedy_strategy(std::shared_ptr<const GridField> field, const Domain& dom,
                         const Params& prm, double eps, GreedyMode mode, const SearchRule& search,
                         const QuadratureRule& quad) {
    if (!field) throw ConfigError("greedy strategy: null field");
    if (!field->eps || std::abs(*field->eps - eps) > 1e-12 * eps)
        throw ConfigError("greedy strategy: field was not solved at this eps");
    if (!field->params || field->params->n != prm.n ||
        std::abs(field->params->p - prm.p) > 1e-12 * prm.p ||
        std::abs(field->params->gamma - prm.gamma) > 1e-12 * prm.gamma ||
        std::abs(field->params->a - prm.a) > 1e-12 * (1.0 + prm.a))
        throw ConfigError("greedy strategy: field was solved with different scaling factors");
    Domain dom_copy = dom;
    PointFn oracle = [field, dom_copy](const Vec& x) { return field->eval(dom_copy, x); };
    std::string name = mode == GreedyMode::Minimize ? "greedy-min" : "greedy-max";
    return greedy_strategy_fn(std::move(name), std::move(oracle), prm, eps, mode, search, quad);
}

Strategy concatenated_strategy(std::vector<Strategy> strategies, std::vector<double> ball_radii,
                               const Vec& center) {
    if (strategies.empty() || strategies.size() != ball_radii.size())
        throw ConfigError("concatenated strategy: need equally many strategies and radii");
    for (std::size_t k = 1; k < ball_radii.size(); ++k)
        if (!(ball_radii[k] > ball_radii[k - 1]))
            throw ConfigError("concatenated strategy: radii must be strictly increasing");

    auto strategies_ptr = std::make_shared<std::vector<Strategy>>(std::move(strategies));
    auto radii_ptr = std::make_shared<std::vector<double>>(std::move(ball_radii));
    auto decide = [strategies_ptr, radii_ptr, center](const History& h) {
        const auto& strats = *strategies_ptr;
        const auto& radii = *radii_ptr;
        const std::size_t m = strats.size();
        // Largest ball already exited along the history, capped at m-1 so the
        // last strategy serves every later stage.
        std::size_t k = 0;  // 0 = still inside ball 1
        std::size_t exit_step = 0;
        for (std::size_t kk = m - 1; kk >= 1; --kk) {
            for (std::size_t i = 0; i < h.positions.size(); ++i) {
                if ((h.positions[i] - center).norm() >= radii[kk - 1]) {
                    k = kk;
                    exit_step = i;
                    break;
                }
            }
            if (k > 0 || kk == 1) break;
        }
        if (k == 0) return strats[0].decide(h);
        return strats[k].decide(h.suffix_from(exit_step));
    };
    return Strategy{"concatenated", std::move(decide)};
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

ValueEstimate estimate_value(const Vec& x0, const Strategy& player_max, const Strategy& player_min,
                             const Domain& dom, const DataFnPtr& data, const Params& prm, double eps,
                             long n_runs, std::uint64_t seed, long cap) {
    if (n_runs < 2) throw ParamError("estimate_value: need n_runs >= 2");
    std::vector<double> payoffs(n_runs, 0.0);
    std::vector<char> ok(n_runs, 0);

#pragma omp parallel for schedule(dynamic, 16)
    for (long r = 0; r < n_runs; ++r) {
        RngStream rng(seed, static_cast<std::uint64_t>(r));
        Trajectory tr = play(x0, player_max, player_min, dom, data, prm, eps, rng, cap);
        if (tr.terminated) {
            payoffs[r] = tr.payoff;
            ok[r] = 1;
        }
    }

    std::vector<double> used;
    used.reserve(n_runs);
    for (long r = 0; r < n_runs; ++r)
        if (ok[r]) used.push_back(payoffs[r]);

    ValueEstimate est;
    est.n_runs = n_runs;
    est.n_used = static_cast<long>(used.size());
    est.unterminated_fraction = double(n_runs - est.n_used) / double(n_runs);
    if (used.empty())
        throw EstimationError("estimate_value: every run hit the step cap; no payoff observed");
    est.mean = pairwise_sum(used) / double(used.size());
    if (used.size() >= 2) {
        std::vector<double> sq(used.size());
        for (std::size_t i = 0; i < used.size(); ++i) {
            double d = used[i] - est.mean;
            sq[i] = d * d;
        }
        double var = pairwise_sum(sq) / double(used.size() - 1);
        est.std_error = std::sqrt(var / double(used.size()));
    }
    return est;
}

}  // namespace elliptow
