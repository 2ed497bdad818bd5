#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "elliptow/dpp.hpp"
#include "elliptow/geometry.hpp"
#include "elliptow/grid_field.hpp"
#include "elliptow/quadrature.hpp"
#include "elliptow/scaling.hpp"

namespace elliptow {

/// Strategies map into the open unit ball; built-ins stay this far inside.
inline constexpr double kSigmaMargin = 1e-6;

/// Per-step randomness record: noise vector w in B(0,1), coin s in {1,2},
/// stopping threshold t in (0,1).
struct StepRecord {
    Vec noise;
    int coin = 1;
    double threshold = 0.0;
};

/// History prefix visible to a strategy deciding the next move: positions
/// x_i..x_n and the step records that produced x_{i+1}..x_n (one fewer).
struct History {
    std::span<const Vec> positions;
    std::span<const StepRecord> steps;

    const Vec& current() const { return positions.back(); }
    long step_index() const { return static_cast<long>(positions.size()) - 1; }
    History suffix_from(std::size_t i) const {
        return History{positions.subspan(i), steps.subspan(i)};
    }
};

/// Player decision rule; decide must be pure and return |sigma| <= 1 - margin.
struct Strategy {
    std::string name;
    std::function<Vec(const History&)> decide;
};

/// One realized game path. positions = x_0..x_{tau-1}; steps are the draws
/// 1..tau (the tau-th triggered the stop). Unterminated paths (step cap hit)
/// carry no payoff.
struct Trajectory {
    std::vector<Vec> positions;
    std::vector<StepRecord> steps;
    long tau = 0;
    bool terminated = false;
    double payoff = std::numeric_limits<double>::quiet_NaN();
};

/// Deterministic per-run randomness: identical (seed, stream_id) reproduce
/// identical draws bit for bit. Uniform ball sampling uses cube rejection in
/// dimension <= 3 and normalized Gaussians above.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    double uniform01();       // [0, 1)
    double uniform_open01();  // (0, 1)
    int coin();               // 1 or 2, fair
    Vec uniform_ball(int dim);

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::mt19937_64 eng_;
};

/// One move of the process: x + eps*(sigma + gamma*w + gamma*(a-1)<w,sigma>sigma).
/// The noise deformation acts along the mover's own shift direction. Kept
/// out of line so replayed trajectories recompute bit for bit through the
/// same instruction sequence.
[[gnu::noinline]] Vec game_step(const Vec& x_prev, const Vec& sigma, const Vec& w, const Params& prm,
                                double eps);

/// Scales a decision into the margin ball when it pokes out; play() applies
/// this to every strategy output, so a recorded step recomputes as
/// game_step(x, clamp_shift(decide(history)), w).
[[gnu::noinline]] Vec clamp_shift(const Vec& sigma);

/// Runs one game from x0: each step draws (w, s, t), stops at the first
/// t > d_eps(previous position), otherwise advances by the coin winner's
/// strategy. Payoff is F at the pre-stop position. Rejects parameter sets
/// that do not guarantee almost-sure termination.
Trajectory play(const Vec& x0, const Strategy& player_max, const Strategy& player_min,
                const Domain& dom, const DataFnPtr& data, const Params& prm, double eps,
                RngStream& rng, long cap);

enum class GreedyMode { Minimize, Maximize };

/// Extra search directions a greedy strategy should always try at a given
/// position (e.g. the analytic gradient line, where the extrema sit).
using HintDirections = std::function<std::vector<Vec>(const Vec&)>;

/// Near-optimal position-only strategy: picks the search-grid shift z
/// extremizing the sampled ellipsoid average of the value oracle at x + eps*z,
/// scaled into the open ball. Deterministic first-hit tie-break.
Strategy greedy_strategy_fn(std::string name, PointFn value_oracle, const Params& prm, double eps,
                            GreedyMode mode, const SearchRule& search, const QuadratureRule& quad,
                            HintDirections hint = nullptr);

/// Greedy on a solved grid field (evaluated with its boundary fallback).
/// Throws ConfigError when the field's solve provenance does not match
/// (dom, prm, eps).
Strategy greedy_strategy(std::shared_ptr<const GridField> field, const Domain& dom,
                         const Params& prm, double eps, GreedyMode mode, const SearchRule& search,
                         const QuadratureRule& quad);

/// Dispatches to strategies[k+1] once the history shows the token has left
/// ball k (largest exited ball governs), re-rooting the history at the first
/// exit step. radii must be strictly increasing, one per strategy.
Strategy concatenated_strategy(std::vector<Strategy> strategies, std::vector<double> ball_radii,
                               const Vec& center);

struct ValueEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double unterminated_fraction = 0.0;
    long n_used = 0;
    long n_runs = 0;
};

/// Monte Carlo game value over independent streams (seed, 0..n_runs-1).
/// Unterminated runs are excluded and reported; all-unterminated raises
/// EstimationError. Runs execute in parallel; the reduction is a fixed-shape
/// pairwise sum, so results do not depend on thread count.
ValueEstimate estimate_value(const Vec& x0, const Strategy& player_max, const Strategy& player_min,
                             const Domain& dom, const DataFnPtr& data, const Params& prm, double eps,
                             long n_runs, std::uint64_t seed, long cap);

/// Fixed-shape pairwise summation.
double pairwise_sum(std::span<const double> xs);

}  // namespace elliptow
