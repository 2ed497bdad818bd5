#pragma once

#include <optional>
#include <string>

#include "elliptow/error.hpp"

namespace elliptow {

/// Which of the two admissible regimes of the termination condition the
/// scaling pair (gamma, a) lives in. DegenerateAspectZero fixes a = 0; it is
/// valid for averaging and the grid solver but rejected by the game engine.
enum class Branch {
    AspectBelowOne,
    AspectAboveOne,
    DegenerateAspectZero,
};

std::string to_string(Branch b);
Branch branch_from_string(const std::string& s);

/// Feasible range for the stochastic radius factor gamma at fixed (N, p).
/// Endpoints follow the strictness of the defining inequalities; hi may be
/// +infinity.
struct GammaInterval {
    bool empty = true;
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = true;
    bool hi_open = true;

    bool contains(double g) const {
        if (empty) return false;
        if (lo_open ? (g <= lo) : (g < lo)) return false;
        if (hi_open ? (g >= hi) : (g > hi)) return false;
        return true;
    }
    /// Distance from g to the closure of the interval (0 if inside).
    double distance(double g) const;
};

/// Scaling factors tying the game geometry to the exponent p:
/// (N+2)/gamma^2 + a^2 = p-1, with a termination-viability branch.
struct Params {
    int n = 2;           // space dimension, >= 2
    double p = 2.0;      // exponent in (1, inf)
    double gamma = 0.0;  // stochastic radius factor, > 0
    double a = 0.0;      // boundary aspect ratio, >= 0
    Branch branch = Branch::AspectBelowOne;

    double max_aspect() const { return a > 1.0 ? a : 1.0; }
    /// Radius of the full sampling footprint around a point, in units of the
    /// step epsilon: deterministic shift 1 plus stochastic reach gamma*max(a,1).
    double footprint_factor() const { return 1.0 + gamma * max_aspect(); }
    double compat_residual() const { return (n + 2) / (gamma * gamma) + a * a - (p - 1.0); }
    /// (a <= 1 and gamma*a > 1) or (a >= 1 and gamma > 1).
    bool satisfies_termination() const;
};

/// Feasible gamma range for the requested branch. Empty when the branch is
/// not viable at (N, p): AspectBelowOne needs p < N+4, AspectAboveOne needs
/// p > 2. DegenerateAspectZero returns the single admissible point.
GammaInterval feasible_gamma_interval(int n, double p, Branch branch);

/// Deterministic default gamma: midpoint of the feasible interval clipped to
/// [lo + 0.05, lo + 10]. Throws FeasibilityError when the branch is not viable.
double default_gamma(int n, double p, Branch branch);

/// Builds Params with a = sqrt(p - 1 - (N+2)/gamma^2) and validates the branch
/// conditions. For DegenerateAspectZero, gamma is ignored and recomputed as
/// sqrt((N+2)/(p-1)). Throws FeasibilityError naming the violated inequality.
Params make_params(int n, double p, double gamma, Branch branch);

/// make_params with the default gamma for the branch.
Params make_params_default(int n, double p, Branch branch);

}  // namespace elliptow
