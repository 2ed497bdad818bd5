#include "elliptow/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace elliptow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-12;

void check_np(int n, double p) {
    if (n < 2) throw ParamError("dimension N must be an integer >= 2, got " + std::to_string(n));
    if (!(p > 1.0) || !std::isfinite(p))
        throw ParamError("exponent p must lie in (1, inf), got " + std::to_string(p));
}
}  // namespace

std::string to_string(Branch b) {
    switch (b) {
        case Branch::AspectBelowOne: return "AspectBelowOne";
        case Branch::AspectAboveOne: return "AspectAboveOne";
        case Branch::DegenerateAspectZero: return "DegenerateAspectZero";
    }
    return "?";
}

Branch branch_from_string(const std::string& s) {
    if (s == "AspectBelowOne" || s == "below") return Branch::AspectBelowOne;
    if (s == "AspectAboveOne" || s == "above") return Branch::AspectAboveOne;
    if (s == "DegenerateAspectZero" || s == "degenerate") return Branch::DegenerateAspectZero;
    throw ParamError("unknown branch '" + s + "'");
}

double GammaInterval::distance(double g) const {
    if (empty) return kInf;
    if (g < lo) return lo - g;
    if (g > hi) return g - hi;
    return 0.0;
}

bool Params::satisfies_termination() const {
    return (a <= 1.0 && gamma * a > 1.0) || (a >= 1.0 && gamma > 1.0);
}

GammaInterval feasible_gamma_interval(int n, double p, Branch branch) {
    check_np(n, p);
    GammaInterval iv;
    switch (branch) {
        case Branch::AspectBelowOne: {
            // (p-2)/(N+2) <= 1/gamma^2 < (p-1)/(N+3); nonempty iff p < N+4.
            if (!(p < n + 4.0)) return iv;
            iv.empty = false;
            iv.lo = std::sqrt((n + 3.0) / (p - 1.0));
            iv.lo_open = true;
            if (p > 2.0) {
                iv.hi = std::sqrt((n + 2.0) / (p - 2.0));
                iv.hi_open = false;
            } else {
                iv.hi = kInf;
                iv.hi_open = true;
            }
            return iv;
        }
        case Branch::AspectAboveOne: {
            // 1/gamma^2 < min{1, (p-2)/(N+2)}; nonempty iff p > 2.
            if (!(p > 2.0)) return iv;
            iv.empty = false;
            iv.lo = std::max(1.0, std::sqrt((n + 2.0) / (p - 2.0)));
            iv.lo_open = true;
            iv.hi = kInf;
            iv.hi_open = true;
            return iv;
        }
        case Branch::DegenerateAspectZero: {
            iv.empty = false;
            iv.lo = iv.hi = std::sqrt((n + 2.0) / (p - 1.0));
            iv.lo_open = iv.hi_open = false;
            return iv;
        }
    }
    return iv;
}

double default_gamma(int n, double p, Branch branch) {
    GammaInterval iv = feasible_gamma_interval(n, p, branch);
    if (iv.empty) {
        std::ostringstream os;
        os << "branch " << to_string(branch) << " is infeasible at N=" << n << ", p=" << p
           << (branch == Branch::AspectBelowOne ? " (requires p < N+4)" : " (requires p > 2)");
        throw FeasibilityError(os.str());
    }
    if (branch == Branch::DegenerateAspectZero) return iv.lo;
    double mid = std::isinf(iv.hi) ? kInf : 0.5 * (iv.lo + iv.hi);
    double g = std::clamp(mid, iv.lo + 0.05, iv.lo + 10.0);
    if (!iv.contains(g)) g = mid;  // pathologically thin interval: plain midpoint
    return g;
}

Params make_params(int n, double p, double gamma, Branch branch) {
    check_np(n, p);
    Params prm;
    prm.n = n;
    prm.p = p;
    prm.branch = branch;

    if (branch == Branch::DegenerateAspectZero) {
        prm.gamma = std::sqrt((n + 2.0) / (p - 1.0));
        prm.a = 0.0;
        return prm;
    }

    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ParamError("gamma must be a positive finite real, got " + std::to_string(gamma));

    double asq = (p - 1.0) - (n + 2.0) / (gamma * gamma);
    if (asq < -kRelTol * (p - 1.0)) {
        std::ostringstream os;
        os << "compatibility (N+2)/gamma^2 + a^2 = p-1 is unsolvable: (N+2)/gamma^2 = "
           << (n + 2.0) / (gamma * gamma) << " exceeds p-1 = " << (p - 1.0);
        throw FeasibilityError(os.str());
    }
    prm.gamma = gamma;
    prm.a = std::sqrt(std::max(0.0, asq));

    const double tol = kRelTol;
    std::ostringstream os;
    switch (branch) {
        case Branch::AspectBelowOne:
            if (prm.a > 1.0 + tol) {
                os << "AspectBelowOne requires a <= 1, i.e. 1/gamma^2 >= (p-2)/(N+2); got a = " << prm.a;
                throw FeasibilityError(os.str());
            }
            if (!(prm.gamma * prm.a > 1.0)) {
                os << "termination condition gamma*a > 1 violated: gamma*a = " << prm.gamma * prm.a;
                throw FeasibilityError(os.str());
            }
            break;
        case Branch::AspectAboveOne:
            if (prm.a < 1.0 - tol) {
                os << "AspectAboveOne requires a >= 1, i.e. 1/gamma^2 <= (p-2)/(N+2); got a = " << prm.a;
                throw FeasibilityError(os.str());
            }
            if (!(prm.gamma > 1.0)) {
                os << "termination condition gamma > 1 violated: gamma = " << prm.gamma;
                throw FeasibilityError(os.str());
            }
            break;
        case Branch::DegenerateAspectZero:
            break;
    }
    return prm;
}

Params make_params_default(int n, double p, Branch branch) {
    return make_params(n, p, default_gamma(n, p, branch), branch);
}

}  // namespace elliptow
