#pragma once

#include <utility>
#include <vector>

#include "elliptow/grid_field.hpp"

namespace elliptow {

/// Grid solver configuration. The lattice spans the domain box inflated by
/// the sampling footprint eps*(1 + gamma*max(a,1)).
struct SolverConfig {
    double eps = 0.1;  // game step, in (0,1)
    double h = 0.0;    // lattice spacing; 0 means eps/8, must satisfy h <= eps/8

    /// Residual tolerance in sup norm; negative means 1e-9 * osc(F). The
    /// iteration stops when both the last update and the geometric tail
    /// estimate drop below tol.
    double tol = -1.0;
    long max_iter = 100000;

    int quad_radial = 3;
    int quad_angular = 8;
    int search_directions = 0;  // 0: 64 in 2-D, 256 in 3-D
    std::vector<double> search_levels = {0.5, 1.0};
    bool search_center = true;

    /// Optional per-point enrichment of the shift search with the direction
    /// line through a fixed center (the extremal shifts of radial data). The
    /// directions come from a fine precomputed table, so the relaxed min/max
    /// stays a fixed-set operator and the monotone iteration structure is
    /// untouched. Dimension 2 only.
    enum class Hint { None, Radial };
    Hint search_hint = Hint::None;
    std::vector<double> hint_center;  // defaults to the origin

    enum class Init { MinData, Data };
    Init init = Init::MinData;  // constant min-F start (monotone) or F itself

    void validate() const;
    int resolved_directions(int dim) const {
        return search_directions > 0 ? search_directions : (dim == 2 ? 64 : 256);
    }
    double resolved_h() const { return h > 0.0 ? h : eps / 8.0; }
};

struct SolveInfo {
    bool converged = false;
    long iterations = 0;
    double final_update = 0.0;  // sup |T u - u| at the last sweep
    double est_tail = 0.0;      // geometric tail estimate of the remaining error
    double contraction = 0.0;   // observed update ratio
    double tol_used = 0.0;
    double data_min = 0.0;
    double data_max = 0.0;
    bool monotone = false;  // nondecreasing iterates were checked every sweep
};

/// Empty field on the lattice the solver would use (values all zero).
GridField make_solver_grid(const DataFnPtr& data, const Domain& dom, const SolverConfig& cfg,
                           const Params& prm);

/// One Jacobi application of the fixed-point operator: interior lattice values
/// become d_eps * (relaxed ellipsoid average of the old field) + (1-d_eps) * F;
/// exterior lattice values become F. Reads only the old field.
GridField apply_T(const GridField& field, const Domain& dom, const SolverConfig& cfg,
                  const Params& prm);

/// Monotone fixed-point iteration for u = d_eps * S_eps u + (1 - d_eps) * F.
/// With Init::MinData the iterate sequence is verified nondecreasing every
/// sweep. Non-convergence within max_iter is reported in SolveInfo, not thrown.
std::pair<GridField, SolveInfo> solve_dpp(const DataFnPtr& data, const Domain& dom,
                                          const SolverConfig& cfg, const Params& prm);

/// Sup distance between two fields on a shared lattice.
double sup_distance(const GridField& a, const GridField& b);

}  // namespace elliptow
