#pragma once

#include <optional>
#include <vector>

#include "nlpt/domain.hpp"
#include "nlpt/kernel.hpp"
#include "nlpt/solver.hpp"

namespace nlpt {

/// Obstacle problem: minimise the energy over u >= h on the interior, u = g elsewhere.
/// An empty `h` is the h = -infinity variant.
struct ObstacleProblem {
    FieldFunction g;
    std::optional<FieldFunction> h;
    RegionMask mask;
};

struct ObstacleReport {
    SolveReport solve;
    /// Per grid cell: 1 where u = h on the interior.
    std::vector<char> active;
    std::size_t active_count = 0;
    /// min over sampled feasible directions w of <A(u), w> / sum_i scale_i |w_i|.
    double variational_margin = 0.0;
};

/// Copy of g raised to h on buffer cells where h exceeds it.
FieldFunction clip_datum(const FieldFunction& g, const FieldFunction& h, const RegionMask& mask);

/// Projected nonlinear CG on the box constraint. Throws ConfigError when the
/// constraint set is empty (h above g on a buffer cell, see clip_datum).
ObstacleReport solve_obstacle(const ObstacleProblem& problem, const KernelSpec& spec, const SolverConfig& cfg = {});

struct ComplementarityReport {
    bool pass = false;
    /// min over interior cells of (u_i - h_i) / osc.
    double feasibility = 0.0;
    /// max |r_i| / scale_i over detached cells (u_i - h_i > tol * osc).
    double detached = 0.0;
    /// min r_i / scale_i over all interior cells.
    double supersolution = 0.0;
    std::size_t witness = 0;
    std::size_t detached_count = 0;
};

/// Pass iff u >= h - tol * osc, detached residuals lie in [-tol, tol] and all
/// residuals are >= -tol (relative to the residual scale).
ComplementarityReport complementarity_check(const FieldFunction& u, const ObstacleProblem& problem,
                                            const KernelSpec& spec, double tol);

/// Problem described by rules, so it can be sampled at several resolutions.
struct ObstacleRules {
    std::vector<Interval> box;
    CellPredicate interior;
    int buffer_width = 1;
    ValueRule g;
    FarFieldModel g_far = FarFieldModel::zero();
    std::optional<ValueRule> h;
};

ObstacleProblem sample_problem(const ObstacleRules& rules, int resolution);

struct ContinuityReport {
    std::vector<int> resolutions;
    /// Largest |u_i - u_j| over adjacent pairs with at least one interior cell.
    std::vector<double> jumps;
    /// Slope of log(jump) against log(spacing); +inf when all jumps vanish.
    double alpha = 0.0;
    bool pass = false;
};

/// Passes when the jumps decrease under refinement (or are all zero).
ContinuityReport continuity_probe(const ObstacleRules& rules, const KernelSpec& spec, const std::vector<int>& resolutions,
                                  const SolverConfig& cfg = {});

}  // namespace nlpt
