#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nlpt/domain.hpp"
#include "nlpt/kernel.hpp"
#include "nlpt/operator.hpp"

namespace nlpt {

enum class InitMode { DataMean, Zero, Given };

struct SolverConfig {
    /// Convergence when max_i |r_i| / scale_i <= residual_tol.
    double residual_tol = 1e-10;
    std::size_t max_iterations = 100000;
    /// p < 2 smoothing: eps_0 = smoothing_start * osc, eps_{k+1} = eps_k / smoothing_ratio,
    /// continuation stops once eps_k < smoothing_floor * osc.
    double smoothing_start = 1e-2;
    double smoothing_ratio = 4.0;
    double smoothing_floor = 1e-12;
    /// Step contraction of the backtracking line search.
    double contraction = 0.5;
    InitMode init = InitMode::DataMean;
    /// Full-grid start vector for InitMode::Given (interior entries are used).
    std::vector<double> initial;
    /// Record the energy after every iteration.
    bool record_energy = false;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

struct SolveReport {
    FieldFunction solution;
    std::size_t iterations = 0;
    /// max_i |r_i| / scale_i at the returned state (projected for obstacle problems).
    double final_residual = 0.0;
    double energy = 0.0;
    bool converged = false;
    std::size_t stages = 0;
    std::vector<double> energy_trace;
};

/// Low-level minimiser shared by the Dirichlet and obstacle solvers.
struct MinimizeOutcome {
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::size_t stages = 0;
    std::vector<double> energy_trace;
};

/// Minimises the discrete energy over the interior entries of `values` (full
/// grid, non-interior entries fixed). `lower` holds one bound per interior slot
/// (may be -inf) or is empty for the unconstrained problem. `oscillation` sets
/// the residual and smoothing scales.
MinimizeOutcome minimize_energy(const Assembly& assembly, std::vector<double>& values, std::span<const double> lower,
                                double oscillation, const SolverConfig& cfg);

/// Oscillation of the fixed (non-interior) data; 1 when flat.
double boundary_oscillation(const FieldFunction& g, const RegionMask& mask);

/// Dirichlet problem: minimise the energy with u = g off the interior.
SolveReport solve_dirichlet(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec,
                            const SolverConfig& cfg = {});
/// Same, reusing an assembly whose far model matches g.
SolveReport solve_dirichlet(const FieldFunction& g, const Assembly& assembly, const SolverConfig& cfg = {});

struct ComparisonReport {
    bool pass = false;
    /// min over interior cells of u_i - v_i.
    double margin = 0.0;
    std::size_t witness = 0;
};

/// Pass iff u >= v - tol on the interior. Throws ValidationError when the
/// ordering fails on non-interior cells (the comparison would be vacuous).
ComparisonReport comparison_check(const FieldFunction& u, const FieldFunction& v, const RegionMask& mask, double tol);

struct StabilityReport {
    std::vector<SolveReport> runs;
    /// sup-norm distance between consecutive solutions.
    std::vector<double> increments;
    /// +1 increasing, -1 decreasing, 0 constant, 2 not monotone.
    int monotone = 0;
    /// sup-norm distance between the last solution and the solution for the limit datum.
    double limit_gap = 0.0;
    bool pass = false;
};

/// Solves along a sequence of data and against the limit datum. Passes when
/// every run converged, the solutions are monotone or Cauchy (increments
/// eventually shrinking) and the last one is within `tol` of the limit solve.
StabilityReport stability_run(const std::vector<FieldFunction>& data, const FieldFunction& limit, const RegionMask& mask,
                              const KernelSpec& spec, const SolverConfig& cfg, double tol);

}  // namespace nlpt
