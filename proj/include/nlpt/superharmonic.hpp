#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlpt/domain.hpp"
#include "nlpt/kernel.hpp"
#include "nlpt/solver.hpp"

namespace nlpt {

struct SummabilityExponents {
    /// (p-1) n / (n - sp) when p < n/s, else +inf.
    double t_bar = 0.0;
    /// min{ n (p-1) / (n - s), p }.
    double q_bar = 0.0;
};

SummabilityExponents summability_exponents(int n, double s, double p);

/// Cellwise minimum; far field = lower envelope of the two models. Throws
/// ConfigError when the models cannot be combined analytically.
FieldFunction pointwise_min(const FieldFunction& u, const FieldFunction& v);

/// min(u, k) cellwise, far field capped at k.
FieldFunction truncate_min(const FieldFunction& u, double k);

/// Cone cost j^2 |x - y| for cells `steps` apart on a uniform axis.
inline double cone_cost(double j, double spacing, double steps) { return j * j * (spacing * steps); }

/// psi_j(x) = min_{y in D} { min(j, u(y)) + j^2 |x - y| } - 1/j on the interior of D,
/// u elsewhere. Distances use the grid l1 metric (exact Euclidean in 1D).
FieldFunction infimal_convolution(const FieldFunction& u, int j, const RegionMask& region);

/// min over the 3^n neighbourhood, the cell included.
FieldFunction lsc_regularize(const FieldFunction& f);

struct SuperharmonicReport {
    bool pass = false;
    /// A sub-solve did not converge; pass is then false and the result is not a failure.
    bool inconclusive = false;
    std::size_t trials = 0;
    /// min over trials and cells of (u - v_D) / osc.
    double margin = 0.0;
    std::size_t witness_cell = 0;
    /// Description of the sub-domain attaining the margin.
    std::string witness_domain;
    /// max over the interior of (u - lsc_regularize(u)) / osc.
    double lsc_defect = 0.0;
};

struct SuperharmonicOptions {
    std::size_t trial_count = 32;
    double tol = 1e-8;
    std::uint64_t seed = 1;
    SolverConfig solver;
};

/// Comparison test against Dirichlet solves on random sub-domains D compactly
/// inside the interior (rectangles and balls, at least 4 cells, plus the
/// interior minus one ring). Pass iff u >= v_D - tol * osc on every D.
SuperharmonicReport superharmonic_check(const FieldFunction& u, const RegionMask& mask, const KernelSpec& spec,
                                        const SuperharmonicOptions& options = {});

struct SummabilityEntry {
    double h = 0.0;
    double q = 0.0;
    double t = 0.0;
    double seminorm = 0.0;
    double lt_norm = 0.0;
    /// (r^h [u]_{W^{h,q}(B_r)} + |u|_{L^t(B_r)}) / M.
    double ratio = 0.0;
};

struct SummabilityReport {
    SummabilityExponents bars;
    /// inf_{B_{r/8}} u_+ + Tail(u_-; z, r/2) + sup_{B_{3r/2}} u_-.
    double M = 0.0;
    std::vector<SummabilityEntry> entries;
    bool divergent = false;
};

/// Evaluates the summability quantities for h in {s/2, 0.8 s}, q in {q_bar/2, 0.9 q_bar}
/// and t in {t_bar/2, 0.9 t_bar} (or {p, 2p} when t_bar is infinite).
SummabilityReport summability_report(const FieldFunction& u, const Ball& ball, const KernelSpec& spec);

/// |u|_{L^t} over the given cells.
double lt_norm(const FieldFunction& u, std::span<const std::size_t> cells, double t);

}  // namespace nlpt
