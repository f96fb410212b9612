#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nlpt/domain.hpp"
#include "nlpt/kernel.hpp"
#include "nlpt/operator.hpp"
#include "nlpt/solver.hpp"

namespace nlpt {

/// Solves the Dirichlet problem in `sub` with data u outside it. `sub` must be
/// contained in `mask`. Throws NonConvergenceError when the sub-solve fails.
FieldFunction poisson_modify(const FieldFunction& u, const RegionMask& sub, const RegionMask& mask,
                             const KernelSpec& spec, const SolverConfig& cfg = {});

/// Same with a prepared assembly on the sub-domain (its far model must match u).
FieldFunction poisson_modify(const FieldFunction& u, const Assembly& sub, const SolverConfig& cfg = {});

/// Interior cells x of `mask` whose dilation c + (x - c) / fraction about the
/// interior centroid c still lands on an interior cell; fraction 1 gives the mask.
RegionMask concentric_submask(const RegionMask& mask, double fraction);

enum class Classification { Harmonic, PlusInfinity, MinusInfinity, Undetermined };

std::string to_string(Classification c);

/// Flags divergence once |u| exceeds factor * scale after `window` sweeps of
/// strictly monotone growth.
class DivergenceMonitor {
public:
    DivergenceMonitor(double scale, double factor = 1e6, std::size_t window = 10);

    /// Feeds the signed extreme value of the current iterate (sup for upward, inf for downward growth).
    /// Returns the detected direction: +1, -1 or 0.
    int feed(double sup_value, double inf_value);
    int state() const { return state_; }

private:
    double scale_;
    double factor_;
    std::size_t window_;
    std::vector<double> sups_;
    std::vector<double> infs_;
    int state_ = 0;
};

struct PerronOptions {
    std::vector<double> schedule{0.6, 0.8, 1.0};
    std::size_t max_sweeps = 50;
    /// Stop when a full sweep changes the iterate by less than this (sup norm).
    double sweep_tol = 1e-12;
    double divergence_factor = 1e6;
    std::size_t divergence_window = 10;
    /// Initial upper-class member; required when the data are unbounded above.
    std::optional<FieldFunction> initial;
};

struct PerronEnvelope {
    FieldFunction field;
    /// Per-sweep sup-norm change between consecutive iterates.
    std::vector<double> trace;
    /// Per-sweep largest increase max(current - previous); <= 0 for a decreasing sequence.
    std::vector<double> increases;
    std::size_t sweeps = 0;
    bool converged = false;
    Classification classification = Classification::Undetermined;
};

/// Decreasing sequence of Poisson modifications of an upper-class member over
/// the exhaustion schedule, then repeated full sweeps.
PerronEnvelope upper_perron(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec,
                            const SolverConfig& cfg = {}, const PerronOptions& options = {});

/// -upper_perron(-g).
PerronEnvelope lower_perron(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec,
                            const SolverConfig& cfg = {}, const PerronOptions& options = {});

struct PerronReport {
    PerronEnvelope upper;
    PerronEnvelope lower;
    /// sup over the interior of upper - lower.
    double gap = 0.0;
    Classification classification = Classification::Undetermined;
};

/// Both envelopes; harmonic when they agree within `tol` and pass the
/// supersolution / subsolution checks at `tol`.
PerronReport perron(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec, double tol,
                    const SolverConfig& cfg = {}, const PerronOptions& options = {});

struct ResolutivityReport {
    double direct_upper = 0.0;
    double direct_lower = 0.0;
    double upper_lower = 0.0;
    bool pass = false;
    bool inconclusive = false;
    std::string note;
};

/// Direct solve against both envelopes; pass iff the three interior gaps are <= tol.
ResolutivityReport resolutivity_check(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec, double tol,
                                      const SolverConfig& cfg = {}, const PerronOptions& options = {});

/// sup over the interior cells of |a - b|.
double interior_gap(const FieldFunction& a, const FieldFunction& b, const RegionMask& mask);

}  // namespace nlpt
