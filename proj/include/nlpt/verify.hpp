#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nlpt/domain.hpp"
#include "nlpt/kernel.hpp"
#include "nlpt/solver.hpp"

namespace nlpt {

/// One measured inequality lhs <= c * rhs, possibly at several resolutions.
struct InequalityReport {
    std::string name;
    /// Which estimate is being measured.
    std::string estimate;
    /// Values at the finest resolution.
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;
    /// Resolutions (or sample counts) and the constant measured at each.
    std::vector<int> resolutions;
    std::vector<double> constants;
    double cap = 1e6;
    /// Largest allowed ratio between constants at consecutive resolutions.
    double stability_factor = 2.0;
    /// Both sides vanish identically; passes without a constant.
    bool vacuous = false;
    /// The input satisfied the check's hypotheses (supersolution etc.).
    bool precondition = true;
    bool pass = false;
    std::string note;
    /// Named auxiliary numbers (fitted exponents, sweep values).
    std::vector<std::pair<std::string, double>> details;
};

/// Merges single-resolution reports of the same estimate. Pass iff every
/// precondition holds and either all are vacuous, or every rhs is positive,
/// every constant is finite and <= cap, and consecutive constants differ by at
/// most the stability factor.
InequalityReport refinement_study(const std::vector<InequalityReport>& runs);

// ---------------------------------------------------------------------------
// Poisson formula for the unit ball (p = 2, a == 1)

/// Calibrated constant of the Poisson kernel on B_1.
struct PoissonOracle {
    int dim = 1;
    double s = 0.5;
    /// Chosen so that the datum 1 reproduces u(0) = 1.
    double constant = 0.0;
    /// Gauss-Kronrod tolerance per radial shell.
    double shell_tol = 1e-13;
    /// Angular trapezoid points (2D).
    int angular_points = 512;
    /// max |u - 1| at the validation points for the datum 1.
    double calibration_residual = 0.0;
};

/// Calibrates at x = 0 and validates at five interior points. Throws
/// NumericalError when the residual exceeds 1e-6.
PoissonOracle calibrate_poisson(int dim, double s);

struct PoissonValue {
    bool divergent = false;
    /// NaN when divergent.
    double value = 0.0;
    /// "boundary" or "infinity" when divergent.
    std::string where;
    std::size_t shells = 0;
};

/// c (1 - |x|^2)^s int_{|y| > 1} g(y) (|y|^2 - 1)^(-s) |x - y|^(-n) dy for |x| < 1,
/// by radial shells of ratio 2 in |y| - 1, inward toward the sphere and outward
/// to infinity. Divergence: the geometrically extrapolated partial sums fail a
/// relative 1e-3 Cauchy test over 5 consecutive shells.
PoissonValue poisson_formula(const PoissonOracle& oracle, const ValueRule& g, const Point& x);

struct PoissonComparison {
    double s = 0.5;
    double calibration_residual = 0.0;
    std::vector<int> resolutions;
    /// max over interior cells |u_solver - u_formula| / data scale, per resolution.
    std::vector<double> discrepancies;
    double data_scale = 1.0;
    bool decreasing = false;
    bool pass = false;
};

/// Solves on B_1 inside the box [-half_width, half_width]^n with the Gagliardo
/// kernel at p = 2 and compares with the formula at the cell centres. `far`
/// must describe g outside the box. Pass iff the final discrepancy is <= 2% of
/// the data scale and the discrepancies decrease (or all are below 1e-6).
PoissonComparison poisson_vs_solver(const ValueRule& g, const FarFieldModel& far, int dim, double s,
                                    const std::vector<int>& resolutions, double half_width = 2.0,
                                    const SolverConfig& cfg = {});

struct BlowupReport {
    double s = 0.5;
    double exponent = 0.0;
    /// Truncated integrals over 1 + delta < |y| < 2, at x = 0.
    std::vector<double> deltas;
    std::vector<double> inner_values;
    /// Ratios of consecutive increments; near 1 for logarithmic growth.
    std::vector<double> increment_ratios;
    /// Least-squares slope of the values against log10(1 / delta).
    double rate_per_decade = 0.0;
    bool growing = false;
    /// Integrals over 1 + delta_0 < |y| < R for growing R.
    std::vector<double> radii;
    std::vector<double> outer_values;
    bool outer_converges = false;
};

/// Truncated Poisson integrals of g = ||y|^2 - 1|^exponent. `growing` holds when
/// the values increase strictly and every increment ratio is >= 0.5 (no plateau);
/// `outer_converges` when the outward increments shrink by a factor >= 2 and the
/// last one is below 1e-3 relative.
BlowupReport blowup_probe(const PoissonOracle& oracle, double exponent, const std::vector<double>& deltas,
                          const std::vector<double>& radii);

// ---------------------------------------------------------------------------
// Empirical inequality checks (single resolution)

enum class Truncation { Below, Above };

/// Hat profile: 1 on B_{r/2}, 0 outside B_{3r/4}, linear in between.
double cutoff_profile(const Point& x, const Ball& ball);

/// Caccioppoli estimate with tail for w = (u - k)_- (supersolutions) or
/// w = (u - k)_+ (subsolutions, Truncation::Above). The ball must lie inside
/// the interior; the hypothesis is tested on the ball with supersolution_check.
InequalityReport caccioppoli_check(const FieldFunction& u, const RegionMask& mask, const Ball& ball, double k,
                                   const KernelSpec& spec, Truncation side = Truncation::Below, double tol = 1e-8);

/// sup_{B_{r/2}} u <= delta Tail(u_+; z, r/2) + c delta^(-gamma) (avg_{B_r} u_+^p)^(1/p),
/// gamma = (p-1) n / (s p^2). The reported constant is the smallest c valid for
/// every delta in the grid; lhs is sup u - delta* Tail at the maximising delta.
InequalityReport local_boundedness_check(const FieldFunction& u, const RegionMask& mask, const Ball& ball,
                                         const KernelSpec& spec, const std::vector<double>& deltas,
                                         double tol = 1e-8);

/// (avg_{B_r} u^t)^(1/t) <= c inf_{B_2r} u + c (r/R)^(sp/(p-1)) Tail(u_-; z, R) for
/// each t in the grid (all below t_bar, else ConfigError); the constant is the max over t.
InequalityReport weak_harnack_check(const FieldFunction& u, const RegionMask& mask, const Point& center, double r,
                                    double R, const KernelSpec& spec, const std::vector<double>& ts,
                                    double tol = 1e-8);

/// Fits alpha from osc_{B_rho} u against rho (log-log least squares) and measures
/// the constant in osc <= c (rho/r)^alpha [Tail(u; z, r) + (avg_{B_2r} |u|^p)^(1/p)].
/// Needs at least 3 radii.
InequalityReport holder_check(const FieldFunction& u, const RegionMask& mask, const Point& center, double r,
                              const std::vector<double>& radii, const KernelSpec& spec, double tol = 1e-8);

/// Sample-doubling studies of the algebraic inequalities for the pairing L.
std::vector<InequalityReport> algebraic_reports(std::size_t samples = 20000, std::uint64_t seed = 12);

// ---------------------------------------------------------------------------
// Suites

enum class Suite { Algebraic, Caccioppoli, Harnack, Holder, Poisson, Blowup, All };

Suite parse_suite(const std::string& name);
std::string to_string(Suite suite);

struct SuiteOptions {
    KernelSpec spec = KernelSpec::gagliardo(1, 0.5, 2.0);
    /// Coarse resolution per axis; every refinement study also runs at twice this.
    int resolution = 128;
    std::vector<int> poisson_resolutions{128, 256, 512};
    SolverConfig solver;
    /// Worker threads for independent checks.
    unsigned threads = 1;
};

/// Runs the selected checks on the standard unit-ball setups.
std::vector<InequalityReport> run_suite(Suite suite, const SuiteOptions& options = {});

/// The same setups with corrupted inputs; every report is expected to fail.
std::vector<InequalityReport> negative_controls(const SuiteOptions& options = {});

}  // namespace nlpt
