#include "nlpt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "nlpt/error.hpp"

namespace nlpt {

void SolverConfig::validate() const {
    if (!(residual_tol > 0.0)) throw ConfigError("solver: residual_tol must be positive");
    if (max_iterations == 0) throw ConfigError("solver: max_iterations must be positive");
    if (!(smoothing_start > 0.0)) throw ConfigError("solver: smoothing_start must be positive");
    if (!(smoothing_ratio > 1.0)) throw ConfigError("solver: smoothing_ratio must exceed 1");
    if (!(smoothing_floor > 0.0) || smoothing_floor >= smoothing_start)
        throw ConfigError("solver: smoothing_floor must lie in (0, smoothing_start)");
    if (!(contraction > 0.0 && contraction < 1.0)) throw ConfigError("solver: contraction must lie in (0, 1)");
}

namespace {

constexpr double kActiveThreshold = 1e-8;

struct Problem {
    const Assembly& a;
    std::vector<double>& vals;
    std::span<const double> lower;
    double osc;
    double p;
    std::span<const std::size_t> cells;
    std::vector<double> scale;
    std::vector<double> diag_floor;

    bool bounded() const { return !lower.empty(); }
    bool at_bound(std::size_t k, double x) const {
        return bounded() && x <= lower[k] + kActiveThreshold * osc;
    }

    // Scaled residual, projected at cells sitting on the obstacle.
    double measure(std::span<const double> g, std::span<const double> values) const {
        double m = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double v = at_bound(k, values[cells[k]]) ? std::max(0.0, -g[k]) : std::abs(g[k]);
            m = std::max(m, v / scale[k]);
        }
        return m;
    }
};

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Preconditioned linear CG for the unconstrained p = 2 problem.
MinimizeOutcome linear_cg(Problem& P, const SolverConfig& cfg) {
    const Assembly& a = P.a;
    const std::size_t R = a.rows();
    MinimizeOutcome out;
    out.stages = 1;
    std::vector<double> D(R), g(R), r(R), z(R), d(R), q(R);
    for (std::size_t k = 0; k < R; ++k) D[k] = a.row_mass(k) + a.far_mass(k);

    auto matvec = [&](std::span<const double> v, std::span<double> res) {
        for (std::size_t k = 0; k < R; ++k) {
            const auto row = a.row(k);
            double acc = 0.0;
            for (std::size_t m = 0; m < R; ++m) acc += row[P.cells[m]] * v[m];
            res[k] = D[k] * v[k] - acc;
        }
    };

    a.gradient(P.vals, 0.0, g);
    double m = P.measure(g, P.vals);
    if (cfg.record_energy) out.energy_trace.push_back(a.variable_energy(P.vals, 0.0));
    for (std::size_t k = 0; k < R; ++k) {
        r[k] = -g[k];
        z[k] = r[k] / D[k];
        d[k] = z[k];
    }
    double rz = dot(r, z);
    while (m > cfg.residual_tol && out.iterations < cfg.max_iterations) {
        matvec(d, q);
        const double curv = dot(d, q);
        if (!(curv > 0.0)) break;
        const double alpha = rz / curv;
        for (std::size_t k = 0; k < R; ++k) {
            P.vals[P.cells[k]] += alpha * d[k];
            r[k] -= alpha * q[k];
        }
        ++out.iterations;
        m = 0.0;
        for (std::size_t k = 0; k < R; ++k) m = std::max(m, std::abs(r[k]) / P.scale[k]);
        // Replace the recursive residual periodically and before declaring convergence.
        if (out.iterations % 25 == 0 || m <= cfg.residual_tol) {
            a.gradient(P.vals, 0.0, g);
            for (std::size_t k = 0; k < R; ++k) r[k] = -g[k];
            m = P.measure(g, P.vals);
        }
        if (cfg.record_energy) out.energy_trace.push_back(a.variable_energy(P.vals, 0.0));
        if (!all_finite(r)) throw NumericalError("solver: non-finite residual during CG");
        for (std::size_t k = 0; k < R; ++k) z[k] = r[k] / D[k];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < R; ++k) d[k] = z[k] + beta * d[k];
    }
    a.gradient(P.vals, 0.0, g);
    out.residual = P.measure(g, P.vals);
    out.converged = out.residual <= cfg.residual_tol;
    return out;
}

// Jacobi preconditioner with exact dense blocks on clusters of stiffly coupled
// cells. For p < 2 nearly coincident values couple with curvature ~ eps^(p-2);
// plain Jacobi then freezes their common motion.
class Preconditioner {
public:
    void build(const Problem& P, double eps) {
        const Assembly& a = P.a;
        const std::size_t R = a.rows();
        D_.resize(R);
        a.hessian_diagonal(P.vals, eps, D_);
        for (std::size_t k = 0; k < R; ++k) D_[k] = std::max(D_[k], P.diag_floor[k]);
        clusters_.clear();
        factors_.clear();
        cluster_of_.assign(R, npos);
        if (P.p >= 2.0) return;
        std::vector<std::size_t> parent(R);
        for (std::size_t k = 0; k < R; ++k) parent[k] = k;
        auto find = [&](std::size_t k) {
            while (parent[k] != k) k = parent[k] = parent[parent[k]];
            return k;
        };
        bool any = false;
        for (std::size_t k = 0; k < R; ++k)
            for (std::size_t m = k + 1; m < R; ++m) {
                const double c = a.coupling(P.vals, eps, k, P.cells[m]);
                if (c >= 0.25 * std::min(D_[k], D_[m])) {
                    parent[find(k)] = find(m);
                    any = true;
                }
            }
        if (!any) return;
        std::vector<std::size_t> root_index(R, npos);
        for (std::size_t k = 0; k < R; ++k) {
            const std::size_t r = find(k);
            if (root_index[r] == npos) {
                root_index[r] = clusters_.size();
                clusters_.emplace_back();
            }
            clusters_[root_index[r]].push_back(k);
        }
        std::vector<std::vector<std::size_t>> kept;
        for (auto& c : clusters_) {
            if (c.size() < 2 || c.size() > kMaxCluster) continue;
            const std::size_t n = c.size();
            std::vector<double> L(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                L[i * n + i] = D_[c[i]];
                for (std::size_t j = 0; j < i; ++j) L[i * n + j] = -a.coupling(P.vals, eps, c[i], P.cells[c[j]]);
            }
            if (!cholesky(L, n)) continue;
            for (std::size_t k : c) cluster_of_[k] = kept.size();
            kept.push_back(c);
            factors_.push_back(std::move(L));
        }
        clusters_ = std::move(kept);
    }

    // z = -M^{-1} g, zero on active cells.
    void apply(std::span<const double> g, const std::vector<char>& active, std::span<double> z) const {
        for (std::size_t k = 0; k < g.size(); ++k) z[k] = active[k] ? 0.0 : -g[k] / D_[k];
        for (std::size_t ci = 0; ci < clusters_.size(); ++ci) {
            const auto& c = clusters_[ci];
            if (std::any_of(c.begin(), c.end(), [&](std::size_t k) { return active[k] != 0; })) continue;
            const std::size_t n = c.size();
            const std::vector<double>& L = factors_[ci];
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = -g[c[i]];
                for (std::size_t j = 0; j < i; ++j) acc -= L[i * n + j] * y[j];
                y[i] = acc / L[i * n + i];
            }
            for (std::size_t i = n; i-- > 0;) {
                double acc = y[i];
                for (std::size_t j = i + 1; j < n; ++j) acc -= L[j * n + i] * y[j];
                y[i] = acc / L[i * n + i];
            }
            for (std::size_t i = 0; i < n; ++i) z[c[i]] = y[i];
        }
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    static constexpr std::size_t kMaxCluster = 256;

    static bool cholesky(std::vector<double>& L, std::size_t n) {
        for (std::size_t j = 0; j < n; ++j) {
            double d = L[j * n + j];
            for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
            if (!(d > 0.0)) return false;
            L[j * n + j] = std::sqrt(d);
            for (std::size_t i = j + 1; i < n; ++i) {
                double v = L[i * n + j];
                for (std::size_t k = 0; k < j; ++k) v -= L[i * n + k] * L[j * n + k];
                L[i * n + j] = v / L[j * n + j];
            }
        }
        return true;
    }

    std::vector<double> D_;
    std::vector<std::vector<std::size_t>> clusters_;
    std::vector<std::vector<double>> factors_;
    std::vector<std::size_t> cluster_of_;
};

// One continuation stage of projected, preconditioned PR+ nonlinear CG.
// Returns false when the stage stalled.
bool ncg_stage(Problem& P, const SolverConfig& cfg, double eps, double stage_tol, MinimizeOutcome& out) {
    const Assembly& a = P.a;
    const std::size_t R = a.rows();
    const std::size_t N = a.cols();
    std::vector<double> g(R), g_prev(R), z(R), d(R, 0.0), gt(R), gacc(R);
    Preconditioner M;
    std::vector<char> active(R, 0), active_prev(R, 0);
    std::vector<double> trial(N), accepted(N);
    const double precond_eps = std::max(eps, cfg.smoothing_floor * P.osc);

    a.gradient(P.vals, eps, g);
    bool restart = true;
    std::size_t since_precond = 0;
    int stalls = 0;
    double prev_gz = 0.0;
    while (true) {
        if (!all_finite(g)) throw NumericalError("solver: non-finite residual");
        // Snap cells that sit within the activity threshold onto the obstacle.
        if (P.bounded()) {
            bool snapped = false;
            for (std::size_t k = 0; k < R; ++k) {
                const std::size_t c = P.cells[k];
                const bool on = P.at_bound(k, P.vals[c]) && g[k] > 0.0;
                if (on && P.vals[c] != P.lower[k]) {
                    P.vals[c] = P.lower[k];
                    snapped = true;
                }
                active[k] = on;
            }
            if (snapped) a.gradient(P.vals, eps, g);
        }
        if (P.measure(g, P.vals) <= stage_tol) return true;
        if (out.iterations >= cfg.max_iterations) return false;

        if (restart || since_precond >= 10) {
            M.build(P, precond_eps);
            since_precond = 0;
        }
        ++since_precond;
        M.apply(g, active, z);
        const double gz = -dot(g, z);
        double beta = 0.0;
        if (!restart && active == active_prev && prev_gz > 0.0) {
            double num = 0.0;
            for (std::size_t k = 0; k < R; ++k) num += z[k] * (g_prev[k] - g[k]);
            beta = std::max(0.0, num / prev_gz);
        }
        for (std::size_t k = 0; k < R; ++k) d[k] = active[k] ? 0.0 : z[k] + beta * d[k];
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            d = z;
            slope = dot(g, d);
            if (!(slope < 0.0)) return false;
        }

        auto directional = [&](double alpha) {
            trial = P.vals;
            for (std::size_t k = 0; k < R; ++k) trial[P.cells[k]] += alpha * d[k];
            a.gradient(trial, eps, gt);
            return dot(gt, d);
        };

        // Secant search for phi'(alpha) = 0 on the unprojected line.
        double lo = 0.0, flo = slope, hi = -1.0, fhi = 0.0;
        double alpha = 1.0;
        double f = directional(alpha);
        for (int it = 0; it < 8 && std::abs(f) > 0.1 * std::abs(slope); ++it) {
            if (f < 0.0) {
                lo = alpha;
                flo = f;
            } else {
                hi = alpha;
                fhi = f;
            }
            if (hi > 0.0) {
                double next = lo - flo * (hi - lo) / (fhi - flo);
                const double w = hi - lo;
                alpha = std::clamp(next, lo + 0.01 * w, hi - 0.01 * w);
            } else {
                const double next = (f > slope) ? alpha * slope / (slope - f) : 10.0 * alpha;
                alpha = std::min(std::max(next, 2.0 * alpha), 10.0 * alpha);
            }
            f = directional(alpha);
        }
        if (f > 0.0 && lo > 0.0 && std::abs(flo) < std::abs(f)) alpha = lo;

        // Projected step, accepted when grad(x')·(x' - x) <= 0 (energy decrease by convexity).
        bool ok = false;
        double moved = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            accepted = P.vals;
            moved = 0.0;
            for (std::size_t k = 0; k < R; ++k) {
                const std::size_t c = P.cells[k];
                double v = P.vals[c] + alpha * d[k];
                if (P.bounded()) v = std::max(v, P.lower[k]);
                accepted[c] = v;
                moved = std::max(moved, std::abs(v - P.vals[c]));
            }
            a.gradient(accepted, eps, gacc);
            double ddir = 0.0;
            for (std::size_t k = 0; k < R; ++k) {
                const std::size_t c = P.cells[k];
                ddir += gacc[k] * (accepted[c] - P.vals[c]);
            }
            if (ddir <= 0.0) {
                ok = true;
                break;
            }
            alpha *= cfg.contraction;
        }
        ++out.iterations;
        if (!ok) return false;
        g_prev = g;
        prev_gz = gz;
        active_prev = active;
        P.vals.swap(accepted);
        g = gacc;
        restart = false;
        if (cfg.record_energy) out.energy_trace.push_back(a.variable_energy(P.vals, 0.0));
        if (moved <= 1e-15 * P.osc) {
            if (++stalls >= 5) return false;
            restart = true;
        } else {
            stalls = 0;
        }
        if (out.iterations % (R + 1) == 0) restart = true;
    }
}

MinimizeOutcome nonlinear_cg(Problem& P, const SolverConfig& cfg) {
    MinimizeOutcome out;
    std::vector<double> g(P.a.rows());
    std::vector<double> schedule;
    if (P.p < 2.0) {
        for (double e = cfg.smoothing_start; e >= cfg.smoothing_floor; e /= cfg.smoothing_ratio)
            schedule.push_back(e * P.osc);
    }
    schedule.push_back(0.0);
    if (cfg.record_energy) out.energy_trace.push_back(P.a.variable_energy(P.vals, 0.0));
    for (double eps : schedule) {
        P.a.gradient(P.vals, 0.0, g);
        if (P.measure(g, P.vals) <= cfg.residual_tol) break;
        const double rel = eps / P.osc;
        const double stage_tol = eps > 0.0 ? std::max(cfg.residual_tol, 0.1 * std::pow(rel, P.p - 1.0))
                                           : cfg.residual_tol;
        ++out.stages;
        ncg_stage(P, cfg, eps, stage_tol, out);
        if (out.iterations >= cfg.max_iterations) break;
    }
    P.a.gradient(P.vals, 0.0, g);
    out.residual = P.measure(g, P.vals);
    out.converged = out.residual <= cfg.residual_tol;
    return out;
}

}  // namespace

MinimizeOutcome minimize_energy(const Assembly& assembly, std::vector<double>& values, std::span<const double> lower,
                                double oscillation, const SolverConfig& cfg) {
    cfg.validate();
    if (values.size() != assembly.cols()) throw ConfigError("solver: value vector does not match the grid");
    if (!lower.empty() && lower.size() != assembly.rows())
        throw ConfigError("solver: obstacle vector does not match the interior");
    const double p = assembly.spec().p();
    Problem P{assembly, values, lower, oscillation, p, assembly.mask().interior(),
              residual_scale(assembly, oscillation), {}};
    P.diag_floor.resize(assembly.rows());
    for (std::size_t k = 0; k < assembly.rows(); ++k)
        P.diag_floor[k] =
            1e-12 * (assembly.row_mass(k) + assembly.far_mass(k)) * std::pow(oscillation, p - 2.0);
    if (P.bounded())
        for (std::size_t k = 0; k < lower.size(); ++k) {
            double& v = values[P.cells[k]];
            v = std::max(v, lower[k]);
        }
    if (p == 2.0 && !P.bounded()) return linear_cg(P, cfg);
    return nonlinear_cg(P, cfg);
}

double boundary_oscillation(const FieldFunction& g, const RegionMask& mask) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (mask.is_interior(c)) continue;
        lo = std::min(lo, g[c]);
        hi = std::max(hi, g[c]);
    }
    const double osc = hi - lo;
    return osc > 0.0 ? osc : 1.0;
}

namespace {

std::vector<double> initial_values(const FieldFunction& g, const RegionMask& mask, const SolverConfig& cfg) {
    std::vector<double> vals(g.values().begin(), g.values().end());
    double fill = 0.0;
    if (cfg.init == InitMode::DataMean) {
        // Mean measured from the first datum, so flat data are reproduced exactly.
        double sum = 0.0, base = 0.0;
        std::size_t n = 0;
        for (std::size_t c = 0; c < g.size(); ++c)
            if (!mask.is_interior(c)) {
                if (n == 0) base = g[c];
                sum += g[c] - base;
                ++n;
            }
        fill = n ? base + sum / static_cast<double>(n) : 0.0;
    }
    if (cfg.init == InitMode::Given && cfg.initial.size() != vals.size())
        throw ConfigError("solver: initial vector does not match the grid");
    for (std::size_t c : mask.interior()) vals[c] = cfg.init == InitMode::Given ? cfg.initial[c] : fill;
    return vals;
}

}  // namespace

SolveReport solve_dirichlet(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec,
                            const SolverConfig& cfg) {
    if (!(g.grid() == mask.grid())) throw ConfigError("solve: data and mask live on different grids");
    return solve_dirichlet(g, Assembly(mask, spec, g.far()), cfg);
}

SolveReport solve_dirichlet(const FieldFunction& g, const Assembly& assembly, const SolverConfig& cfg) {
    cfg.validate();
    assembly.require_compatible(g);
    const RegionMask& mask = assembly.mask();
    std::vector<double> vals = initial_values(g, mask, cfg);
    const double osc = boundary_oscillation(g, mask);
    MinimizeOutcome o = minimize_energy(assembly, vals, {}, osc, cfg);
    const double e = assembly.variable_energy(vals, 0.0);
    SolveReport rep{g.with_values(std::move(vals)), o.iterations, o.residual, e, o.converged, o.stages,
                    std::move(o.energy_trace)};
    return rep;
}

ComparisonReport comparison_check(const FieldFunction& u, const FieldFunction& v, const RegionMask& mask, double tol) {
    if (!(u.grid() == v.grid()) || !(u.grid() == mask.grid()))
        throw ConfigError("comparison: fields and mask live on different grids");
    for (std::size_t c = 0; c < u.size(); ++c) {
        if (mask.is_interior(c)) continue;
        if (u[c] < v[c] - tol) {
            std::ostringstream os;
            os << "comparison: ordering fails outside the interior at cell " << c << " (u - v = "
               << format_double(u[c] - v[c]) << ")";
            throw ValidationError(os.str());
        }
    }
    ComparisonReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    for (std::size_t c : mask.interior()) {
        const double m = u[c] - v[c];
        if (m < rep.margin) {
            rep.margin = m;
            rep.witness = c;
        }
    }
    rep.pass = rep.margin >= -tol;
    return rep;
}

StabilityReport stability_run(const std::vector<FieldFunction>& data, const FieldFunction& limit, const RegionMask& mask,
                              const KernelSpec& spec, const SolverConfig& cfg, double tol) {
    if (data.empty()) throw ConfigError("stability: empty data sequence");
    StabilityReport rep;
    bool all_converged = true;
    for (const FieldFunction& g : data) {
        rep.runs.push_back(solve_dirichlet(g, mask, spec, cfg));
        all_converged = all_converged && rep.runs.back().converged;
    }
    bool up = true, down = true;
    for (std::size_t k = 1; k < rep.runs.size(); ++k) {
        const auto a = rep.runs[k - 1].solution.values();
        const auto b = rep.runs[k].solution.values();
        rep.increments.push_back(sup_norm_difference(rep.runs[k - 1].solution, rep.runs[k].solution));
        for (std::size_t c = 0; c < a.size(); ++c) {
            up = up && b[c] >= a[c] - tol;
            down = down && b[c] <= a[c] + tol;
        }
    }
    rep.monotone = up && down ? 0 : up ? 1 : down ? -1 : 2;
    const SolveReport lim = solve_dirichlet(limit, mask, spec, cfg);
    all_converged = all_converged && lim.converged;
    rep.limit_gap = sup_norm_difference(rep.runs.back().solution, lim.solution);
    bool shrinking = true;
    if (rep.increments.size() >= 2) shrinking = rep.increments.back() <= rep.increments.front() + tol;
    rep.pass = all_converged && (rep.monotone != 2 || shrinking) && rep.limit_gap <= tol;
    return rep;
}

}  // namespace nlpt
