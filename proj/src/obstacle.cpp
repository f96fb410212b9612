#include "nlpt/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nlpt/error.hpp"
#include "nlpt/operator.hpp"

namespace nlpt {

namespace {

void require_same_grid(const ObstacleProblem& pb) {
    if (!(pb.g.grid() == pb.mask.grid())) throw ConfigError("obstacle: datum and mask live on different grids");
    if (pb.h && !(pb.h->grid() == pb.mask.grid())) throw ConfigError("obstacle: obstacle and mask live on different grids");
}

// Oscillation of the fixed data together with the obstacle on the interior.
double problem_oscillation(const ObstacleProblem& pb) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t c = 0; c < pb.g.size(); ++c) {
        if (pb.mask.is_interior(c) && !pb.h) continue;
        const double v = pb.mask.is_interior(c) ? (*pb.h)[c] : pb.g[c];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double osc = hi - lo;
    return osc > 0.0 ? osc : 1.0;
}

std::vector<double> interior_obstacle(const ObstacleProblem& pb) {
    std::vector<double> lower;
    if (!pb.h) return lower;
    for (std::size_t c : pb.mask.interior()) lower.push_back((*pb.h)[c]);
    return lower;
}

}  // namespace

FieldFunction clip_datum(const FieldFunction& g, const FieldFunction& h, const RegionMask& mask) {
    std::vector<double> v(g.values().begin(), g.values().end());
    for (std::size_t c = 0; c < v.size(); ++c)
        if (mask.label(c) == Label::Buffer) v[c] = std::max(v[c], h[c]);
    return g.with_values(std::move(v));
}

ObstacleReport solve_obstacle(const ObstacleProblem& pb, const KernelSpec& spec, const SolverConfig& cfg) {
    cfg.validate();
    require_same_grid(pb);
    if (pb.h) {
        for (std::size_t c = 0; c < pb.g.size(); ++c) {
            if (pb.mask.label(c) != Label::Buffer || (*pb.h)[c] <= pb.g[c]) continue;
            std::ostringstream os;
            os << "obstacle: constraint set is empty, obstacle exceeds the datum on buffer cell " << c << " (h - g = "
               << format_double((*pb.h)[c] - pb.g[c]) << "); clip the datum first";
            throw ConfigError(os.str());
        }
    }
    const Assembly assembly(pb.mask, spec, pb.g.far());
    const std::vector<double> lower = interior_obstacle(pb);
    const double osc = problem_oscillation(pb);

    std::vector<double> vals(pb.g.values().begin(), pb.g.values().end());
    if (cfg.init == InitMode::Given) {
        if (cfg.initial.size() != vals.size()) throw ConfigError("obstacle: initial vector does not match the grid");
        for (std::size_t c : pb.mask.interior()) vals[c] = cfg.initial[c];
    } else {
        double fill = 0.0;
        if (cfg.init == InitMode::DataMean) {
            double sum = 0.0, base = 0.0;
            std::size_t n = 0;
            for (std::size_t c = 0; c < vals.size(); ++c)
                if (!pb.mask.is_interior(c)) {
                    if (n == 0) base = vals[c];
                    sum += vals[c] - base;
                    ++n;
                }
            fill = base + sum / static_cast<double>(n);
        }
        for (std::size_t c : pb.mask.interior()) vals[c] = fill;
    }

    MinimizeOutcome o = minimize_energy(assembly, vals, lower, osc, cfg);
    std::vector<char> active(vals.size(), 0);
    std::size_t active_count = 0;
    for (std::size_t k = 0; k < lower.size(); ++k) {
        const std::size_t c = pb.mask.interior()[k];
        if (vals[c] == lower[k]) {
            active[c] = 1;
            ++active_count;
        }
    }

    // Sampled cone of feasible directions: w >= 0 on the active set, free elsewhere.
    std::vector<double> r(assembly.rows());
    assembly.gradient(vals, 0.0, r);
    const std::vector<double> scale = residual_scale(assembly, osc);
    std::mt19937_64 rng(0x6f627374ULL);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 64; ++t) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            double w = U(rng);
            if (active[pb.mask.interior()[k]]) w = std::abs(w);
            num += r[k] * w;
            den += scale[k] * std::abs(w);
        }
        margin = std::min(margin, num / den);
    }
    const double e = assembly.variable_energy(vals, 0.0);
    SolveReport solve{pb.g.with_values(std::move(vals)), o.iterations, o.residual, e, o.converged, o.stages,
                      std::move(o.energy_trace)};
    ObstacleReport rep{std::move(solve), std::move(active), active_count, margin};
    return rep;
}

ComplementarityReport complementarity_check(const FieldFunction& u, const ObstacleProblem& pb, const KernelSpec& spec,
                                            double tol) {
    require_same_grid(pb);
    const Assembly assembly(pb.mask, spec, pb.g.far());
    assembly.require_compatible(u);
    const double osc = problem_oscillation(pb);
    const std::vector<double> r = residual(u, assembly);
    const std::vector<double> scale = residual_scale(assembly, osc);
    ComplementarityReport rep;
    rep.feasibility = std::numeric_limits<double>::infinity();
    rep.supersolution = std::numeric_limits<double>::infinity();
    // Witness = the cell with the largest violation.
    double worst = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const std::size_t c = pb.mask.interior()[k];
        const double gap = pb.h ? (u[c] - (*pb.h)[c]) / osc : std::numeric_limits<double>::infinity();
        const double rel = r[k] / scale[k];
        rep.feasibility = std::min(rep.feasibility, gap);
        rep.supersolution = std::min(rep.supersolution, rel);
        double violation = std::max(-gap, -rel) - tol;
        if (gap > tol) {
            ++rep.detached_count;
            rep.detached = std::max(rep.detached, std::abs(rel));
            violation = std::max(violation, std::abs(rel) - tol);
        }
        if (violation > worst) {
            worst = violation;
            rep.witness = c;
        }
    }
    const bool pass = worst == 0.0;
    rep.pass = pass;
    return rep;
}

ObstacleProblem sample_problem(const ObstacleRules& rules, int resolution) {
    std::vector<int> res(rules.box.size(), resolution);
    GridPtr grid = build_grid(rules.box, res);
    RegionMask mask = make_mask(grid, rules.interior, rules.buffer_width);
    FieldFunction g = sample_field(grid, rules.g, rules.g_far);
    std::optional<FieldFunction> h;
    if (rules.h) {
        h = sample_field(grid, *rules.h, FarFieldModel::zero());
        g = clip_datum(g, *h, mask);
    }
    return ObstacleProblem{std::move(g), std::move(h), std::move(mask)};
}

ContinuityReport continuity_probe(const ObstacleRules& rules, const KernelSpec& spec, const std::vector<int>& resolutions,
                                  const SolverConfig& cfg) {
    if (resolutions.size() < 2) throw ConfigError("continuity_probe: needs at least two resolutions");
    ContinuityReport rep;
    std::vector<double> spacing;
    for (int n : resolutions) {
        const ObstacleProblem pb = sample_problem(rules, n);
        const ObstacleReport o = solve_obstacle(pb, spec, cfg);
        if (!o.solve.converged) throw NonConvergenceError("continuity_probe: solve did not converge");
        const Grid& g = pb.mask.grid();
        const FieldFunction& u = o.solve.solution;
        double jump = 0.0;
        for (std::size_t c = 0; c < g.size(); ++c) {
            const auto id = g.index(c);
            const int ny = g.dim() == 2 ? 1 : 0;
            for (int dy = 0; dy <= ny; ++dy)
                for (int dx = 0; dx <= 1; ++dx) {
                    if (dx + dy != 1 || !g.valid_index(id[0] + dx, id[1] + dy)) continue;
                    const std::size_t e = g.flat(id[0] + dx, id[1] + dy);
                    if (!pb.mask.is_interior(c) && !pb.mask.is_interior(e)) continue;
                    jump = std::max(jump, std::abs(u[c] - u[e]));
                }
        }
        rep.resolutions.push_back(n);
        rep.jumps.push_back(jump);
        spacing.push_back(g.spacing());
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < rep.jumps.size(); ++k)
        decreasing = decreasing && (rep.jumps[k] < rep.jumps[k - 1] || rep.jumps[k] == 0.0);
    if (rep.jumps.back() == 0.0 && rep.jumps.front() == 0.0) {
        rep.alpha = std::numeric_limits<double>::infinity();
    } else {
        // Least-squares slope over the positive jumps.
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        int m = 0;
        for (std::size_t k = 0; k < rep.jumps.size(); ++k) {
            if (rep.jumps[k] <= 0.0) continue;
            const double x = std::log(spacing[k]), y = std::log(rep.jumps[k]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
        rep.alpha = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : std::numeric_limits<double>::infinity();
    }
    rep.pass = decreasing && rep.alpha > 0.0;
    return rep;
}

}  // namespace nlpt
