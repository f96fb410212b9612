#include "nlpt/perron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlpt/error.hpp"

namespace nlpt {

FieldFunction poisson_modify(const FieldFunction& u, const RegionMask& sub, const RegionMask& mask,
                             const KernelSpec& spec, const SolverConfig& cfg) {
    if (!(sub.grid() == mask.grid()) || !mask.contains(sub))
        throw ConfigError("poisson_modify: the sub-domain is not contained in the domain");
    return poisson_modify(u, Assembly(sub, spec, u.far()), cfg);
}

FieldFunction poisson_modify(const FieldFunction& u, const Assembly& sub, const SolverConfig& cfg) {
    // Warm start from u itself.
    SolverConfig local = cfg;
    local.init = InitMode::Given;
    local.initial.assign(u.values().begin(), u.values().end());
    SolveReport r = solve_dirichlet(u, sub, local);
    if (!r.converged)
        throw NonConvergenceError("poisson_modify: sub-domain solve did not converge (residual " +
                                  format_double(r.final_residual) + ")");
    return std::move(r.solution);
}

RegionMask concentric_submask(const RegionMask& mask, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("concentric_submask: fraction must lie in (0, 1]");
    if (fraction == 1.0) return mask;
    const Grid& g = mask.grid();
    Point c{0.0, 0.0};
    for (std::size_t cell : mask.interior()) c = c + g.center(cell);
    c = (1.0 / static_cast<double>(mask.interior_count())) * c;
    std::vector<std::size_t> cells;
    const int ry = g.dim() == 2 ? 1 : 0;
    for (std::size_t cell : mask.interior()) {
        const Point y = c + (1.0 / fraction) * (g.center(cell) - c);
        std::array<int, 2> id{0, 0};
        for (int a = 0; a < g.dim(); ++a)
            id[a] = static_cast<int>(std::floor((y[a] - g.bounds(a).lo) / g.spacing(a)));
        if (!g.valid_index(id[0], id[1]) || !mask.is_interior(g.flat(id[0], id[1]))) continue;
        // Keep a ring of the domain around the sub-domain.
        const auto own = g.index(cell);
        bool deep = true;
        for (int dy = -ry; dy <= ry && deep; ++dy)
            for (int dx = -1; dx <= 1 && deep; ++dx)
                deep = g.valid_index(own[0] + dx, own[1] + dy) && mask.is_interior(g.flat(own[0] + dx, own[1] + dy));
        if (deep) cells.push_back(cell);
    }
    if (cells.empty()) throw ConfigError("concentric_submask: the sub-domain has no cells at this resolution");
    return make_mask_from_cells(mask.grid_ptr(), cells, 1);
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Harmonic:
            return "harmonic";
        case Classification::PlusInfinity:
            return "plus_infinity";
        case Classification::MinusInfinity:
            return "minus_infinity";
        case Classification::Undetermined:
            break;
    }
    return "undetermined";
}

DivergenceMonitor::DivergenceMonitor(double scale, double factor, std::size_t window)
    : scale_(scale > 0.0 ? scale : 1.0), factor_(factor), window_(window) {
    if (window_ == 0) throw ConfigError("DivergenceMonitor: window must be positive");
}

int DivergenceMonitor::feed(double sup_value, double inf_value) {
    sups_.push_back(sup_value);
    infs_.push_back(inf_value);
    if (state_ != 0 || sups_.size() <= window_) return state_;
    const std::size_t n = sups_.size();
    bool up = sups_.back() > factor_ * scale_;
    bool down = -infs_.back() > factor_ * scale_;
    for (std::size_t k = n - window_; k < n; ++k) {
        up = up && sups_[k] > sups_[k - 1];
        down = down && infs_[k] < infs_[k - 1];
    }
    state_ = up ? 1 : down ? -1 : 0;
    return state_;
}

double interior_gap(const FieldFunction& a, const FieldFunction& b, const RegionMask& mask) {
    double m = 0.0;
    for (std::size_t c : mask.interior()) m = std::max(m, std::abs(a[c] - b[c]));
    return m;
}

PerronEnvelope upper_perron(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec,
                            const SolverConfig& cfg, const PerronOptions& options) {
    if (!(g.grid() == mask.grid())) throw ConfigError("upper_perron: data and mask live on different grids");
    if (options.schedule.empty() || options.schedule.back() != 1.0)
        throw ConfigError("upper_perron: the exhaustion schedule must end at 1");
    for (std::size_t k = 1; k < options.schedule.size(); ++k)
        if (!(options.schedule[k] > options.schedule[k - 1]))
            throw ConfigError("upper_perron: the exhaustion schedule must increase");

    FieldFunction u = g;
    if (options.initial) {
        if (!(options.initial->grid() == g.grid())) throw ConfigError("upper_perron: initial member on another grid");
        u = *options.initial;
    } else {
        // u = M on the interior, g elsewhere, with M the largest datum.
        double M = g.far().sup_over(g.grid().outer_radius());
        if (!std::isfinite(M))
            throw ConfigError("upper_perron: data unbounded above; supply an initial upper-class member");
        for (std::size_t c = 0; c < g.size(); ++c)
            if (!mask.is_interior(c)) M = std::max(M, g[c]);
        std::vector<double> v(g.values().begin(), g.values().end());
        for (std::size_t c : mask.interior()) v[c] = M;
        u = g.with_values(std::move(v));
    }

    std::vector<Assembly> stages;
    for (double f : options.schedule) stages.emplace_back(concentric_submask(mask, f), spec, u.far());

    const double scale = data_oscillation(g.values());
    DivergenceMonitor monitor(scale, options.divergence_factor, options.divergence_window);
    PerronEnvelope env{u, {}, {}, 0, false, Classification::Undetermined};
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        const FieldFunction prev = u;
        const std::size_t first = sweep == 0 ? 0 : stages.size() - 1;
        for (std::size_t k = first; k < stages.size(); ++k) u = poisson_modify(u, stages[k], cfg);
        double change = 0.0, increase = -std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity(), lo = -hi;
        for (std::size_t c = 0; c < u.size(); ++c) {
            change = std::max(change, std::abs(u[c] - prev[c]));
            increase = std::max(increase, u[c] - prev[c]);
            if (mask.is_interior(c)) {
                hi = std::max(hi, u[c]);
                lo = std::min(lo, u[c]);
            }
        }
        env.trace.push_back(change);
        env.increases.push_back(increase);
        ++env.sweeps;
        const int dir = monitor.feed(hi, lo);
        if (dir != 0) {
            env.classification = dir > 0 ? Classification::PlusInfinity : Classification::MinusInfinity;
            break;
        }
        if (change <= options.sweep_tol) {
            env.converged = true;
            env.classification = Classification::Harmonic;
            break;
        }
    }
    env.field = std::move(u);
    return env;
}

namespace {

Classification mirrored(Classification c) {
    if (c == Classification::PlusInfinity) return Classification::MinusInfinity;
    if (c == Classification::MinusInfinity) return Classification::PlusInfinity;
    return c;
}

}  // namespace

PerronEnvelope lower_perron(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec,
                            const SolverConfig& cfg, const PerronOptions& options) {
    PerronOptions mirrored_options = options;
    if (options.initial) mirrored_options.initial = options.initial->negated();
    PerronEnvelope env = upper_perron(g.negated(), mask, spec, cfg, mirrored_options);
    env.field = env.field.negated();
    env.classification = mirrored(env.classification);
    return env;
}

PerronReport perron(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec, double tol,
                    const SolverConfig& cfg, const PerronOptions& options) {
    PerronEnvelope up = upper_perron(g, mask, spec, cfg, options);
    PerronEnvelope low = lower_perron(g, mask, spec, cfg, options);
    PerronReport rep{std::move(up), std::move(low), 0.0, Classification::Undetermined};
    rep.gap = interior_gap(rep.upper.field, rep.lower.field, mask);
    const Classification a = rep.upper.classification, b = rep.lower.classification;
    if (a == Classification::PlusInfinity && b == Classification::PlusInfinity) {
        rep.classification = Classification::PlusInfinity;
    } else if (a == Classification::MinusInfinity && b == Classification::MinusInfinity) {
        rep.classification = Classification::MinusInfinity;
    } else if (rep.upper.converged && rep.lower.converged && rep.gap <= tol) {
        const Assembly assembly(mask, spec, g.far());
        const Assembly mirror = assembly.with_far_field(g.far().negated());
        const bool super = supersolution_check(rep.upper.field, assembly, tol).pass;
        const bool sub = supersolution_check(rep.lower.field.negated(), mirror, tol).pass;
        if (super && sub) rep.classification = Classification::Harmonic;
    }
    return rep;
}

ResolutivityReport resolutivity_check(const FieldFunction& g, const RegionMask& mask, const KernelSpec& spec, double tol,
                                      const SolverConfig& cfg, const PerronOptions& options) {
    ResolutivityReport rep;
    try {
        const SolveReport direct = solve_dirichlet(g, mask, spec, cfg);
        if (!direct.converged) throw NonConvergenceError("direct solve did not converge");
        const PerronEnvelope up = upper_perron(g, mask, spec, cfg, options);
        const PerronEnvelope low = lower_perron(g, mask, spec, cfg, options);
        if (!up.converged || !low.converged) throw NonConvergenceError("an envelope did not settle");
        rep.direct_upper = interior_gap(direct.solution, up.field, mask);
        rep.direct_lower = interior_gap(direct.solution, low.field, mask);
        rep.upper_lower = interior_gap(up.field, low.field, mask);
        rep.pass = rep.direct_upper <= tol && rep.direct_lower <= tol && rep.upper_lower <= tol;
    } catch (const NonConvergenceError& e) {
        rep.inconclusive = true;
        rep.note = e.what();
    }
    return rep;
}

}  // namespace nlpt
