#include "nlpt/superharmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nlpt/error.hpp"
#include "nlpt/operator.hpp"

namespace nlpt {

SummabilityExponents summability_exponents(int n, double s, double p) {
    SummabilityExponents e;
    e.t_bar = p < n / s ? (p - 1.0) * n / (n - s * p) : std::numeric_limits<double>::infinity();
    e.q_bar = std::min(n * (p - 1.0) / (n - s), p);
    return e;
}

FieldFunction pointwise_min(const FieldFunction& u, const FieldFunction& v) {
    if (!(u.grid() == v.grid())) throw ConfigError("pointwise_min: fields live on different grids");
    const auto far = FarFieldModel::min_of(u.far(), v.far());
    if (!far)
        throw ConfigError("pointwise_min: far-field models " + u.far().describe() + " and " + v.far().describe() +
                          " have no analytic lower envelope; enlarge the box so both are resolved");
    std::vector<double> w(u.size());
    for (std::size_t c = 0; c < w.size(); ++c) w[c] = std::min(u[c], v[c]);
    return FieldFunction(u.grid_ptr(), std::move(w), *far);
}

FieldFunction truncate_min(const FieldFunction& u, double k) {
    if (!std::isfinite(k)) throw ConfigError("truncate_min: level must be finite");
    std::vector<double> w(u.size());
    for (std::size_t c = 0; c < w.size(); ++c) w[c] = std::min(u[c], k);
    return FieldFunction(u.grid_ptr(), std::move(w), u.far().capped_above(k));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact 1D min-plus transform with cost j^2 h |i - k| along a strided line.
// The running argmin is kept and every value is recomputed from its source,
// so results match a direct evaluation of the same expression.
void cone_sweep(std::vector<double>& line, double j, double h) {
    const std::size_t n = line.size();
    std::vector<double> fwd(n, kInf), bwd(n, kInf);
    std::size_t best = n;
    auto value = [&](std::size_t src, std::size_t at) {
        const double steps = static_cast<double>(src > at ? src - at : at - src);
        return line[src] + cone_cost(j, h, steps);
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (line[i] < kInf && (best == n || line[i] <= value(best, i))) best = i;
        if (best != n) fwd[i] = value(best, i);
    }
    best = n;
    for (std::size_t i = n; i-- > 0;) {
        if (line[i] < kInf && (best == n || line[i] <= value(best, i))) best = i;
        if (best != n) bwd[i] = value(best, i);
    }
    for (std::size_t i = 0; i < n; ++i) line[i] = std::min(fwd[i], bwd[i]);
}

}  // namespace

FieldFunction infimal_convolution(const FieldFunction& u, int j, const RegionMask& region) {
    if (j < 1) throw ConfigError("infimal_convolution: j must be a positive integer");
    if (!(u.grid() == region.grid())) throw ConfigError("infimal_convolution: field and region live on different grids");
    const Grid& g = u.grid();
    const double jd = j;
    std::vector<double> f(g.size(), kInf);
    for (std::size_t c : region.interior()) f[c] = std::min(jd, u[c]);
    const int nx = g.resolution(0);
    const int ny = g.dim() == 2 ? g.resolution(1) : 1;
    std::vector<double> line;
    line.resize(nx);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) line[ix] = f[g.flat(ix, iy)];
        cone_sweep(line, jd, g.spacing(0));
        for (int ix = 0; ix < nx; ++ix) f[g.flat(ix, iy)] = line[ix];
    }
    if (g.dim() == 2) {
        line.resize(ny);
        for (int ix = 0; ix < nx; ++ix) {
            for (int iy = 0; iy < ny; ++iy) line[iy] = f[g.flat(ix, iy)];
            cone_sweep(line, jd, g.spacing(1));
            for (int iy = 0; iy < ny; ++iy) f[g.flat(ix, iy)] = line[iy];
        }
    }
    std::vector<double> out(u.values().begin(), u.values().end());
    for (std::size_t c : region.interior()) out[c] = f[c] - 1.0 / jd;
    return u.with_values(std::move(out));
}

FieldFunction lsc_regularize(const FieldFunction& f) {
    const Grid& g = f.grid();
    std::vector<double> out(f.size());
    const int ry = g.dim() == 2 ? 1 : 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        const auto id = g.index(c);
        double m = f[c];
        for (int dy = -ry; dy <= ry; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                if (g.valid_index(id[0] + dx, id[1] + dy)) m = std::min(m, f[g.flat(id[0] + dx, id[1] + dy)]);
        out[c] = m;
    }
    return f.with_values(std::move(out));
}

namespace {

struct SubDomain {
    std::vector<std::size_t> cells;
    std::string description;
};

// Interior cells whose whole 3^n neighbourhood is interior.
std::vector<char> deep_cells(const RegionMask& mask) {
    const Grid& g = mask.grid();
    std::vector<char> deep(g.size(), 0);
    const int ry = g.dim() == 2 ? 1 : 0;
    for (std::size_t c : mask.interior()) {
        const auto id = g.index(c);
        bool ok = true;
        for (int dy = -ry; dy <= ry && ok; ++dy)
            for (int dx = -1; dx <= 1 && ok; ++dx)
                ok = g.valid_index(id[0] + dx, id[1] + dy) && mask.is_interior(g.flat(id[0] + dx, id[1] + dy));
        deep[c] = ok;
    }
    return deep;
}

std::string describe_point(const Point& x, int dim) {
    std::ostringstream os;
    os << "(" << format_double(x[0]);
    if (dim == 2) os << ", " << format_double(x[1]);
    os << ")";
    return os.str();
}

std::vector<SubDomain> sample_subdomains(const RegionMask& mask, std::size_t count, std::uint64_t seed) {
    const Grid& g = mask.grid();
    const std::vector<char> deep = deep_cells(mask);
    std::vector<std::size_t> pool;
    for (std::size_t c = 0; c < g.size(); ++c)
        if (deep[c]) pool.push_back(c);
    std::vector<SubDomain> out;
    if (pool.size() >= 4) out.push_back({pool, "interior minus one ring"});
    if (pool.empty()) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double extent = 0.0;
    for (int a = 0; a < g.dim(); ++a) extent = std::max(extent, g.bounds(a).length());
    for (int attempt = 0; out.size() < count && attempt < static_cast<int>(count) * 50; ++attempt) {
        const Point c = g.center(pool[pick(rng)]);
        const bool ball = U(rng) < 0.5;
        const double h = g.spacing();
        std::array<double, 2> half{h * (1.0 + U(rng) * extent / (4.0 * h)), h * (1.0 + U(rng) * extent / (4.0 * h))};
        SubDomain d;
        for (std::size_t cell : pool) {
            const Point x = g.center(cell);
            bool in;
            if (ball) {
                in = distance(x, c) < half[0];
            } else {
                in = std::abs(x[0] - c[0]) < half[0] && (g.dim() == 1 || std::abs(x[1] - c[1]) < half[1]);
            }
            if (in) d.cells.push_back(cell);
        }
        if (d.cells.size() < 4) continue;
        std::ostringstream os;
        if (ball)
            os << "ball centre " << describe_point(c, g.dim()) << " radius " << format_double(half[0]);
        else
            os << "box centre " << describe_point(c, g.dim()) << " half-widths " << format_double(half[0])
               << (g.dim() == 2 ? ", " + format_double(half[1]) : std::string());
        d.description = os.str();
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace

SuperharmonicReport superharmonic_check(const FieldFunction& u, const RegionMask& mask, const KernelSpec& spec,
                                        const SuperharmonicOptions& options) {
    if (!(u.grid() == mask.grid())) throw ConfigError("superharmonic_check: field and mask live on different grids");
    SuperharmonicReport rep;
    const double osc = data_oscillation(u.values());
    const FieldFunction reg = lsc_regularize(u);
    for (std::size_t c : mask.interior()) rep.lsc_defect = std::max(rep.lsc_defect, (u[c] - reg[c]) / osc);

    rep.margin = kInf;
    const std::vector<SubDomain> domains = sample_subdomains(mask, options.trial_count, options.seed);
    for (const SubDomain& d : domains) {
        const RegionMask sub = make_mask_from_cells(mask.grid_ptr(), d.cells, 1);
        const SolveReport v = solve_dirichlet(u, Assembly(sub, spec, u.far()), options.solver);
        ++rep.trials;
        if (!v.converged) {
            rep.inconclusive = true;
            continue;
        }
        for (std::size_t c : d.cells) {
            const double m = (u[c] - v.solution[c]) / osc;
            if (m < rep.margin) {
                rep.margin = m;
                rep.witness_cell = c;
                rep.witness_domain = d.description;
            }
        }
    }
    rep.pass = !rep.inconclusive && rep.trials > 0 && rep.margin >= -options.tol;
    return rep;
}

double lt_norm(const FieldFunction& u, std::span<const std::size_t> cells, double t) {
    const double w = u.grid().cell_volume();
    double s = 0.0;
    for (std::size_t c : cells) s += w * std::pow(std::abs(u[c]), t);
    return std::pow(s, 1.0 / t);
}

SummabilityReport summability_report(const FieldFunction& u, const Ball& ball, const KernelSpec& spec) {
    const Grid& g = u.grid();
    if (!ball_in_box(g, Ball{ball.center, 1.5 * ball.radius}))
        throw ConfigError("summability_report: the dilated ball B_{3r/2} leaves the grid box");
    const auto inner = cells_in_ball(g, Ball{ball.center, ball.radius / 8.0});
    const auto core = cells_in_ball(g, ball);
    const auto outer = cells_in_ball(g, Ball{ball.center, 1.5 * ball.radius});
    if (inner.empty()) throw ConfigError("summability_report: B_{r/8} contains no cell centre; refine the grid");

    SummabilityReport rep;
    rep.bars = summability_exponents(g.dim(), spec.s(), spec.p());
    std::vector<double> neg(u.size());
    for (std::size_t c = 0; c < u.size(); ++c) neg[c] = std::max(-u[c], 0.0);
    const FieldFunction u_minus(u.grid_ptr(), std::move(neg), u.far().negated().floored_below(0.0));
    double inf_plus = kInf, sup_minus = 0.0;
    for (std::size_t c : inner) inf_plus = std::min(inf_plus, std::max(u[c], 0.0));
    for (std::size_t c : outer) sup_minus = std::max(sup_minus, u_minus[c]);
    rep.M = inf_plus + tail(u_minus, ball.center, ball.radius / 2.0, spec).value + sup_minus;

    const double s = spec.s();
    std::vector<double> ts;
    if (std::isfinite(rep.bars.t_bar))
        ts = {0.5 * rep.bars.t_bar, 0.9 * rep.bars.t_bar};
    else
        ts = {spec.p(), 2.0 * spec.p()};
    for (double h : {0.5 * s, 0.8 * s})
        for (double q : {0.5 * rep.bars.q_bar, 0.9 * rep.bars.q_bar})
            for (double t : ts) {
                SummabilityEntry e{h, q, t, seminorm(u, core, h, q), lt_norm(u, core, t), 0.0};
                e.ratio = (std::pow(ball.radius, h) * e.seminorm + e.lt_norm) / rep.M;
                if (!std::isfinite(e.seminorm) || !std::isfinite(e.lt_norm)) rep.divergent = true;
                rep.entries.push_back(e);
            }
    return rep;
}

}  // namespace nlpt
