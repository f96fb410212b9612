#include "nlpt/verify.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include "nlpt/error.hpp"
#include "nlpt/obstacle.hpp"
#include "nlpt/operator.hpp"
#include "nlpt/quadrature.hpp"
#include "nlpt/superharmonic.hpp"

namespace nlpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// Short number for labels.
std::string label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

InequalityReport refinement_study(const std::vector<InequalityReport>& runs) {
    if (runs.empty()) throw ConfigError("refinement_study: no runs");
    InequalityReport out = runs.back();
    out.resolutions.clear();
    out.constants.clear();
    bool all_pass = true, all_vacuous = true;
    for (const InequalityReport& r : runs) {
        out.resolutions.insert(out.resolutions.end(), r.resolutions.begin(), r.resolutions.end());
        out.constants.push_back(r.constant);
        all_pass = all_pass && r.pass;
        all_vacuous = all_vacuous && r.vacuous;
        out.precondition = out.precondition && r.precondition;
        if (!r.pass && out.note.empty()) out.note = r.note;
    }
    out.vacuous = all_vacuous;
    bool stable = true;
    if (!all_vacuous) {
        for (std::size_t k = 1; k < runs.size(); ++k) {
            const double a = runs[k - 1].constant, b = runs[k].constant;
            if (runs[k - 1].vacuous || runs[k].vacuous || !(a > 0.0) || !(b > 0.0) ||
                std::max(a, b) > out.stability_factor * std::min(a, b)) {
                stable = false;
                if (out.note.empty())
                    out.note = "constant changed from " + format_double(a) + " to " + format_double(b) +
                               " under refinement";
            }
        }
    }
    out.pass = all_pass && stable;
    return out;
}

// ---------------------------------------------------------------------------
// Poisson formula

namespace {

using Integrand = std::function<double(double)>;

// int_a^b F(t) dt in the variable log t.
double shell_integral(const Integrand& F, double a, double b, double tol) {
    auto G = [&F](double tau) {
        const double t = std::exp(tau);
        return F(t) * t;
    };
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(G, std::log(a), std::log(b), 15, tol);
}

struct SeriesResult {
    double value = 0.0;
    bool divergent = false;
    std::size_t shells = 0;
};

// Sum over shells [t0 2^-(k+1), t0 2^-k] (inward) or [t0 2^k, t0 2^(k+1)] with a
// geometric estimate of the remainder.
SeriesResult shell_series(const Integrand& F, double t0, bool inward, int min_shells, int max_shells, double tol) {
    double S = 0.0, prev_a = 0.0, prev_E = kNaN, E = 0.0;
    int run = 0;
    for (int k = 0; k < max_shells; ++k) {
        const double near = std::ldexp(t0, inward ? -k : k);
        const double far = std::ldexp(t0, inward ? -k - 1 : k + 1);
        const double a = shell_integral(F, std::min(near, far), std::max(near, far), tol);
        if (!std::isfinite(a)) return {kNaN, true, static_cast<std::size_t>(k + 1)};
        S += a;
        double R = kInf;
        if (a == 0.0) {
            R = 0.0;
        } else if (k > 0 && prev_a != 0.0) {
            const double q = a / prev_a;
            if (std::abs(q) < 0.99) R = a * q / (1.0 - q);
        }
        E = S + R;
        const bool cauchy =
            std::isfinite(E) && std::isfinite(prev_E) && std::abs(E - prev_E) <= 1e-3 * std::abs(E);
        run = cauchy ? run + 1 : 0;
        prev_a = a;
        prev_E = E;
        if (k + 1 >= min_shells && run >= 5 && std::abs(R) <= 1e-14 * std::abs(E))
            return {E, false, static_cast<std::size_t>(k + 1)};
    }
    return {E, run < 5, static_cast<std::size_t>(max_shells)};
}

// Radial integrand of the exterior integral in t = |y| - 1.
Integrand radial_integrand(const PoissonOracle& o, const ValueRule& g, const Point& x) {
    const double s = o.s;
    if (o.dim == 1) {
        return [s, &g, x](double t) {
            const double rho = 1.0 + t;
            const double w = std::pow(t * (2.0 + t), -s);
            return w * (g(Point{rho, 0.0}) / (rho - x[0]) + g(Point{-rho, 0.0}) / (rho + x[0]));
        };
    }
    const int M = o.angular_points;
    return [s, &g, x, M](double t) {
        const double rho = 1.0 + t;
        double sum = 0.0;
        for (int m = 0; m < M; ++m) {
            const double th = 2.0 * kPi * m / M;
            const Point y{rho * std::cos(th), rho * std::sin(th)};
            const Point d = x - y;
            sum += g(y) / (d[0] * d[0] + d[1] * d[1]);
        }
        return rho * std::pow(t * (2.0 + t), -s) * (2.0 * kPi / M) * sum;
    };
}

void require_oracle_args(int dim, double s) {
    if (dim != 1 && dim != 2) throw ConfigError("poisson oracle: dimension must be 1 or 2");
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("poisson oracle: s must lie in (0, 1)");
}

}  // namespace

PoissonValue poisson_formula(const PoissonOracle& oracle, const ValueRule& g, const Point& x) {
    require_oracle_args(oracle.dim, oracle.s);
    const double r2 = x[0] * x[0] + (oracle.dim == 2 ? x[1] * x[1] : 0.0);
    if (!(r2 < 1.0)) throw ConfigError("poisson_formula: x must lie in the open unit ball");
    const Integrand F = radial_integrand(oracle, g, x);
    const SeriesResult inner = shell_series(F, 1.0, true, 8, 44, oracle.shell_tol);
    const SeriesResult outer = shell_series(F, 1.0, false, 24, 400, oracle.shell_tol);
    PoissonValue v;
    v.shells = inner.shells + outer.shells;
    if (inner.divergent || outer.divergent) {
        v.divergent = true;
        v.value = kNaN;
        v.where = inner.divergent ? "boundary" : "infinity";
        return v;
    }
    v.value = oracle.constant * std::pow(1.0 - r2, oracle.s) * (inner.value + outer.value);
    return v;
}

PoissonOracle calibrate_poisson(int dim, double s) {
    require_oracle_args(dim, s);
    PoissonOracle o;
    o.dim = dim;
    o.s = s;
    o.constant = 1.0;
    const ValueRule one = [](const Point&) { return 1.0; };
    const PoissonValue j0 = poisson_formula(o, one, Point{0.0, 0.0});
    if (j0.divergent || !(j0.value > 0.0)) throw NumericalError("calibrate_poisson: the reference integral failed");
    o.constant = 1.0 / j0.value;
    const std::vector<Point> probes =
        dim == 1 ? std::vector<Point>{{-0.9, 0.0}, {-0.5, 0.0}, {0.2, 0.0}, {0.6, 0.0}, {0.95, 0.0}}
                 : std::vector<Point>{{0.5, 0.0}, {-0.3, 0.4}, {0.0, -0.7}, {0.6, 0.6}, {-0.2, -0.1}};
    for (const Point& x : probes) {
        const PoissonValue v = poisson_formula(o, one, x);
        o.calibration_residual = std::max(o.calibration_residual, v.divergent ? kInf : std::abs(v.value - 1.0));
    }
    if (!(o.calibration_residual <= 1e-6))
        throw NumericalError("calibrate_poisson: calibration residual " + format_double(o.calibration_residual) +
                             " exceeds 1e-6");
    return o;
}

PoissonComparison poisson_vs_solver(const ValueRule& g, const FarFieldModel& far, int dim, double s,
                                    const std::vector<int>& resolutions, double half_width, const SolverConfig& cfg) {
    if (resolutions.empty()) throw ConfigError("poisson_vs_solver: no resolutions");
    if (!(half_width > 1.0)) throw ConfigError("poisson_vs_solver: the box must contain the unit ball");
    const PoissonOracle oracle = calibrate_poisson(dim, s);
    const KernelSpec spec = KernelSpec::gagliardo(dim, s, 2.0);
    PoissonComparison rep;
    rep.s = s;
    rep.calibration_residual = oracle.calibration_residual;
    rep.resolutions = resolutions;
    double scale = 0.0;
    std::vector<double> raw;
    for (int N : resolutions) {
        const std::vector<Interval> box(dim, Interval{-half_width, half_width});
        const GridPtr grid = build_grid(box, std::vector<int>(dim, N));
        const RegionMask mask = make_mask(grid, [](const Point& x) { return norm(x) < 1.0; }, 1);
        const FieldFunction data = sample_field(grid, g, far);
        for (std::size_t c = 0; c < data.size(); ++c)
            if (!mask.is_interior(c)) scale = std::max(scale, std::abs(data[c]));
        const SolveReport r = solve_dirichlet(data, mask, spec, cfg);
        if (!r.converged) throw NonConvergenceError("poisson_vs_solver: solve at N = " + std::to_string(N) + " failed");
        double worst = 0.0;
        for (std::size_t c : mask.interior()) {
            const PoissonValue v = poisson_formula(oracle, g, grid->center(c));
            if (v.divergent) throw DivergenceError("poisson_vs_solver: the formula diverges at the " + v.where);
            worst = std::max(worst, std::abs(r.solution[c] - v.value));
        }
        raw.push_back(worst);
    }
    rep.data_scale = scale > 0.0 ? scale : 1.0;
    for (double d : raw) rep.discrepancies.push_back(d / rep.data_scale);
    rep.decreasing = true;
    for (std::size_t k = 1; k < raw.size(); ++k) rep.decreasing = rep.decreasing && raw[k] < raw[k - 1];
    const bool exact = std::all_of(rep.discrepancies.begin(), rep.discrepancies.end(), [](double d) { return d <= 1e-6; });
    rep.pass = rep.discrepancies.back() <= 0.02 && (rep.decreasing || exact);
    return rep;
}

BlowupReport blowup_probe(const PoissonOracle& oracle, double exponent, const std::vector<double>& deltas,
                          const std::vector<double>& radii) {
    if (deltas.size() < 3) throw ConfigError("blowup_probe: need at least 3 truncation levels");
    for (std::size_t k = 0; k < deltas.size(); ++k)
        if (!(deltas[k] > 0.0 && deltas[k] < 1.0) || (k > 0 && !(deltas[k] < deltas[k - 1])))
            throw ConfigError("blowup_probe: truncation levels must decrease inside (0, 1)");
    for (std::size_t k = 0; k < radii.size(); ++k)
        if (!(radii[k] > 1.0 + deltas.front()) || (k > 0 && !(radii[k] > radii[k - 1])))
            throw ConfigError("blowup_probe: outer radii must increase beyond 1 + delta_0");
    BlowupReport rep;
    rep.s = oracle.s;
    rep.exponent = exponent;
    rep.deltas = deltas;
    rep.radii = radii;
    const ValueRule g = [exponent](const Point& y) { return std::pow(std::abs(y[0] * y[0] + y[1] * y[1] - 1.0), exponent); };
    const Integrand F = radial_integrand(oracle, g, Point{0.0, 0.0});
    // Integral over [a, b] in ratio-2 shells.
    auto band = [&](double a, double b) {
        double sum = 0.0;
        for (double lo = a; lo < b;) {
            const double hi = std::min(2.0 * lo, b);
            sum += shell_integral(F, lo, hi, oracle.shell_tol);
            lo = hi;
        }
        return oracle.constant * sum;
    };
    std::vector<double> logs;
    for (double d : deltas) {
        rep.inner_values.push_back(band(d, 1.0));
        logs.push_back(std::log10(1.0 / d));
    }
    rep.rate_per_decade = slope(logs, rep.inner_values);
    rep.growing = true;
    for (std::size_t k = 1; k < deltas.size(); ++k) {
        const double inc = rep.inner_values[k] - rep.inner_values[k - 1];
        rep.growing = rep.growing && inc > 0.0;
        if (k >= 2) {
            const double ratio = inc / (rep.inner_values[k - 1] - rep.inner_values[k - 2]);
            rep.increment_ratios.push_back(ratio);
            rep.growing = rep.growing && ratio >= 0.5;
        }
    }
    for (double R : radii) rep.outer_values.push_back(band(deltas.front(), R - 1.0));
    rep.outer_converges = radii.size() >= 3;
    for (std::size_t k = 2; k < radii.size(); ++k) {
        const double a = rep.outer_values[k - 1] - rep.outer_values[k - 2];
        const double b = rep.outer_values[k] - rep.outer_values[k - 1];
        rep.outer_converges = rep.outer_converges && std::abs(b) <= 0.5 * std::abs(a);
    }
    if (radii.size() >= 2) {
        const double last = rep.outer_values.back() - rep.outer_values[radii.size() - 2];
        rep.outer_converges = rep.outer_converges && std::abs(last) <= 1e-3 * std::abs(rep.outer_values.back());
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Inequality checks

double cutoff_profile(const Point& x, const Ball& ball) {
    const double d = distance(x, ball.center) / ball.radius;
    return std::clamp(4.0 * (0.75 - d), 0.0, 1.0);
}

namespace {

std::vector<std::size_t> interior_ball(const RegionMask& mask, const Ball& ball, const char* who) {
    if (!(ball.radius > 0.0)) throw ConfigError(std::string(who) + ": radius must be positive");
    const std::vector<std::size_t> cells = cells_in_ball(mask.grid(), ball);
    if (cells.empty()) throw ConfigError(std::string(who) + ": the ball contains no cell centre; refine the grid");
    for (std::size_t c : cells)
        if (!mask.is_interior(c))
            throw ConfigError(std::string(who) + ": the ball is not compactly inside the interior");
    return cells;
}

// Supersolution test of u (sign +1) or -u (sign -1) on the given cells.
bool hypothesis(const FieldFunction& u, std::span<const std::size_t> cells, const KernelSpec& spec, int sign,
                double tol) {
    const RegionMask sub = make_mask_from_cells(u.grid_ptr(), cells, 1);
    const FieldFunction v = sign > 0 ? u : u.negated();
    return supersolution_check(v, Assembly(sub, spec, v.far()), tol).pass;
}

FieldFunction positive_part(const FieldFunction& u) {
    std::vector<double> v(u.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = std::max(u[c], 0.0);
    return FieldFunction(u.grid_ptr(), std::move(v), u.far().floored_below(0.0));
}

double mean_power(const FieldFunction& u, std::span<const std::size_t> cells, double q, bool absolute) {
    double s = 0.0;
    for (std::size_t c : cells) s += std::pow(absolute ? std::abs(u[c]) : std::max(u[c], 0.0), q);
    return std::pow(s / static_cast<double>(cells.size()), 1.0 / q);
}

void finish(InequalityReport& r, const std::string& failure) {
    r.resolutions = {r.resolutions.empty() ? 0 : r.resolutions.front()};
    if (r.vacuous) {
        r.constant = 0.0;
    } else {
        r.constant = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? kInf : 0.0);
    }
    r.constants = {r.constant};
    bool ok = r.precondition;
    if (!r.vacuous) ok = ok && r.rhs > 0.0 && std::isfinite(r.constant) && r.constant <= r.cap;
    if (!r.precondition && r.note.empty()) r.note = failure;
    if (r.precondition && !ok && r.note.empty())
        r.note = "constant " + format_double(r.constant) + " is infinite or above the cap";
    r.pass = ok;
}

}  // namespace

InequalityReport caccioppoli_check(const FieldFunction& u, const RegionMask& mask, const Ball& ball, double k,
                                   const KernelSpec& spec, Truncation side, double tol) {
    if (!(u.grid() == mask.grid())) throw ConfigError("caccioppoli_check: field and mask live on different grids");
    const std::vector<std::size_t> cells = interior_ball(mask, ball, "caccioppoli_check");
    const Grid& g = u.grid();
    const double p = spec.p(), sp = spec.sp();
    const double decay = sp - (p - 1.0) * u.far().growth();
    if (!(decay > 0.0)) throw ConfigError("caccioppoli_check: the far field is outside the tail space");
    const bool below = side == Truncation::Below;
    auto trunc = [k, below](double v) { return below ? std::max(k - v, 0.0) : std::max(v - k, 0.0); };

    InequalityReport r;
    r.name = below ? "caccioppoli (supersolution)" : "caccioppoli (subsolution)";
    r.estimate = "Caccioppoli estimate with tail";
    r.resolutions = {g.resolution(0)};
    r.precondition = hypothesis(u, cells, spec, below ? 1 : -1, tol);

    const double vol = g.cell_volume();
    const std::size_t m = cells.size();
    std::vector<double> w(m), phi(m);
    std::vector<Point> x(m);
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = g.center(cells[i]);
        w[i] = trunc(u[cells[i]]);
        phi[i] = cutoff_profile(x[i], ball);
    }
    double lhs = 0.0, local = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mass += vol * w[i] * std::pow(phi[i], p);
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            const double K = vol * vol * kernel_eval(spec, x[i], x[j]);
            lhs += K * std::pow(std::abs(w[i] * phi[i] - w[j] * phi[j]), p);
            local += K * std::pow(std::max(w[i], w[j]), p) * std::pow(std::abs(phi[i] - phi[j]), p);
        }
    }
    // sup over the support of phi of the kernel mass of w^(p-1) outside the ball.
    double sup_int = 0.0;
    std::vector<char> inside(g.size(), 0);
    for (std::size_t c : cells) inside[c] = 1;
    for (std::size_t i = 0; i < m; ++i) {
        if (phi[i] <= 0.0) continue;
        double I = 0.0;
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (inside[c]) continue;
            const double wc = trunc(u[c]);
            if (wc > 0.0) I += vol * kernel_eval(spec, g.center(c), x[i]) * std::pow(wc, p - 1.0);
        }
        const ExteriorRule rule = exterior_rule(g, x[i], sp, decay);
        for (const PolarNode& nd : rule.nodes) {
            const double wf = trunc(u.far().value(nd.y));
            if (wf > 0.0) I += nd.w * spec.symmetric_coefficient(x[i], nd.y) * std::pow(wf, p - 1.0);
        }
        sup_int = std::max(sup_int, I);
    }
    r.lhs = lhs;
    r.rhs = local + mass * sup_int;
    r.vacuous = lhs == 0.0 && r.rhs == 0.0;
    r.details = {{"level", k}, {"local_term", local}, {"tail_term", mass * sup_int}};
    finish(r, below ? "input is not a supersolution on the ball" : "input is not a subsolution on the ball");
    return r;
}

InequalityReport local_boundedness_check(const FieldFunction& u, const RegionMask& mask, const Ball& ball,
                                         const KernelSpec& spec, const std::vector<double>& deltas, double tol) {
    if (!(u.grid() == mask.grid())) throw ConfigError("local_boundedness_check: field and mask live on different grids");
    if (deltas.empty()) throw ConfigError("local_boundedness_check: empty delta grid");
    for (double d : deltas)
        if (!(d > 0.0 && d <= 1.0)) throw ConfigError("local_boundedness_check: delta must lie in (0, 1]");
    const std::vector<std::size_t> cells = interior_ball(mask, ball, "local_boundedness_check");
    const std::vector<std::size_t> half = cells_in_ball(u.grid(), Ball{ball.center, ball.radius / 2.0});
    if (half.empty()) throw ConfigError("local_boundedness_check: B_{r/2} contains no cell centre");
    const double p = spec.p(), n = spec.dim(), s = spec.s();
    const double gamma = (p - 1.0) * n / (s * p * p);

    InequalityReport r;
    r.name = "local boundedness";
    r.estimate = "sup estimate with tail, delta interpolation";
    r.resolutions = {u.grid().resolution(0)};
    r.precondition = hypothesis(u, cells, spec, -1, tol);

    double sup = -kInf;
    for (std::size_t c : half) sup = std::max(sup, u[c]);
    const double T = tail(positive_part(u), ball.center, ball.radius / 2.0, spec).value;
    const double A = mean_power(u, cells, p, false);
    r.details = {{"gamma", gamma}, {"sup", sup}, {"tail", T}, {"average", A}};
    if (sup <= 0.0) {
        r.vacuous = true;
        finish(r, "input is not a subsolution on the ball");
        return r;
    }
    double best = -1.0, best_delta = deltas.front();
    for (double d : deltas) {
        const double num = std::max(sup - d * T, 0.0);
        const double den = std::pow(d, -gamma) * A;
        const double c = den > 0.0 ? num / den : (num > 0.0 ? kInf : 0.0);
        r.details.push_back({"c(delta=" + label(d) + ")", c});
        if (c > best) {
            best = c;
            best_delta = d;
        }
    }
    r.lhs = std::max(sup - best_delta * T, 0.0);
    r.rhs = std::pow(best_delta, -gamma) * A;
    r.details.push_back({"delta_max", best_delta});
    finish(r, "input is not a subsolution on the ball");
    return r;
}

InequalityReport weak_harnack_check(const FieldFunction& u, const RegionMask& mask, const Point& center, double r,
                                    double R, const KernelSpec& spec, const std::vector<double>& ts, double tol) {
    if (!(u.grid() == mask.grid())) throw ConfigError("weak_harnack_check: field and mask live on different grids");
    if (!(r > 0.0) || !(R >= 2.0 * r)) throw ConfigError("weak_harnack_check: need 0 < r and B_r inside B_{R/2}");
    if (ts.empty()) throw ConfigError("weak_harnack_check: empty exponent grid");
    const double p = spec.p();
    const double t_bar = summability_exponents(spec.dim(), spec.s(), p).t_bar;
    for (double t : ts)
        if (!(t > 0.0) || !(t < t_bar))
            throw ConfigError("weak_harnack_check: exponent t = " + format_double(t) +
                              " must lie in (0, t_bar) with t_bar = (p-1) n / (n - sp) = " + format_double(t_bar));
    const std::vector<std::size_t> big = interior_ball(mask, Ball{center, R}, "weak_harnack_check");
    const std::vector<std::size_t> small = cells_in_ball(u.grid(), Ball{center, r});
    const std::vector<std::size_t> dbl = cells_in_ball(u.grid(), Ball{center, 2.0 * r});
    if (small.empty()) throw ConfigError("weak_harnack_check: B_r contains no cell centre");

    InequalityReport rep;
    rep.name = "weak harnack";
    rep.estimate = "nonlocal weak Harnack inequality";
    rep.resolutions = {u.grid().resolution(0)};
    const double osc = data_oscillation(u.values());
    double lowest = kInf;
    for (std::size_t c : big) lowest = std::min(lowest, u[c]);
    rep.precondition = lowest >= -tol * osc && hypothesis(u, big, spec, 1, tol);

    double inf2 = kInf;
    for (std::size_t c : dbl) inf2 = std::min(inf2, u[c]);
    inf2 = std::max(inf2, 0.0);
    std::vector<double> neg(u.size());
    for (std::size_t c = 0; c < u.size(); ++c) neg[c] = std::max(-u[c], 0.0);
    const FieldFunction u_minus(u.grid_ptr(), std::move(neg), u.far().negated().floored_below(0.0));
    const double tail_R = tail(u_minus, center, R, spec).value;
    const double rhs = inf2 + std::pow(r / R, spec.sp() / (p - 1.0)) * tail_R;
    rep.details = {{"t_bar", t_bar}, {"inf_B2r", inf2}, {"tail_R", tail_R}};
    double worst = -1.0;
    for (double t : ts) {
        const double lhs = mean_power(u, small, t, false);
        const double c = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInf : 0.0);
        rep.details.push_back({"c(t=" + label(t) + ")", c});
        if (c > worst) {
            worst = c;
            rep.lhs = lhs;
        }
    }
    rep.rhs = rhs;
    rep.vacuous = rep.lhs == 0.0 && rhs == 0.0;
    finish(rep, "input is negative on B_R or not a supersolution there");
    return rep;
}

InequalityReport holder_check(const FieldFunction& u, const RegionMask& mask, const Point& center, double r,
                              const std::vector<double>& radii, const KernelSpec& spec, double tol) {
    if (!(u.grid() == mask.grid())) throw ConfigError("holder_check: field and mask live on different grids");
    if (radii.size() < 3) throw ConfigError("holder_check: need at least 3 radii");
    for (double rho : radii)
        if (!(rho > 0.0 && rho <= r)) throw ConfigError("holder_check: radii must lie in (0, r]");
    const std::vector<std::size_t> outer = interior_ball(mask, Ball{center, 2.0 * r}, "holder_check");

    InequalityReport rep;
    rep.name = "holder";
    rep.estimate = "oscillation decay of solutions";
    rep.resolutions = {u.grid().resolution(0)};
    rep.precondition = hypothesis(u, outer, spec, 1, tol) && hypothesis(u, outer, spec, -1, tol);

    std::vector<double> osc;
    for (double rho : radii) {
        const std::vector<std::size_t> cells = cells_in_ball(u.grid(), Ball{center, rho});
        if (cells.empty()) throw ConfigError("holder_check: B_rho contains no cell centre; refine the grid");
        double lo = kInf, hi = -kInf;
        for (std::size_t c : cells) {
            lo = std::min(lo, u[c]);
            hi = std::max(hi, u[c]);
        }
        osc.push_back(hi - lo);
    }
    const double base = tail(u, center, r, spec).value + mean_power(u, outer, spec.p(), true);
    rep.details = {{"base", base}};
    if (std::all_of(osc.begin(), osc.end(), [](double o) { return o == 0.0; })) {
        rep.vacuous = true;
        finish(rep, "input is not a solution on B_2r");
        return rep;
    }
    if (std::any_of(osc.begin(), osc.end(), [](double o) { return o == 0.0; })) {
        rep.lhs = 1.0;
        rep.rhs = 0.0;
        rep.note = "oscillation vanishes on some balls only; no exponent can be fitted";
        finish(rep, "input is not a solution on B_2r");
        return rep;
    }
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        lx.push_back(std::log(radii[k]));
        ly.push_back(std::log(osc[k]));
    }
    const double alpha = slope(lx, ly);
    rep.details.push_back({"alpha", alpha});
    double worst = -1.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double rhs = std::pow(radii[k] / r, alpha) * base;
        const double c = osc[k] / rhs;
        if (c > worst) {
            worst = c;
            rep.lhs = osc[k];
            rep.rhs = rhs;
        }
    }
    finish(rep, "input is not a solution on B_2r");
    if (!(alpha > 0.0)) {
        rep.pass = false;
        if (rep.note.empty()) rep.note = "fitted exponent " + format_double(alpha) + " is not positive";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Algebraic inequalities

namespace {

struct AlgebraicCase {
    const char* name;
    const char* estimate;
    std::vector<double> ps;
    double cap;
    // Ratio(s) for one random sample; the constant is max over samples of the result.
    std::function<double(double, double, double, double, double)> ratio;
};

double power_map(double a, double p) { return std::pow(std::abs(a), p - 2.0) * a; }

std::vector<AlgebraicCase> algebraic_cases(double corruption) {
    std::vector<AlgebraicCase> cases;
    cases.push_back({"pairing difference (1 < p <= 2)", "Hoelder continuity of L for p <= 2, constant 4",
                     {1.1, 1.5, 1.9, 2.0}, 4.0,
                     [corruption](double p, double a, double b, double a2, double b2) {
                         const double lhs = std::abs(corruption * l_pairing(a, b, p) - l_pairing(a2, b2, p));
                         const double rhs = std::pow(std::abs(a - a2 - b + b2), p - 1.0);
                         return rhs > 0.0 ? lhs / rhs : 0.0;
                     }});
    cases.push_back({"pairing difference (p >= 2)", "Lipschitz-type bound of L for p >= 2",
                     {2.0, 2.5, 3.0, 5.0}, 1e6,
                     [corruption](double p, double a, double b, double a2, double) {
                         const double lhs = std::abs(corruption * l_pairing(a, b, p) - l_pairing(a2, b, p));
                         const double rhs = std::pow(std::abs(a - a2), p - 1.0) +
                                            std::abs(a - a2) * std::pow(std::abs(a - b), p - 2.0);
                         return rhs > 0.0 ? lhs / rhs : 0.0;
                     }});
    cases.push_back({"monotone structure", "two-sided bound for (|a|^(p-2)a - |b|^(p-2)b)(a - b)",
                     {1.1, 1.5, 2.0, 3.0, 5.0}, 1e6,
                     [](double p, double a, double b, double, double) {
                         if (a == b) return 0.0;
                         const double num = (power_map(a, p) - power_map(b, p)) * (a - b);
                         const double den = std::pow(std::abs(a) + std::abs(b), p - 2.0) * (a - b) * (a - b);
                         const double q = num / den;
                         return q > 0.0 ? std::max(q, 1.0 / q) : kInf;
                     }});
    return cases;
}

std::vector<InequalityReport> algebraic_impl(std::size_t samples, std::uint64_t seed, double corruption) {
    std::vector<InequalityReport> out;
    for (const AlgebraicCase& ac : algebraic_cases(corruption)) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(-3.0, 3.0);
        std::vector<InequalityReport> runs;
        for (std::size_t n : {samples, 2 * samples}) {
            InequalityReport r;
            r.name = ac.name;
            r.estimate = ac.estimate;
            r.cap = ac.cap;
            r.resolutions = {static_cast<int>(n)};
            double c = 0.0;
            for (double p : ac.ps)
                for (std::size_t t = 0; t < n; ++t) {
                    const double a = U(rng), b = U(rng), a2 = U(rng), b2 = U(rng);
                    c = std::max(c, ac.ratio(p, a, b, a2, b2));
                }
            r.lhs = c;
            r.rhs = 1.0;
            finish(r, "");
            runs.push_back(r);
        }
        out.push_back(refinement_study(runs));
    }
    return out;
}

}  // namespace

std::vector<InequalityReport> algebraic_reports(std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw ConfigError("algebraic_reports: need at least one sample");
    return algebraic_impl(samples, seed, 1.0);
}

// ---------------------------------------------------------------------------
// Suites

Suite parse_suite(const std::string& name) {
    if (name == "algebraic") return Suite::Algebraic;
    if (name == "caccioppoli") return Suite::Caccioppoli;
    if (name == "harnack") return Suite::Harnack;
    if (name == "holder") return Suite::Holder;
    if (name == "poisson") return Suite::Poisson;
    if (name == "blowup") return Suite::Blowup;
    if (name == "all") return Suite::All;
    throw ConfigError("unknown suite '" + name + "' (algebraic|caccioppoli|harnack|holder|poisson|blowup|all)");
}

std::string to_string(Suite suite) {
    switch (suite) {
        case Suite::Algebraic:
            return "algebraic";
        case Suite::Caccioppoli:
            return "caccioppoli";
        case Suite::Harnack:
            return "harnack";
        case Suite::Holder:
            return "holder";
        case Suite::Poisson:
            return "poisson";
        case Suite::Blowup:
            return "blowup";
        case Suite::All:
            break;
    }
    return "all";
}

namespace {

double bump(const Point& y, const Point& c, double radius) {
    const double r2 = ((y[0] - c[0]) * (y[0] - c[0]) + (y[1] - c[1]) * (y[1] - c[1])) / (radius * radius);
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
}

// Unit ball in the box [-2, 2]^n.
RegionMask unit_ball(int dim, int N) {
    const GridPtr grid = build_grid(std::vector<Interval>(dim, Interval{-2.0, 2.0}), std::vector<int>(dim, N));
    return make_mask(grid, [](const Point& x) { return norm(x) < 1.0; }, 1);
}

struct Solved {
    RegionMask mask;
    FieldFunction u;
};

// Dirichlet solution for a bump of exterior data centred at (1.5, 0).
Solved bump_solution(const SuiteOptions& o, int N) {
    RegionMask mask = unit_ball(o.spec.dim(), N);
    const FieldFunction g = sample_field(
        mask.grid_ptr(), [](const Point& y) { return norm(y) >= 1.0 ? bump(y, Point{1.5, 0.0}, 0.3) : 0.0; },
        FarFieldModel::zero());
    SolveReport r = solve_dirichlet(g, mask, o.spec, o.solver);
    if (!r.converged) throw NonConvergenceError("verify: Dirichlet solve at N = " + std::to_string(N) + " failed");
    return {std::move(mask), std::move(r.solution)};
}

// Obstacle solution for a bump obstacle of height 1 on B_{1/2} and zero data.
Solved obstacle_solution(const SuiteOptions& o, int N) {
    RegionMask mask = unit_ball(o.spec.dim(), N);
    const FieldFunction g = sample_field(mask.grid_ptr(), [](const Point&) { return 0.0; }, FarFieldModel::zero());
    const FieldFunction h =
        sample_field(mask.grid_ptr(), [](const Point& y) { return bump(y, Point{0.0, 0.0}, 0.5); }, FarFieldModel::zero());
    ObstacleReport r = solve_obstacle(ObstacleProblem{g, h, mask}, o.spec, o.solver);
    if (!r.solve.converged)
        throw NonConvergenceError("verify: obstacle solve at N = " + std::to_string(N) + " failed");
    return {std::move(mask), std::move(r.solve.solution)};
}

double ball_mean(const FieldFunction& u, const Ball& ball) {
    const auto cells = cells_in_ball(u.grid(), ball);
    double s = 0.0;
    for (std::size_t c : cells) s += u[c];
    return s / static_cast<double>(cells.size());
}

std::vector<double> weak_harnack_exponents(const KernelSpec& spec) {
    const double t_bar = summability_exponents(spec.dim(), spec.s(), spec.p()).t_bar;
    if (std::isfinite(t_bar)) return {0.5 * t_bar, 0.9 * t_bar};
    return {spec.p(), 2.0 * spec.p()};
}

const Ball kCaccioppoliBall{{0.0, 0.0}, 0.5};
const std::vector<double> kDeltas{1.0, 0.5, 0.1, 0.01};
constexpr double kHarnackR = 0.8;
constexpr double kHarnackr = 0.2;
constexpr double kHolderR = 0.4;

std::vector<double> holder_radii() { return {kHolderR, kHolderR / 2.0, kHolderR / 4.0, kHolderR / 8.0}; }

using Task = std::function<std::vector<InequalityReport>()>;

std::vector<InequalityReport> run_tasks(const std::vector<Task>& tasks, unsigned threads) {
    std::vector<std::vector<InequalityReport>> results(tasks.size());
    if (threads <= 1 || tasks.size() <= 1) {
        for (std::size_t k = 0; k < tasks.size(); ++k) results[k] = tasks[k]();
    } else {
        std::vector<std::future<std::vector<InequalityReport>>> pending;
        std::size_t next = 0;
        while (next < tasks.size() || !pending.empty()) {
            while (next < tasks.size() && pending.size() < threads)
                pending.push_back(std::async(std::launch::async, tasks[next++]));
            // Collect in submission order so the output order is fixed.
            const std::size_t done = next - pending.size();
            results[done] = pending.front().get();
            pending.erase(pending.begin());
        }
    }
    std::vector<InequalityReport> out;
    for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
    return out;
}

InequalityReport poisson_calibration_report(const KernelSpec& spec, double perturbation) {
    PoissonOracle o = calibrate_poisson(spec.dim(), spec.s());
    InequalityReport r;
    r.name = "poisson calibration";
    r.estimate = "datum 1 reproduces u = 1 through the Poisson formula";
    r.resolutions = {0};
    double residual = o.calibration_residual;
    if (perturbation != 1.0) {
        o.constant *= perturbation;
        const ValueRule one = [](const Point&) { return 1.0; };
        residual = std::abs(poisson_formula(o, one, Point{0.0, 0.0}).value - 1.0);
    }
    r.lhs = residual;
    r.rhs = 1e-6;
    r.cap = 1.0;
    r.details = {{"constant", o.constant}, {"residual", residual}};
    finish(r, "");
    if (!r.pass) r.note = "calibration residual " + format_double(residual) + " exceeds 1e-6";
    return r;
}

InequalityReport poisson_solver_report(const SuiteOptions& o) {
    const int dim = o.spec.dim();
    const ValueRule g = [](const Point& y) { return norm(y) >= 1.0 ? bump(y, Point{1.5, 0.0}, 0.3) : 0.0; };
    const PoissonComparison c =
        poisson_vs_solver(g, FarFieldModel::zero(), dim, o.spec.s(), o.poisson_resolutions, 2.0, o.solver);
    InequalityReport r;
    r.name = "poisson formula vs solver";
    r.estimate = "p = 2 solutions agree with the Poisson formula on the ball";
    r.resolutions = c.resolutions;
    r.constants = c.discrepancies;
    r.lhs = c.discrepancies.back();
    r.rhs = 0.02;
    r.constant = r.lhs / r.rhs;
    r.cap = 1.0;
    r.pass = c.pass;
    r.details = {{"calibration_residual", c.calibration_residual}, {"decreasing", c.decreasing ? 1.0 : 0.0}};
    if (!c.pass) r.note = "discrepancy " + format_double(r.lhs) + " not decreasing or above 2%";
    return r;
}

InequalityReport blowup_report(const KernelSpec& spec, double exponent) {
    const PoissonOracle o = calibrate_poisson(spec.dim(), spec.s());
    const BlowupReport b =
        blowup_probe(o, exponent, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, {2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0});
    InequalityReport r;
    r.name = "boundary blow-up";
    r.estimate = "truncated Poisson integrals of ||y|^2 - 1|^(s-1) grow without bound";
    r.resolutions = {0};
    r.lhs = b.inner_values.back();
    r.rhs = b.inner_values.front();
    r.constant = b.rate_per_decade;
    r.cap = kInf;
    r.pass = b.growing && b.outer_converges;
    r.details = {{"exponent", exponent}, {"rate_per_decade", b.rate_per_decade}, {"outer_limit", b.outer_values.back()}};
    for (std::size_t k = 0; k < b.increment_ratios.size(); ++k)
        r.details.push_back({"increment_ratio_" + std::to_string(k), b.increment_ratios[k]});
    if (!b.growing) r.note = "truncated integrals settle (plateau)";
    else if (!b.outer_converges) r.note = "outer integrals do not settle";
    return r;
}

}  // namespace

std::vector<InequalityReport> run_suite(Suite suite, const SuiteOptions& o) {
    const bool all = suite == Suite::All;
    const int N = o.resolution;
    const bool need_bump = all || suite == Suite::Caccioppoli || suite == Suite::Harnack || suite == Suite::Holder;
    const bool need_obstacle = all || suite == Suite::Harnack;
    std::vector<Solved> bumps, obstacles;
    if (need_bump)
        for (int n : {N, 2 * N}) bumps.push_back(bump_solution(o, n));
    if (need_obstacle)
        for (int n : {N, 2 * N}) obstacles.push_back(obstacle_solution(o, n));
    const KernelSpec& spec = o.spec;

    std::vector<Task> tasks;
    if (all || suite == Suite::Algebraic) tasks.push_back([] { return algebraic_reports(); });
    if (all || suite == Suite::Caccioppoli) {
        for (Truncation side : {Truncation::Below, Truncation::Above})
            tasks.push_back([&bumps, &spec, side] {
                const double k = ball_mean(bumps.front().u, kCaccioppoliBall);
                std::vector<InequalityReport> runs;
                for (const Solved& b : bumps) runs.push_back(caccioppoli_check(b.u, b.mask, kCaccioppoliBall, k, spec, side));
                return std::vector<InequalityReport>{refinement_study(runs)};
            });
    }
    if (all || suite == Suite::Harnack) {
        tasks.push_back([&bumps, &spec] {
            std::vector<InequalityReport> runs;
            for (const Solved& b : bumps) runs.push_back(local_boundedness_check(b.u, b.mask, kCaccioppoliBall, spec, kDeltas));
            return std::vector<InequalityReport>{refinement_study(runs)};
        });
        tasks.push_back([&obstacles, &spec] {
            std::vector<InequalityReport> runs;
            for (const Solved& b : obstacles)
                runs.push_back(weak_harnack_check(b.u, b.mask, Point{0.0, 0.0}, kHarnackr, kHarnackR, spec,
                                                  weak_harnack_exponents(spec)));
            return std::vector<InequalityReport>{refinement_study(runs)};
        });
    }
    if (all || suite == Suite::Holder) {
        tasks.push_back([&bumps, &spec] {
            std::vector<InequalityReport> runs;
            for (const Solved& b : bumps) runs.push_back(holder_check(b.u, b.mask, Point{0.0, 0.0}, kHolderR, holder_radii(), spec));
            return std::vector<InequalityReport>{refinement_study(runs)};
        });
    }
    if (all || suite == Suite::Poisson) {
        tasks.push_back([&spec] { return std::vector<InequalityReport>{poisson_calibration_report(spec, 1.0)}; });
        tasks.push_back([&o] { return std::vector<InequalityReport>{poisson_solver_report(o)}; });
    }
    if (all || suite == Suite::Blowup)
        tasks.push_back([&spec] { return std::vector<InequalityReport>{blowup_report(spec, spec.s() - 1.0)}; });
    return run_tasks(tasks, o.threads);
}

std::vector<InequalityReport> negative_controls(const SuiteOptions& o) {
    const KernelSpec& spec = o.spec;
    const int N = o.resolution;
    std::vector<InequalityReport> out;
    for (const InequalityReport& r : algebraic_impl(2000, 12, 5.0))
        if (r.cap == 4.0) out.push_back(r);

    const Solved b = bump_solution(o, N);
    const std::size_t centre = cells_in_ball(b.u.grid(), Ball{{0.0, 0.0}, 0.5 * b.u.grid().spacing() + 1e-12}).front();
    const double osc = data_oscillation(b.u.values());
    auto modified = [&](const FieldFunction& u, std::size_t cell, double v) {
        std::vector<double> w(u.values().begin(), u.values().end());
        w[cell] = v;
        return u.with_values(std::move(w));
    };
    const FieldFunction dip = modified(b.u, centre, b.u[centre] - 0.5 * osc);
    const double k = ball_mean(b.u, kCaccioppoliBall);
    out.push_back(refinement_study({caccioppoli_check(dip, b.mask, kCaccioppoliBall, k, spec, Truncation::Below)}));
    const FieldFunction spike = modified(b.u, centre, b.u[centre] + 0.5 * osc);
    out.push_back(refinement_study({caccioppoli_check(spike, b.mask, kCaccioppoliBall, k, spec, Truncation::Above)}));
    out.push_back(refinement_study({local_boundedness_check(spike, b.mask, kCaccioppoliBall, spec, kDeltas)}));

    const Solved ob = obstacle_solution(o, N);
    const FieldFunction hole = modified(ob.u, centre, 0.0);
    out.push_back(refinement_study({weak_harnack_check(hole, ob.mask, Point{0.0, 0.0}, kHarnackr, kHarnackR, spec,
                                                       weak_harnack_exponents(spec))}));

    std::vector<double> step(b.u.values().begin(), b.u.values().end());
    for (std::size_t c : b.mask.interior())
        if (b.u.grid().center(c)[0] > 0.0) step[c] += 0.5 * osc;
    out.push_back(refinement_study({holder_check(b.u.with_values(step), b.mask, Point{0.0, 0.0}, kHolderR, holder_radii(), spec)}));

    out.push_back(poisson_calibration_report(spec, 1.01));
    out.push_back(blowup_report(spec, spec.s() / 2.0));
    return out;
}

}  // namespace nlpt
