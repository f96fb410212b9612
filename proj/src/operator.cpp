#include "nlpt/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nlpt/error.hpp"
#include "nlpt/quadrature.hpp"

namespace nlpt {

double l_pairing(double a, double b, double p) {
    const double t = a - b;
    if (t == 0.0) return 0.0;
    if (p == 2.0) return t;
    return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

double l_smoothed(double t, double p, double eps) {
    if (p == 2.0) return t;
    if (eps == 0.0) return l_pairing(t, 0.0, p);
    return t * std::pow(t * t + eps * eps, 0.5 * (p - 2.0));
}

double pair_potential(double t, double p, double eps) {
    if (p == 2.0) return 0.5 * t * t;
    if (eps == 0.0) return std::pow(std::abs(t), p) / p;
    return (std::pow(t * t + eps * eps, 0.5 * p) - std::pow(eps, p)) / p;
}

namespace {

double pair_derivative(double t, double p, double eps) {
    if (p == 2.0) return 1.0;
    const double q = t * t + eps * eps;
    if (q == 0.0) return p > 2.0 ? 0.0 : std::numeric_limits<double>::max();
    return std::pow(q, 0.5 * (p - 4.0)) * ((p - 1.0) * t * t + eps * eps);
}

// pair_potential(u - g) - pair_potential(g), stable when |g| >> |u|.
double renormalised_potential(double u, double g, double p, double eps) {
    if (eps == 0.0 && std::abs(g) > 4.0 * std::abs(u) && g != 0.0) {
        const double base = std::pow(std::abs(g), p) / p;
        return base * std::expm1(p * std::log1p(-u / g));
    }
    return pair_potential(u - g, p, eps) - pair_potential(-g, p, eps);
}

// Decay of rho^(-sp) times |far|^(p-1) along rays.
double far_decay(const KernelSpec& spec, const FarFieldModel& far) {
    return spec.sp() - far.growth() * (spec.p() - 1.0);
}

}  // namespace

Assembly::Assembly(const RegionMask& mask, const KernelSpec& spec, const FarFieldModel& far)
    : mask_(mask), spec_(spec), far_(far) {
    const Grid& g = grid();
    if (g.dim() != spec.dim()) throw ConfigError("assembly: kernel dimension does not match grid dimension");
    far.require_admissible(spec.s(), spec.p());
    const std::size_t N = g.size();
    const std::size_t R = mask_.interior_count();
    const double w2 = g.cell_volume() * g.cell_volume();
    const double expo = spec.exponent();
    const int nx = g.resolution(0);
    const int ny = g.dim() == 2 ? g.resolution(1) : 1;
    // Kernel by index offset; the grid is uniform.
    std::vector<double> table(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int ky = 0; ky < ny; ++ky)
        for (int kx = 0; kx < nx; ++kx) {
            if (kx == 0 && ky == 0) continue;
            const double d = std::hypot(kx * g.spacing(0), g.dim() == 2 ? ky * g.spacing(1) : 0.0);
            table[static_cast<std::size_t>(kx) + static_cast<std::size_t>(ky) * nx] = w2 * std::pow(d, -expo);
        }
    auto weights = std::make_shared<std::vector<double>>(R * N, 0.0);
    auto mass = std::make_shared<std::vector<double>>(R, 0.0);
    const bool unit = spec.rule().is_unit();
    for (std::size_t slot = 0; slot < R; ++slot) {
        const std::size_t i = mask_.interior()[slot];
        const auto ii = g.index(i);
        const Point xi = g.center(i);
        double* row = weights->data() + slot * N;
        double sum = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const auto jj = g.index(j);
            const std::size_t off = static_cast<std::size_t>(std::abs(jj[0] - ii[0])) +
                                    static_cast<std::size_t>(std::abs(jj[1] - ii[1])) * nx;
            double w = table[off];
            if (!unit) w *= spec.symmetric_coefficient(xi, g.center(j));
            row[j] = w;
            sum += w;
        }
        (*mass)[slot] = sum;
    }
    weights_ = std::move(weights);
    row_mass_ = std::move(mass);
    build_far();
}

Assembly::Assembly(const Assembly& base, const FarFieldModel& far)
    : mask_(base.mask_), spec_(base.spec_), far_(far), weights_(base.weights_), row_mass_(base.row_mass_) {
    far.require_admissible(spec_.s(), spec_.p());
    build_far();
}

Assembly Assembly::with_far_field(const FarFieldModel& far) const { return Assembly(*this, far); }

void Assembly::build_far() {
    const Grid& g = grid();
    const std::size_t R = mask_.interior_count();
    const double decay = far_decay(spec_, far_);
    const bool unit = spec_.rule().is_unit();
    const bool constant = far_.is_constant();
    renormalised_ = !far_.bounded();
    far_nodes_.clear();
    far_offset_.assign(1, 0);
    far_mass_.assign(R, 0.0);
    for (std::size_t slot = 0; slot < R; ++slot) {
        const Point xi = g.center(mask_.interior()[slot]);
        const ExteriorRule rule = exterior_rule(g, xi, spec_.sp(), decay);
        double total = 0.0;
        if (constant) {
            for (const PolarNode& n : rule.nodes) total += n.w * (unit ? 1.0 : spec_.symmetric_coefficient(xi, n.y));
            far_nodes_.push_back({total, far_.value(xi)});
        } else {
            for (const PolarNode& n : rule.nodes) {
                const double w = n.w * (unit ? 1.0 : spec_.symmetric_coefficient(xi, n.y));
                far_nodes_.push_back({w, far_.value(n.y)});
                total += w;
            }
        }
        far_mass_[slot] = g.cell_volume() * total;
        far_offset_.push_back(far_nodes_.size());
    }
}

void Assembly::require_compatible(const FieldFunction& u) const {
    if (!(u.grid() == grid())) throw ConfigError("field grid does not match the assembly grid");
    if (!(u.far() == far_))
        throw ConfigError("field far model " + u.far().describe() + " does not match the assembly far model " +
                          far_.describe());
}

void Assembly::gradient(std::span<const double> values, double eps, std::span<double> out) const {
    const std::size_t N = cols();
    const double p = spec_.p();
    const double wi = grid().cell_volume();
    // For p < 2 the pairing is only Hoelder at 0, so differences at the rounding
    // level of the operands would dominate the residual; they count as ties.
    const bool tie_floor = p < 2.0 && eps == 0.0;
    auto pairing = [&](double a, double b) {
        const double t = a - b;
        if (tie_floor && std::abs(t) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))
            return 0.0;
        return l_smoothed(t, p, eps);
    };
    for (std::size_t slot = 0; slot < rows(); ++slot) {
        const double ui = values[mask_.interior()[slot]];
        const double* row = weights_->data() + slot * N;
        double acc = 0.0;
        if (p == 2.0) {
            for (std::size_t j = 0; j < N; ++j) acc += row[j] * (ui - values[j]);
        } else {
            for (std::size_t j = 0; j < N; ++j) acc += row[j] * pairing(ui, values[j]);
        }
        double far = 0.0;
        for (const FarNode& n : far_nodes(slot)) far += n.weight * pairing(ui, n.value);
        out[slot] = acc + wi * far;
    }
}

double Assembly::variable_energy(std::span<const double> values, double eps) const {
    const std::size_t N = cols();
    const double p = spec_.p();
    const double wi = grid().cell_volume();
    double e = 0.0;
    for (std::size_t slot = 0; slot < rows(); ++slot) {
        const std::size_t i = mask_.interior()[slot];
        const double ui = values[i];
        const double* row = weights_->data() + slot * N;
        double acc = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            if (row[j] == 0.0) continue;
            const double f = mask_.is_interior(j) ? 0.5 : 1.0;
            acc += f * row[j] * pair_potential(ui - values[j], p, eps);
        }
        double far = 0.0;
        for (const FarNode& n : far_nodes(slot)) {
            far += n.weight * (renormalised_ ? renormalised_potential(ui, n.value, p, eps)
                                             : pair_potential(ui - n.value, p, eps));
        }
        e += acc + wi * far;
    }
    return e;
}

void Assembly::hessian_diagonal(std::span<const double> values, double eps, std::span<double> out) const {
    const std::size_t N = cols();
    const double p = spec_.p();
    const double wi = grid().cell_volume();
    for (std::size_t slot = 0; slot < rows(); ++slot) {
        if (p == 2.0) {
            out[slot] = row_mass(slot) + far_mass(slot);
            continue;
        }
        const double ui = values[mask_.interior()[slot]];
        const double* row = weights_->data() + slot * N;
        double acc = 0.0;
        for (std::size_t j = 0; j < N; ++j)
            if (row[j] != 0.0) acc += row[j] * std::min(pair_derivative(ui - values[j], p, eps), 1e300);
        double far = 0.0;
        for (const FarNode& n : far_nodes(slot)) far += n.weight * std::min(pair_derivative(ui - n.value, p, eps), 1e300);
        out[slot] = acc + wi * far;
    }
}

double Assembly::coupling(std::span<const double> values, double eps, std::size_t slot, std::size_t cell) const {
    const double w = weight(slot, cell);
    if (w == 0.0) return 0.0;
    const double d = pair_derivative(values[mask_.interior()[slot]] - values[cell], spec_.p(), eps);
    return w * std::min(d, 1e300);
}

// ---------------------------------------------------------------------------
// Tail

namespace {

// int over rho in [a, b] intersected with [r, inf) of rho^(-1-sp).
double radial_power_integral(double a, double b, double r, double sp) {
    const double lo = std::max(a, r);
    if (!(b > lo)) return 0.0;
    const double hi_term = std::isinf(b) ? 0.0 : std::pow(b, -sp);
    return (std::pow(lo, -sp) - hi_term) / sp;
}

double cell_tail_integral_1d(double a, double b, double z, double r, double sp) {
    double total = 0.0;
    if (b > z) total += radial_power_integral(std::max(a - z, 0.0), b - z, r, sp);
    if (a < z) total += radial_power_integral(std::max(z - b, 0.0), z - a, r, sp);
    return total;
}

// Ray z + t e against the rectangle [a0,b0] x [a1,b1]: entry/exit parameters.
bool ray_box(const Point& z, const Point& e, double a0, double b0, double a1, double b1, double& t_in,
             double& t_out) {
    t_in = 0.0;
    t_out = std::numeric_limits<double>::infinity();
    const double lo[2] = {a0, a1};
    const double hi[2] = {b0, b1};
    for (int k = 0; k < 2; ++k) {
        if (e[k] == 0.0) {
            if (z[k] < lo[k] || z[k] > hi[k]) return false;
            continue;
        }
        double t1 = (lo[k] - z[k]) / e[k];
        double t2 = (hi[k] - z[k]) / e[k];
        if (t1 > t2) std::swap(t1, t2);
        t_in = std::max(t_in, t1);
        t_out = std::min(t_out, t2);
    }
    return t_out > t_in;
}

double cell_tail_integral_2d(double a0, double b0, double a1, double b1, const Point& z, double r, double sp) {
    // Skip cells entirely inside the ball.
    double far_corner = 0.0;
    for (double cx : {a0, b0})
        for (double cy : {a1, b1}) far_corner = std::max(far_corner, std::hypot(cx - z[0], cy - z[1]));
    if (far_corner <= r) return 0.0;
    const bool inside = z[0] >= a0 && z[0] <= b0 && z[1] >= a1 && z[1] <= b1;
    std::vector<double> br;
    auto radial = [&](double th) {
        const Point e{std::cos(th), std::sin(th)};
        double t_in = 0.0;
        double t_out = 0.0;
        if (!ray_box(z, e, a0, b0, a1, b1, t_in, t_out)) return 0.0;
        return radial_power_integral(t_in, t_out, r, sp);
    };
    if (inside) {
        for (double cx : {a0, b0})
            for (double cy : {a1, b1}) {
                double a = std::atan2(cy - z[1], cx - z[0]);
                if (a < 0.0) a += 2.0 * kPi;
                br.push_back(a);
            }
        br.push_back(0.0);
        br.push_back(2.0 * kPi);
    } else {
        const double c = std::atan2(0.5 * (a1 + b1) - z[1], 0.5 * (a0 + b0) - z[0]);
        double lo = 0.0;
        double hi = 0.0;
        for (double cx : {a0, b0})
            for (double cy : {a1, b1}) {
                double a = std::atan2(cy - z[1], cx - z[0]) - c;
                while (a > kPi) a -= 2.0 * kPi;
                while (a < -kPi) a += 2.0 * kPi;
                br.push_back(c + a);
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
    }
    std::sort(br.begin(), br.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        if (br[k + 1] - br[k] < 1e-15) continue;
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(radial, br[k], br[k + 1], 12, 1e-13);
    }
    return total;
}

}  // namespace

TailEstimate tail(const FieldFunction& f, const Point& z, double r, const KernelSpec& spec) {
    const Grid& g = f.grid();
    if (g.dim() != spec.dim()) throw ConfigError("tail: kernel dimension does not match grid dimension");
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("tail: radius must be positive");
    if (!g.contains(z)) throw ConfigError("tail: centre must lie in the grid box");
    f.far().require_admissible(spec.s(), spec.p());
    const double p = spec.p();
    const double sp = spec.sp();
    auto mag = [p](double v) { return std::pow(std::abs(v), p - 1.0); };
    double resolved = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        const double fv = f[c];
        if (fv == 0.0) continue;
        const Point x = g.center(c);
        const double h0 = 0.5 * g.spacing(0);
        double I = 0.0;
        if (g.dim() == 1) {
            I = cell_tail_integral_1d(x[0] - h0, x[0] + h0, z[0], r, sp);
        } else {
            const double h1 = 0.5 * g.spacing(1);
            I = cell_tail_integral_2d(x[0] - h0, x[0] + h0, x[1] - h1, x[1] + h1, z, r, sp);
        }
        resolved += mag(fv) * I;
    }
    double far = 0.0;
    double rem = 0.0;
    if (!(f.far().kind() == FarFieldModel::Kind::Zero)) {
        const ExteriorRule rule = exterior_rule(g, z, sp, far_decay(spec, f.far()), r);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double term = rule.nodes[k].w * mag(f.far().value(rule.nodes[k].y));
            far += term;
            if (k >= rule.remainder_begin) rem += term;
        }
    }
    TailEstimate t;
    const double rs = std::pow(r, sp);
    t.resolved = rs * resolved;
    t.farfield = rs * far;
    t.remainder_bound = rs * rem;
    t.value = std::pow(t.resolved + t.farfield, 1.0 / (p - 1.0));
    return t;
}

// ---------------------------------------------------------------------------
// Energy and residuals

double energy(const FieldFunction& u, const Assembly& assembly) {
    assembly.require_compatible(u);
    const RegionMask& mask = assembly.mask();
    const Grid& g = assembly.grid();
    const KernelSpec& spec = assembly.spec();
    const double p = spec.p();
    double e = assembly.variable_energy(u.values(), 0.0);
    // Pairs of fixed cells.
    const double w2 = g.cell_volume() * g.cell_volume();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (mask.is_interior(i)) continue;
        const Point xi = g.center(i);
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (mask.is_interior(j) || u[i] == u[j]) continue;
            e += w2 * kernel_eval(spec, xi, g.center(j)) * pair_potential(u[i] - u[j], p, 0.0);
        }
    }
    if (!std::isfinite(e)) throw NumericalError("energy: non-finite value (inadmissible data?)");
    return e;
}

std::vector<double> residual(const FieldFunction& u, const Assembly& assembly, double eps) {
    assembly.require_compatible(u);
    std::vector<double> r(assembly.rows());
    assembly.gradient(u.values(), eps, r);
    return r;
}

double weak_residual(const FieldFunction& u, std::span<const double> phi, const Assembly& assembly) {
    const RegionMask& mask = assembly.mask();
    if (phi.size() != assembly.cols()) throw ConfigError("weak_residual: test vector size does not match grid");
    for (std::size_t c = 0; c < phi.size(); ++c)
        if (phi[c] != 0.0 && !mask.is_interior(c))
            throw ConfigError("weak_residual: test function nonzero outside the interior (cell " +
                              std::to_string(c) + ")");
    const std::vector<double> r = residual(u, assembly);
    double s = 0.0;
    for (std::size_t slot = 0; slot < r.size(); ++slot) s += phi[mask.interior()[slot]] * r[slot];
    return s;
}

double data_oscillation(std::span<const double> values) {
    if (values.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double osc = *hi - *lo;
    return osc > 0.0 ? osc : 1.0;
}

std::vector<double> residual_scale(const Assembly& assembly, double oscillation) {
    const double f = std::pow(oscillation, assembly.spec().p() - 1.0);
    std::vector<double> s(assembly.rows());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = (assembly.row_mass(k) + assembly.far_mass(k)) * f;
    return s;
}

SupersolutionReport supersolution_check(const FieldFunction& u, const Assembly& assembly, double tol) {
    const std::vector<double> r = residual(u, assembly);
    const std::vector<double> scale = residual_scale(assembly, data_oscillation(u.values()));
    SupersolutionReport rep;
    rep.worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double v = r[k] / scale[k];
        if (v < rep.worst) {
            rep.worst = v;
            rep.witness = assembly.mask().interior()[k];
        }
    }
    rep.pass = rep.worst >= -tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Pointwise principal value

namespace {

// L(d - e) - L(d + e), accurate when |e| << |d|.
double odd_difference(double d, double e, double p) {
    if (e == 0.0) return 0.0;
    if (p == 2.0) return -2.0 * e;
    if (std::abs(e) < 0.5 * std::abs(d)) {
        const double x = e / d;
        const double q = p - 1.0;
        const double bracket = std::expm1(q * std::log1p(-x)) - std::expm1(q * std::log1p(x));
        return std::copysign(std::pow(std::abs(d), q), d) * bracket;
    }
    return l_pairing(d, e, p) - l_pairing(d, -e, p);
}

}  // namespace

double operator_pointwise(const FieldFunction& u, std::size_t cell, const KernelSpec& spec) {
    const Grid& g = u.grid();
    if (g.dim() != spec.dim()) throw ConfigError("operator_pointwise: kernel dimension does not match grid");
    if (cell >= g.size()) throw ConfigError("operator_pointwise: cell out of range");
    const double p = spec.p();
    const double sp = spec.sp();
    const double ui = u[cell];
    const Point xi = g.center(cell);
    const auto ii = g.index(cell);
    const double w = g.cell_volume();
    const FarFieldModel& far = u.far();

    // Resolved cells, each pair (y, 2x - y) summed together.
    double resolved = 0.0;
    double magnitude = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (j == cell) continue;
        const auto jj = g.index(j);
        const int mx = 2 * ii[0] - jj[0];
        const int my = 2 * ii[1] - jj[1];
        const double tj = w * kernel_eval(spec, xi, g.center(j)) * l_pairing(ui, u[j], p);
        magnitude += std::abs(tj);
        if (g.valid_index(mx, my)) {
            const std::size_t m = g.flat(mx, my);
            if (m < j) continue;
            const double tm = w * kernel_eval(spec, xi, g.center(m)) * l_pairing(ui, u[m], p);
            magnitude += std::abs(tm);
            resolved += tj + tm;
        } else {
            resolved += tj;
        }
    }

    auto coeff = [&](const Point& y) { return spec.symmetric_coefficient(xi, y); };
    auto term = [&](const Point& y) { return coeff(y) * l_pairing(ui, far.value(y), p); };
    // a(y+) L(u_i - g(y+)) + a(y-) L(u_i - g(y-)) for y+- = x_i +- v, with the even part of g
    // about x_i taken from the model so that exact odd symmetry cancels exactly.
    auto pair = [&](const Point& v) {
        const Point yp = xi + v;
        const Point ym = xi - v;
        const double d = 0.5 * (far.value(yp) - far.value(ym));
        const double e = far.pair_mean(xi, v) - ui;
        const double ap = coeff(yp);
        const double am = coeff(ym);
        const double sym = odd_difference(d, e, p);
        if (ap == am) return ap * sym;
        return 0.5 * (ap + am) * sym + 0.5 * (am - ap) * (l_pairing(d, e, p) + l_pairing(d, -e, p));
    };

    // Layout decay for the paired far integral.
    double decay = sp - far.growth() * (p - 1.0);
    if (!(decay > 0.05 * sp)) decay = sp;
    decay = std::min(decay, sp);

    double unpaired = 0.0;
    double paired = 0.0;
    std::vector<double> band_sum;
    std::vector<double> band_width;
    std::vector<QNode> rad;

    auto paired_ray = [&](const Point& e, double weight_angle, double start, double R_f) {
        rad.clear();
        if (start < R_f) radial::append_shells(rad, start, R_f, sp, 6);
        for (const QNode& q : rad) paired += weight_angle * q.w * pair(q.x * e);
        std::vector<QNode> panels;
        const double R_end = radial::append_far_panels(panels, std::max(start, R_f), sp, decay);
        std::size_t band = 0;
        for (std::size_t k = 0; k < panels.size(); k += 8, ++band) {
            double s = 0.0;
            for (std::size_t m = k; m < k + 8 && m < panels.size(); ++m) {
                const QNode& q = panels[m];
                s += weight_angle * q.w * pair(q.x * e);
            }
            const double width = std::log(panels[std::min(k + 7, panels.size() - 1)].x / panels[k].x);
            if (band_sum.size() <= band) {
                band_sum.push_back(0.0);
                band_width.push_back(width);
            }
            band_sum[band] += s;
            paired += s;
        }
        paired += weight_angle * radial::remainder_weight(R_end, sp, decay) * pair(R_end * e);
    };
    auto unpaired_segment = [&](const Point& e, double weight_angle, double a, double b) {
        if (!(b > a)) return;
        rad.clear();
        radial::append_shells(rad, a, b, sp, 6);
        for (const QNode& q : rad) unpaired += weight_angle * q.w * term(xi + q.x * e);
    };

    if (g.dim() == 1) {
        const Point e{1.0, 0.0};
        const double rp = g.exit_distance(xi, e);
        const double rm = g.exit_distance(xi, Point{-1.0, 0.0});
        if (rp < rm) unpaired_segment(e, 1.0, rp, rm);
        if (rm < rp) unpaired_segment(Point{-1.0, 0.0}, 1.0, rm, rp);
        paired_ray(e, 1.0, std::max(rp, rm), 2.0 * std::max(rp, rm));
    } else {
        std::vector<double> br = box_breakpoints(g, xi);
        const std::size_t nb = br.size();
        for (std::size_t k = 0; k < nb; ++k) br.push_back(std::fmod(br[k] + kPi, 2.0 * kPi));
        std::sort(br.begin(), br.end());
        br.push_back(br.front() + 2.0 * kPi);
        std::vector<QNode> ang;
        for (std::size_t k = 0; k + 1 < br.size(); ++k)
            if (br[k + 1] - br[k] > 1e-13) append_graded(ang, br[k], br[k + 1], 4, 3);
        double far_corner = 0.0;
        for (double cx : {g.bounds(0).lo, g.bounds(0).hi})
            for (double cy : {g.bounds(1).lo, g.bounds(1).hi})
                far_corner = std::max(far_corner, std::hypot(cx - xi[0], cy - xi[1]));
        const double R_f = 2.0 * far_corner;
        for (const QNode& a : ang) {
            const Point e{std::cos(a.x), std::sin(a.x)};
            const double re = g.exit_distance(xi, e);
            const double ro = g.exit_distance(xi, Point{-e[0], -e[1]});
            unpaired_segment(e, a.w, re, ro);
            // Each unordered direction pair is visited twice over [0, 2 pi).
            paired_ray(e, 0.5 * a.w, std::max(re, ro), R_f);
        }
    }

    if (band_sum.size() >= 3) {
        std::vector<double> density(band_sum.size());
        double peak = 0.0;
        for (std::size_t k = 0; k < density.size(); ++k) {
            density[k] = std::abs(band_sum[k]) / std::max(band_width[k], 1e-300);
            peak = std::max(peak, density[k]);
        }
        const std::size_t L = density.size() - 1;
        const double scale = std::max(peak, 1e-14 * (magnitude + std::abs(unpaired)));
        if (density[L] > 1e-3 * scale && density[L] >= density[L - 1] && density[L - 1] >= density[L - 2]) {
            std::ostringstream os;
            os << "operator_pointwise: principal value at cell " << cell
               << " does not converge (paired far-field shells do not decay)";
            throw DivergenceError(os.str());
        }
    }
    return resolved + unpaired + paired;
}

double seminorm(const FieldFunction& u, std::span<const std::size_t> region, double h_order, double q) {
    if (!(h_order > 0.0 && h_order < 1.0)) throw ConfigError("seminorm: order must lie in (0, 1)");
    if (!(q > 0.0)) throw ConfigError("seminorm: exponent q must be positive");
    const Grid& g = u.grid();
    const double expo = g.dim() + h_order * q;
    const double w2 = g.cell_volume() * g.cell_volume();
    double s = 0.0;
    for (std::size_t a = 0; a < region.size(); ++a) {
        const std::size_t i = region[a];
        const Point xi = g.center(i);
        for (std::size_t b = a + 1; b < region.size(); ++b) {
            const std::size_t j = region[b];
            const double d = u[i] - u[j];
            if (d == 0.0) continue;
            s += 2.0 * w2 * std::pow(std::abs(d), q) * std::pow(distance(xi, g.center(j)), -expo);
        }
    }
    return std::pow(s, 1.0 / q);
}

}  // namespace nlpt
