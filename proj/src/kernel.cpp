#include "nlpt/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nlpt/error.hpp"

namespace nlpt {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CoefficientRule CoefficientRule::constant(double value) {
    CoefficientRule r;
    r.kind_ = Kind::Constant;
    r.value_ = value;
    return r;
}

CoefficientRule CoefficientRule::hashed(std::uint64_t seed, double lambda, Point origin, double cell) {
    if (!(cell > 0.0)) throw ConfigError("coefficient hashed: lattice cell size must be positive");
    if (!(lambda >= 1.0)) throw ConfigError("coefficient hashed: lambda must be >= 1");
    CoefficientRule r;
    r.kind_ = Kind::Hashed;
    r.seed_ = seed;
    r.lambda_ = lambda;
    r.origin_ = origin;
    r.scale_ = cell;
    return r;
}

CoefficientRule CoefficientRule::checkerboard(double scale, double lambda) {
    if (!(scale > 0.0)) throw ConfigError("coefficient checkerboard: scale must be positive");
    if (!(lambda >= 1.0)) throw ConfigError("coefficient checkerboard: lambda must be >= 1");
    CoefficientRule r;
    r.kind_ = Kind::Checkerboard;
    r.scale_ = scale;
    r.lambda_ = lambda;
    return r;
}

CoefficientRule CoefficientRule::custom(Function f, std::string name) {
    if (!f) throw ConfigError("coefficient custom: empty function");
    CoefficientRule r;
    r.kind_ = Kind::Custom;
    r.fn_ = std::move(f);
    r.name_ = std::move(name);
    return r;
}

namespace {

std::uint64_t lattice_key(const Point& x, const Point& origin, double cell) {
    const auto ix = static_cast<std::int64_t>(std::floor((x[0] - origin[0]) / cell));
    const auto iy = static_cast<std::int64_t>(std::floor((x[1] - origin[1]) / cell));
    return mix64(static_cast<std::uint64_t>(ix) ^ mix64(static_cast<std::uint64_t>(iy) + 0x51ed2701ULL));
}

int checker_sign(const Point& x, double scale) {
    const auto k = static_cast<std::int64_t>(std::floor(x[0] / scale)) +
                   static_cast<std::int64_t>(std::floor(x[1] / scale));
    return (k % 2 == 0) ? 1 : -1;
}

}  // namespace

double CoefficientRule::operator()(const Point& x, const Point& y) const {
    switch (kind_) {
        case Kind::Constant:
            return value_;
        case Kind::Hashed: {
            const std::uint64_t kx = lattice_key(x, origin_, scale_);
            const std::uint64_t ky = lattice_key(y, origin_, scale_);
            const std::uint64_t h = mix64(seed_ ^ mix64(std::min(kx, ky)) ^ (mix64(std::max(kx, ky)) << 1));
            const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
            return std::pow(lambda_, 2.0 * u - 1.0);
        }
        case Kind::Checkerboard:
            return checker_sign(x, scale_) * checker_sign(y, scale_) > 0 ? lambda_ : 1.0 / lambda_;
        case Kind::Custom:
            return fn_(x, y);
    }
    return value_;
}

std::string CoefficientRule::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Constant:
            if (value_ == 1.0)
                os << "gagliardo";
            else
                os << "constant(" << value_ << ")";
            break;
        case Kind::Hashed:
            os << "hashed(seed=" << seed_ << ")";
            break;
        case Kind::Checkerboard:
            os << "checkerboard(scale=" << scale_ << ")";
            break;
        case Kind::Custom:
            os << name_;
            break;
    }
    return os.str();
}

KernelSpec::KernelSpec(int dim, double s, double p, double lambda, CoefficientRule rule)
    : dim_(dim), s_(s), p_(p), lambda_(lambda), rule_(std::move(rule)) {
    if (dim != 1 && dim != 2) throw ConfigError("kernel: dimension must be 1 or 2");
    if (!(s >= 0.05 && s <= 0.95)) {
        std::ostringstream os;
        os << "kernel: s = " << s << " outside the supported range [0.05, 0.95]";
        throw ConfigError(os.str());
    }
    if (!(p >= 1.1 && p <= 8.0)) {
        std::ostringstream os;
        os << "kernel: p = " << p << " outside the supported range [1.1, 8]";
        throw ConfigError(os.str());
    }
    if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw ConfigError("kernel: lambda must be a finite value >= 1");
}

KernelSpec KernelSpec::gagliardo(int dim, double s, double p) {
    return KernelSpec(dim, s, p, 1.0, CoefficientRule::constant(1.0));
}

double KernelSpec::symmetric_coefficient(const Point& x, const Point& y) const {
    if (rule_.kind() == CoefficientRule::Kind::Constant) return rule_(x, y);
    return 0.5 * (rule_(x, y) + rule_(y, x));
}

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y) {
    const double d = distance(x, y);
    if (d == 0.0) throw NumericalError("kernel_eval: x == y (singular diagonal)");
    return spec.symmetric_coefficient(x, y) * std::pow(d, -spec.exponent());
}

BoundsReport validate_bounds(const KernelSpec& spec, const Grid& grid, std::size_t sample_count, std::uint64_t seed) {
    if (sample_count < 100) throw ConfigError("validate_bounds: sample_count must be >= 100");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    const double lo = 1.0 / spec.lambda();
    const double hi = spec.lambda();
    const double slack = 1e-12;
    BoundsReport rep;
    rep.min_coefficient = std::numeric_limits<double>::infinity();
    rep.max_coefficient = -std::numeric_limits<double>::infinity();
    while (rep.samples < sample_count) {
        const std::size_t i = pick(rng);
        const std::size_t j = pick(rng);
        if (i == j) continue;
        const Point x = grid.center(i);
        const Point y = grid.center(j);
        // Recover a_sym from the evaluated kernel so the check covers kernel_eval itself.
        const double a = kernel_eval(spec, x, y) * std::pow(distance(x, y), spec.exponent());
        ++rep.samples;
        rep.min_coefficient = std::min(rep.min_coefficient, a);
        rep.max_coefficient = std::max(rep.max_coefficient, a);
        if (!(a >= lo * (1.0 - slack) && a <= hi * (1.0 + slack))) {
            std::ostringstream os;
            os << "validate_bounds: coefficient " << a << " outside [" << lo << ", " << hi << "] for cells " << i
               << " and " << j;
            throw ValidationError(os.str());
        }
    }
    return rep;
}

}  // namespace nlpt
