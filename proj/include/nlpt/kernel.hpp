#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "nlpt/domain.hpp"
#include "nlpt/point.hpp"

namespace nlpt {

/// Coefficient a(x, y) of the kernel a(x, y) |x - y|^(-n - sp).
///
/// Every built-in rule is a pure function of the two points. Random fields are
/// produced by hashing lattice indices, so the same pair always gets the same
/// value and the field needs no storage.
class CoefficientRule {
public:
    enum class Kind { Constant, Hashed, Checkerboard, Custom };
    using Function = std::function<double(const Point&, const Point&)>;

    static CoefficientRule constant(double value = 1.0);
    /// a = lambda^(2U - 1) with U uniform in [0, 1) from a hash of the unordered
    /// pair of lattice cells (origin, cell size) containing x and y.
    static CoefficientRule hashed(std::uint64_t seed, double lambda, Point origin, double cell);
    /// a = lambda^(sigma(x) sigma(y)) with sigma = +-1 on a checkerboard of side `scale`.
    static CoefficientRule checkerboard(double scale, double lambda);
    static CoefficientRule custom(Function f, std::string name = "custom");

    Kind kind() const { return kind_; }
    double operator()(const Point& x, const Point& y) const;
    bool is_unit() const { return kind_ == Kind::Constant && value_ == 1.0; }
    std::string describe() const;

private:
    Kind kind_ = Kind::Constant;
    double value_ = 1.0;
    double lambda_ = 1.0;
    double scale_ = 1.0;
    std::uint64_t seed_ = 0;
    Point origin_{0.0, 0.0};
    Function fn_;
    std::string name_;
};

/// Parameters of the operator plus the coefficient field.
class KernelSpec {
public:
    /// Range checks on s, p, lambda are hard errors.
    KernelSpec(int dim, double s, double p, double lambda, CoefficientRule rule);
    /// a == 1, lambda == 1.
    static KernelSpec gagliardo(int dim, double s, double p);

    int dim() const { return dim_; }
    double s() const { return s_; }
    double p() const { return p_; }
    double lambda() const { return lambda_; }
    double sp() const { return s_ * p_; }
    /// n + sp.
    double exponent() const { return dim_ + s_ * p_; }
    bool is_gagliardo() const { return rule_.is_unit() && lambda_ == 1.0; }
    const CoefficientRule& rule() const { return rule_; }

    /// (a(x,y) + a(y,x)) / 2.
    double symmetric_coefficient(const Point& x, const Point& y) const;

private:
    int dim_;
    double s_;
    double p_;
    double lambda_;
    CoefficientRule rule_;
};

/// a_sym(x, y) |x - y|^(-n - sp). Throws NumericalError for x == y.
double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y);

struct BoundsReport {
    std::size_t samples = 0;
    double min_coefficient = 0.0;
    double max_coefficient = 0.0;
};

/// Samples random distinct cell pairs and checks lambda^-1 <= a_sym <= lambda.
/// Throws ValidationError naming the offending pair.
BoundsReport validate_bounds(const KernelSpec& spec, const Grid& grid, std::size_t sample_count,
                             std::uint64_t seed = 0x5eed);

/// splitmix64 finaliser, exposed for reproducible hashing elsewhere.
std::uint64_t mix64(std::uint64_t x);

}  // namespace nlpt
