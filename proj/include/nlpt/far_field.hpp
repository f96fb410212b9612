#pragma once

#include <limits>
#include <optional>
#include <string>

#include "nlpt/point.hpp"

namespace nlpt {

/// Closed-form description of a field outside the grid box.
///
/// The base profile is one of four radial laws, optionally multiplied by the
/// angular factor x_1/|x| (odd parity, which makes Power(a, 1, Odd) the affine
/// function a*x_1). The result is clamped to [floor, cap]; clamps arise from
/// truncation and lattice operations and keep the model closed under min and
/// negation.
class FarFieldModel {
public:
    enum class Kind { Zero, Constant, PowerDecay, Power };
    enum class Parity { Even, Odd };

    static FarFieldModel zero();
    static FarFieldModel constant(double c);
    /// a * |y|^(-beta), beta > 0.
    static FarFieldModel power_decay(double a, double beta, Parity parity = Parity::Even);
    /// a * |y|^gamma, gamma > 0.
    static FarFieldModel power(double a, double gamma, Parity parity = Parity::Even);

    Kind kind() const { return kind_; }
    Parity parity() const { return parity_; }
    double amplitude() const { return amplitude_; }
    double exponent() const { return exponent_; }
    double floor() const { return floor_; }
    double cap() const { return cap_; }

    double base_value(const Point& y) const;
    double value(const Point& y) const;

    /// (value(x + v) + value(x - v)) / 2, exact for unclamped affine models.
    double pair_mean(const Point& x, const Point& v) const;

    FarFieldModel negated() const;
    FarFieldModel capped_above(double k) const;
    FarFieldModel floored_below(double k) const;

    /// Growth exponent of |value| at infinity; zero when the model is bounded.
    double growth() const;
    bool bounded() const { return growth() == 0.0; }
    /// True when the clamped model is a single constant everywhere.
    bool is_constant() const;
    /// Bounds of the value over |y| >= radius (infinite when unbounded).
    double sup_over(double radius) const;
    double inf_over(double radius) const;

    /// Tail-space membership: (p-1)*growth < s*p.
    bool admissible(double s, double p) const;
    /// Throws ConfigError citing the tail-space test when not admissible.
    void require_admissible(double s, double p) const;

    /// Cellwise minimum of two models when it is again representable.
    static std::optional<FarFieldModel> min_of(const FarFieldModel& a, const FarFieldModel& b);

    std::string describe() const;
    bool operator==(const FarFieldModel& other) const = default;

private:
    FarFieldModel(Kind kind, double amplitude, double exponent, Parity parity)
        : kind_(kind), parity_(parity), amplitude_(amplitude), exponent_(exponent) {}

    bool same_base(const FarFieldModel& other) const;

    Kind kind_ = Kind::Zero;
    Parity parity_ = Parity::Even;
    double amplitude_ = 0.0;
    double exponent_ = 0.0;
    double floor_ = -std::numeric_limits<double>::infinity();
    double cap_ = std::numeric_limits<double>::infinity();
};

}  // namespace nlpt
