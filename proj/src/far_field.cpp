#include "nlpt/far_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlpt/error.hpp"

namespace nlpt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FarFieldModel FarFieldModel::zero() { return FarFieldModel(Kind::Zero, 0.0, 0.0, Parity::Even); }

FarFieldModel FarFieldModel::constant(double c) {
    if (!std::isfinite(c)) throw ConfigError("far field: constant value must be finite");
    return FarFieldModel(Kind::Constant, c, 0.0, Parity::Even);
}

FarFieldModel FarFieldModel::power_decay(double a, double beta, Parity parity) {
    if (!std::isfinite(a) || !(beta > 0.0) || !std::isfinite(beta))
        throw ConfigError("far field: power_decay needs finite amplitude and beta > 0");
    return FarFieldModel(Kind::PowerDecay, a, beta, parity);
}

FarFieldModel FarFieldModel::power(double a, double gamma, Parity parity) {
    if (!std::isfinite(a) || !(gamma > 0.0) || !std::isfinite(gamma))
        throw ConfigError("far field: power needs finite amplitude and gamma > 0");
    return FarFieldModel(Kind::Power, a, gamma, parity);
}

double FarFieldModel::base_value(const Point& y) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::Constant:
            return amplitude_;
        case Kind::PowerDecay:
        case Kind::Power: {
            const double r = norm(y);
            const double e = kind_ == Kind::Power ? exponent_ : -exponent_;
            double v = amplitude_ * std::pow(r, e);
            if (parity_ == Parity::Odd) v *= (r > 0.0 ? y[0] / r : 0.0);
            return v;
        }
    }
    return 0.0;
}

double FarFieldModel::value(const Point& y) const {
    return std::min(std::max(base_value(y), floor_), cap_);
}

double FarFieldModel::pair_mean(const Point& x, const Point& v) const {
    const bool unclamped = floor_ == -kInf && cap_ == kInf;
    if (kind_ == Kind::Zero) return 0.0;
    if (kind_ == Kind::Constant) return value(x);
    if (kind_ == Kind::Power && parity_ == Parity::Odd && exponent_ == 1.0 && unclamped) return amplitude_ * x[0];
    return 0.5 * (value(x + v) + value(x - v));
}

FarFieldModel FarFieldModel::negated() const {
    FarFieldModel m = *this;
    m.amplitude_ = -amplitude_;
    m.floor_ = -cap_;
    m.cap_ = -floor_;
    if (m.amplitude_ == 0.0) m.amplitude_ = 0.0;  // no signed zero
    return m;
}

FarFieldModel FarFieldModel::capped_above(double k) const {
    if ((kind_ == Kind::Zero || kind_ == Kind::Constant) && std::clamp(amplitude_, floor_, cap_) <= k) return *this;
    FarFieldModel m = *this;
    m.cap_ = std::min(cap_, k);
    m.floor_ = std::min(floor_, m.cap_);
    return m;
}

FarFieldModel FarFieldModel::floored_below(double k) const {
    if ((kind_ == Kind::Zero || kind_ == Kind::Constant) && std::clamp(amplitude_, floor_, cap_) >= k) return *this;
    FarFieldModel m = *this;
    m.floor_ = std::max(floor_, k);
    m.cap_ = std::max(cap_, m.floor_);
    return m;
}

bool FarFieldModel::is_constant() const {
    if (kind_ == Kind::Zero || kind_ == Kind::Constant) return true;
    return floor_ == cap_;
}

double FarFieldModel::sup_over(double radius) const {
    double s = 0.0;
    switch (kind_) {
        case Kind::Zero:
            s = 0.0;
            break;
        case Kind::Constant:
            s = amplitude_;
            break;
        case Kind::PowerDecay: {
            const double m = std::abs(amplitude_) * std::pow(radius, -exponent_);
            s = (parity_ == Parity::Odd || amplitude_ > 0.0) ? m : 0.0;
            break;
        }
        case Kind::Power:
            if (parity_ == Parity::Odd || amplitude_ > 0.0)
                s = kInf;
            else
                s = amplitude_ * std::pow(radius, exponent_);
            break;
    }
    return std::min(std::max(s, floor_), cap_);
}

double FarFieldModel::inf_over(double radius) const { return -negated().sup_over(radius); }

double FarFieldModel::growth() const {
    if (kind_ != Kind::Power) return 0.0;
    const bool up = parity_ == Parity::Odd || amplitude_ > 0.0;
    const bool down = parity_ == Parity::Odd || amplitude_ < 0.0;
    const bool unbounded = (up && cap_ == kInf) || (down && floor_ == -kInf);
    return unbounded ? exponent_ : 0.0;
}

bool FarFieldModel::admissible(double s, double p) const { return (p - 1.0) * growth() < s * p; }

void FarFieldModel::require_admissible(double s, double p) const {
    if (admissible(s, p)) return;
    std::ostringstream os;
    os << "far field " << describe() << " is not in the tail space L^{p-1}_{sp}: requires (p-1)*gamma < s*p, got "
       << (p - 1.0) * growth() << " >= " << s * p;
    throw ConfigError(os.str());
}

bool FarFieldModel::same_base(const FarFieldModel& o) const {
    return kind_ == o.kind_ && parity_ == o.parity_ && amplitude_ == o.amplitude_ && exponent_ == o.exponent_;
}

std::optional<FarFieldModel> FarFieldModel::min_of(const FarFieldModel& a, const FarFieldModel& b) {
    if (a.same_base(b)) {
        FarFieldModel m = a;
        m.floor_ = std::min(a.floor_, b.floor_);
        m.cap_ = std::min(a.cap_, b.cap_);
        return m;
    }
    // A constant model folds into the other one as a cap.
    auto fold = [](const FarFieldModel& c, const FarFieldModel& other) {
        const double v = c.value(Point{0.0, 0.0});
        FarFieldModel m = other;
        m.floor_ = std::min(other.floor_, v);
        m.cap_ = std::min(other.cap_, v);
        return m;
    };
    if (a.is_constant()) return fold(a, b);
    if (b.is_constant()) return fold(b, a);
    return std::nullopt;
}

std::string FarFieldModel::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Zero:
            os << "Zero";
            break;
        case Kind::Constant:
            os << "Constant(" << amplitude_ << ")";
            break;
        case Kind::PowerDecay:
            os << "PowerDecay(" << amplitude_ << ", beta=" << exponent_ << (parity_ == Parity::Odd ? ", odd" : "")
               << ")";
            break;
        case Kind::Power:
            os << "Power(" << amplitude_ << ", gamma=" << exponent_ << (parity_ == Parity::Odd ? ", odd" : "")
               << ")";
            break;
    }
    if (floor_ != -kInf || cap_ != kInf) os << " clamped to [" << floor_ << ", " << cap_ << "]";
    return os.str();
}

}  // namespace nlpt
