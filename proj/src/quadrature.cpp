#include "nlpt/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "nlpt/error.hpp"

namespace nlpt {

namespace {

template <unsigned M>
std::vector<QNode> reference_rule() {
    using Rule = boost::math::quadrature::gauss<double, M>;
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    std::vector<QNode> out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (xs[k] == 0.0) {
            out.push_back({0.0, ws[k]});
        } else {
            out.push_back({-xs[k], ws[k]});
            out.push_back({xs[k], ws[k]});
        }
    }
    std::sort(out.begin(), out.end(), [](const QNode& a, const QNode& b) { return a.x < b.x; });
    return out;
}

const std::vector<QNode>& reference(int m) {
    static const std::vector<QNode> r2 = reference_rule<2>();
    static const std::vector<QNode> r3 = reference_rule<3>();
    static const std::vector<QNode> r4 = reference_rule<4>();
    static const std::vector<QNode> r5 = reference_rule<5>();
    static const std::vector<QNode> r6 = reference_rule<6>();
    static const std::vector<QNode> r8 = reference_rule<8>();
    static const std::vector<QNode> r10 = reference_rule<10>();
    static const std::vector<QNode> r16 = reference_rule<16>();
    static const std::vector<QNode> r20 = reference_rule<20>();
    switch (m) {
        case 2: return r2;
        case 3: return r3;
        case 4: return r4;
        case 5: return r5;
        case 6: return r6;
        case 8: return r8;
        case 10: return r10;
        case 16: return r16;
        case 20: return r20;
        default: throw ConfigError("gauss_legendre: unsupported point count " + std::to_string(m));
    }
}

// Angle in [0, 2 pi).
double wrap(double a) {
    const double two_pi = 2.0 * kPi;
    a = std::fmod(a, two_pi);
    return a < 0.0 ? a + two_pi : a;
}

}  // namespace

std::vector<QNode> gauss_legendre(int m, double a, double b) {
    const auto& ref = reference(m);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    std::vector<QNode> out;
    out.reserve(ref.size());
    for (const QNode& q : ref) out.push_back({mid + half * q.x, half * q.w});
    return out;
}

namespace radial {

void append_shells(std::vector<QNode>& out, double r0, double r1, double sp, int m) {
    if (!(r0 > 0.0)) throw NumericalError("radial shells: start radius must be positive");
    double a = r0;
    while (a < r1) {
        const double b = std::min(2.0 * a, r1);
        // Absorb a sliver shorter than a tenth of a shell into the previous one.
        const double end = (b < r1 && r1 < b * 1.07) ? r1 : b;
        for (const QNode& q : gauss_legendre(m, std::log(a), std::log(end)))
            out.push_back({std::exp(q.x), q.w * std::exp(-sp * q.x)});
        a = end;
    }
}

double append_far_panels(std::vector<QNode>& out, double r0, double sp, double decay) {
    if (!(decay > 0.0)) throw NumericalError("radial panels: non-positive decay exponent");
    const double total = std::log(1e12) / decay;
    const double cap = 4.0 / decay;
    double t = std::log(r0);
    const double t_end = t + total;
    double width = std::min(1.0, cap);
    while (t < t_end) {
        const double b = std::min(t + width, t_end);
        for (const QNode& q : gauss_legendre(8, t, b)) out.push_back({std::exp(q.x), q.w * std::exp(-sp * q.x)});
        t = b;
        width = std::min(width * 1.5, cap);
    }
    return std::exp(t_end);
}

double remainder_weight(double R, double sp, double decay) { return std::pow(R, -sp) / decay; }

}  // namespace radial

void append_graded(std::vector<QNode>& out, double a, double b, int m, int levels) {
    if (!(b > a)) return;
    const double len = b - a;
    double inner = 0.25 * len;  // width of the graded zone at each end
    std::vector<double> cuts{a, a + inner, b - inner, b};
    double w = inner;
    for (int k = 0; k < levels; ++k) {
        w *= 0.25;
        cuts.push_back(a + w);
        cuts.push_back(b - w);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] <= cuts[k]) continue;
        for (const QNode& q : gauss_legendre(m, cuts[k], cuts[k + 1])) out.push_back(q);
    }
}

std::vector<double> box_breakpoints(const Grid& grid, const Point& x) {
    std::vector<double> br;
    const Interval& bx = grid.bounds(0);
    const Interval& by = grid.bounds(1);
    for (double cx : {bx.lo, bx.hi})
        for (double cy : {by.lo, by.hi}) br.push_back(wrap(std::atan2(cy - x[1], cx - x[0])));
    br.push_back(0.0);
    br.push_back(0.5 * kPi);
    br.push_back(kPi);
    br.push_back(1.5 * kPi);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             br.end());
    return br;
}

ExteriorRule exterior_rule(const Grid& grid, const Point& x, double sp, double decay, double r_min) {
    if (!(decay > 0.0)) throw NumericalError("exterior_rule: decay exponent must be positive");
    ExteriorRule rule;
    std::vector<PolarNode> remainder;
    if (grid.dim() == 1) {
        const double re_plus = grid.exit_distance(x, Point{1.0, 0.0});
        const double re_minus = grid.exit_distance(x, Point{-1.0, 0.0});
        const double R_f = 2.0 * std::max(re_plus, re_minus);
        for (double dir : {1.0, -1.0}) {
            const double re = dir > 0 ? re_plus : re_minus;
            const double start = std::max(re, r_min);
            if (!(start > 0.0)) throw NumericalError("exterior_rule: point lies on the box boundary");
            std::vector<QNode> rad;
            if (start < R_f) radial::append_shells(rad, start, R_f, sp, 6);
            const double R_end = radial::append_far_panels(rad, std::max(R_f, start), sp, decay);
            for (const QNode& q : rad) rule.nodes.push_back({Point{x[0] + dir * q.x, 0.0}, q.w});
            remainder.push_back({Point{x[0] + dir * R_end, 0.0}, radial::remainder_weight(R_end, sp, decay)});
        }
    } else {
        std::vector<double> br = box_breakpoints(grid, x);
        const Interval& bx = grid.bounds(0);
        const Interval& by = grid.bounds(1);
        double far_corner = 0.0;
        for (double cx : {bx.lo, bx.hi})
            for (double cy : {by.lo, by.hi}) far_corner = std::max(far_corner, std::hypot(cx - x[0], cy - x[1]));
        const double R_f = 2.0 * far_corner;
        if (r_min > 0.0) {
            const std::array<std::pair<double, double>, 4> edges{{{bx.hi - x[0], 0.0},
                                                                  {by.hi - x[1], 0.5 * kPi},
                                                                  {x[0] - bx.lo, kPi},
                                                                  {x[1] - by.lo, 1.5 * kPi}}};
            for (const auto& [d, foot] : edges) {
                if (d < r_min) {
                    const double da = std::acos(std::max(0.0, d) / r_min);
                    br.push_back(wrap(foot + da));
                    br.push_back(wrap(foot - da));
                }
            }
            std::sort(br.begin(), br.end());
        }
        br.push_back(br.front() + 2.0 * kPi);
        std::vector<QNode> ang;
        for (std::size_t k = 0; k + 1 < br.size(); ++k)
            if (br[k + 1] - br[k] > 1e-13) append_graded(ang, br[k], br[k + 1], 4, 3);
        std::vector<QNode> rad;
        for (const QNode& a : ang) {
            const Point e{std::cos(a.x), std::sin(a.x)};
            const double re = grid.exit_distance(x, e);
            const double start = std::max(re, r_min);
            if (!(start > 0.0)) throw NumericalError("exterior_rule: point lies on the box boundary");
            if (start >= R_f) continue;
            rad.clear();
            radial::append_shells(rad, start, R_f, sp, sp > 3.0 ? 6 : 4);
            for (const QNode& q : rad) rule.nodes.push_back({x + q.x * e, a.w * q.w});
        }
        const int M = 32;
        const double r_far = std::max(R_f, r_min);
        rad.clear();
        const double R_end = radial::append_far_panels(rad, r_far, sp, decay);
        const double w_rem = radial::remainder_weight(R_end, sp, decay);
        for (int k = 0; k < M; ++k) {
            const double th = 2.0 * kPi * (k + 0.5) / M;
            const Point e{std::cos(th), std::sin(th)};
            const double wa = 2.0 * kPi / M;
            for (const QNode& q : rad) rule.nodes.push_back({x + q.x * e, wa * q.w});
            remainder.push_back({x + R_end * e, wa * w_rem});
        }
    }
    rule.remainder_begin = rule.nodes.size();
    rule.nodes.insert(rule.nodes.end(), remainder.begin(), remainder.end());
    return rule;
}

}  // namespace nlpt
