#pragma once

#include <cstddef>
#include <vector>

#include "nlpt/domain.hpp"
#include "nlpt/point.hpp"

namespace nlpt {

struct QNode {
    double x;
    double w;
};

/// Gauss-Legendre rule with m points on [a, b]; m in {2,3,4,5,6,8,10,16,20}.
std::vector<QNode> gauss_legendre(int m, double a, double b);

/// Radial rules for the measure rho^(-1-sp) d rho, integrated in t = log rho.
namespace radial {

/// Ratio-2 shells covering [r0, r1], m Gauss points per shell.
void append_shells(std::vector<QNode>& out, double r0, double r1, double sp, int m);

/// Panels from r0 outward, widening by 1.5 per panel up to 4/decay in log
/// radius, until the envelope rho^(-decay) has dropped by 1e-12. Returns the
/// end radius; the caller closes the integral with remainder_weight.
double append_far_panels(std::vector<QNode>& out, double r0, double sp, double decay);

/// Mass of a node at radius R standing in for the integral over (R, inf) of
/// a profile growing like rho^(sp - decay) relative to rho^(-1-sp).
double remainder_weight(double R, double sp, double decay);

}  // namespace radial

/// Gauss rule on [a, b] with geometric refinement toward both end points
/// (`levels` extra subintervals per side, ratio 4).
void append_graded(std::vector<QNode>& out, double a, double b, int m, int levels);

/// Quadrature for integrals over the exterior of the grid box,
///   int_{y outside box, |y - x| > r_min} f(y) |x - y|^(-n-sp) dy  ~  sum_k w_k f(y_k),
/// polar around the point x (which must lie in the closed box). Nodes from
/// index `remainder_begin` on are collapsed far remainders.
struct PolarNode {
    Point y;
    double w;
};

struct ExteriorRule {
    std::vector<PolarNode> nodes;
    std::size_t remainder_begin = 0;
};

/// `decay` is the decay exponent of rho^(-sp) times the growth of f along rays
/// (sp for bounded f); it must be positive.
ExteriorRule exterior_rule(const Grid& grid, const Point& x, double sp, double decay, double r_min = 0.0);

/// Angles of the box corners and edge-normal feet seen from x (2D), sorted in [0, 2 pi).
std::vector<double> box_breakpoints(const Grid& grid, const Point& x);

constexpr double kPi = 3.14159265358979323846;

}  // namespace nlpt
