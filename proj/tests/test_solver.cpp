#include <cmath>
#include <random>

#include "doctest.h"
#include "nlpt/error.hpp"
#include "nlpt/solver.hpp"

using namespace nlpt;

namespace {

RegionMask unit_interval(int n) {
    auto g = build_grid({{-2.0, 2.0}}, {n});
    return make_mask(g, [](const Point& x) { return std::abs(x[0]) < 1.0; }, 2);
}

FieldFunction data_1d(const RegionMask& m, double (*f)(double), FarFieldModel far = FarFieldModel::zero()) {
    return sample_field(m.grid_ptr(), [f](const Point& x) { return f(x[0]); }, far);
}

double bump(double x) { return std::abs(x) >= 1.0 ? std::exp(-x * x) * (x > 0 ? 1.0 : 0.5) : 0.0; }
double step(double x) { return x > 0.0 ? 1.0 : 0.0; }

// Dense Gaussian elimination of the p = 2 normal equations.
std::vector<double> direct_solve(const Assembly& a, std::span<const double> values) {
    const std::size_t R = a.rows();
    const auto cells = a.mask().interior();
    std::vector<double> M(R * R, 0.0), b(R, 0.0);
    std::vector<double> zeroed(values.begin(), values.end());
    for (std::size_t c : cells) zeroed[c] = 0.0;
    std::vector<double> g0(R);
    a.gradient(zeroed, 0.0, g0);
    for (std::size_t k = 0; k < R; ++k) {
        b[k] = -g0[k];
        for (std::size_t m = 0; m < R; ++m) M[k * R + m] = -a.weight(k, cells[m]);
        M[k * R + k] += a.row_mass(k) + a.far_mass(k);
    }
    for (std::size_t col = 0; col < R; ++col)
        for (std::size_t r = col + 1; r < R; ++r) {
            const double f = M[r * R + col] / M[col * R + col];
            for (std::size_t c = col; c < R; ++c) M[r * R + c] -= f * M[col * R + c];
            b[r] -= f * b[col];
        }
    std::vector<double> x(R);
    for (std::size_t r = R; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < R; ++c) acc -= M[r * R + c] * x[c];
        x[r] = acc / M[r * R + r];
    }
    return x;
}

}  // namespace

TEST_CASE("constant data: exact solution with no iterations") {
    const RegionMask m = unit_interval(64);
    for (double p : {1.5, 2.0, 3.0}) {
        const FieldFunction g = sample_field(m.grid_ptr(), [](const Point&) { return 0.7; }, FarFieldModel::constant(0.7));
        const SolveReport r = solve_dirichlet(g, m, KernelSpec::gagliardo(1, 0.5, p));
        CHECK(r.converged);
        CHECK(r.iterations == 0);
        for (double v : r.solution.values()) CHECK(v == 0.7);
    }
}

TEST_CASE("p = 2 CG agrees with a dense direct solve") {
    const RegionMask m = unit_interval(64);
    const FieldFunction g = data_1d(m, bump);
    const Assembly a(m, KernelSpec::gagliardo(1, 0.4, 2.0), g.far());
    const SolveReport r = solve_dirichlet(g, a);
    REQUIRE(r.converged);
    const std::vector<double> x = direct_solve(a, g.values());
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(r.solution[m.interior()[k]] - x[k]) <= 1e-9);
}

TEST_CASE("nonlinear solves reach the residual tolerance with monotone energy") {
    const RegionMask m = unit_interval(64);
    const FieldFunction g = data_1d(m, bump);
    for (double p : {1.5, 3.0}) {
        for (double s : {0.3, 0.7}) {
            SolverConfig cfg;
            cfg.record_energy = true;
            const SolveReport r = solve_dirichlet(g, m, KernelSpec::gagliardo(1, s, p), cfg);
            CHECK(r.converged);
            CHECK(r.final_residual <= 1e-10);
            for (std::size_t k = 1; k < r.energy_trace.size(); ++k)
                CHECK(r.energy_trace[k] <= r.energy_trace[k - 1] + 1e-13 * std::abs(r.energy_trace[0]));
        }
    }
}

TEST_CASE("the solution minimises the energy among random perturbations") {
    const RegionMask m = unit_interval(32);
    const FieldFunction g = data_1d(m, step);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.6, 1.6);
    const Assembly a(m, k, g.far());
    const SolveReport r = solve_dirichlet(g, a);
    REQUIRE(r.converged);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0.0, 1e-3);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> v(r.solution.values().begin(), r.solution.values().end());
        for (std::size_t c : m.interior()) v[c] += N(rng);
        CHECK(a.variable_energy(v, 0.0) >= r.energy);
    }
}

TEST_CASE("odd data gives odd solutions") {
    const RegionMask m = unit_interval(64);
    const FieldFunction g = data_1d(m, [](double x) { return std::abs(x) >= 1.0 ? std::tanh(x) : 0.0; });
    const SolveReport r = solve_dirichlet(g, m, KernelSpec::gagliardo(1, 0.5, 2.5));
    REQUIRE(r.converged);
    const std::size_t n = g.size();
    for (std::size_t c = 0; c < n; ++c) CHECK(std::abs(r.solution[c] + r.solution[n - 1 - c]) <= 1e-8);
}

TEST_CASE("comparison: ordered data give ordered solutions") {
    const RegionMask m = unit_interval(64);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 1.5);
    const FieldFunction lo = data_1d(m, bump);
    const FieldFunction hi = data_1d(m, [](double x) { return bump(x) + (std::abs(x) >= 1.0 ? 0.2 * std::cos(x) + 0.2 : 0.0); });
    const SolveReport a = solve_dirichlet(lo, m, k);
    const SolveReport b = solve_dirichlet(hi, m, k);
    const ComparisonReport c = comparison_check(b.solution, a.solution, m, 1e-9);
    CHECK(c.pass);
    CHECK(c.margin >= 0.0);
    CHECK_THROWS_AS(comparison_check(a.solution, b.solution, m, 1e-9), ValidationError);
}

TEST_CASE("2D solve with rough coefficients") {
    auto g = build_grid({{-1.5, 1.5}, {-1.5, 1.5}}, {24, 24});
    const RegionMask m = make_mask(g, [](const Point& x) { return norm(x) < 0.9; }, 1);
    const FieldFunction d = sample_field(g, [](const Point& x) { return x[0] * x[0] - 0.5 * x[1]; }, FarFieldModel::zero());
    for (double p : {1.5, 2.0, 3.0}) {
        const KernelSpec k(2, 0.5, p, 3.0, CoefficientRule::hashed(11, 3.0, Point{-1.5, -1.5}, g->spacing()));
        const SolveReport r = solve_dirichlet(d, m, k);
        CHECK(r.converged);
    }
}

TEST_CASE("stability along a monotone sequence") {
    const RegionMask m = unit_interval(48);
    std::vector<FieldFunction> seq;
    for (int k = 1; k <= 4; ++k) {
        const double t = 1.0 - std::pow(0.5, k);
        seq.push_back(sample_field(m.grid_ptr(), [t](const Point& x) { return std::abs(x[0]) >= 1.0 ? t : 0.0; },
                                   FarFieldModel::constant(t)));
    }
    const FieldFunction limit =
        sample_field(m.grid_ptr(), [](const Point& x) { return std::abs(x[0]) >= 1.0 ? 1.0 : 0.0; }, FarFieldModel::constant(1.0));
    const StabilityReport r = stability_run(seq, limit, m, KernelSpec::gagliardo(1, 0.5, 2.0), {}, 0.07);
    CHECK(r.monotone == 1);
    CHECK(r.limit_gap == doctest::Approx(0.0625).epsilon(1e-6));
    CHECK(r.pass);
    for (std::size_t k = 1; k < r.increments.size(); ++k) CHECK(r.increments[k] < r.increments[k - 1]);
}

TEST_CASE("invalid solver settings are rejected") {
    SolverConfig cfg;
    cfg.smoothing_ratio = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.init = InitMode::Given;
    const RegionMask m = unit_interval(16);
    CHECK_THROWS_AS(solve_dirichlet(data_1d(m, bump), m, KernelSpec::gagliardo(1, 0.5, 2.0), cfg), ConfigError);
}
