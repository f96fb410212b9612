#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "nlpt/error.hpp"
#include "nlpt/operator.hpp"
#include "nlpt/superharmonic.hpp"

using namespace nlpt;

namespace {

RegionMask unit_interval(int n) {
    auto g = build_grid({{-2.0, 2.0}}, {n});
    return make_mask(g, [](const Point& x) { return std::abs(x[0]) < 1.0; }, 2);
}

FieldFunction solve_bump(const RegionMask& m, const KernelSpec& k, double shift = 0.0) {
    const FieldFunction g = sample_field(
        m.grid_ptr(), [shift](const Point& x) { return std::abs(x[0]) >= 1.0 ? std::exp(-(x[0] - shift) * (x[0] - shift)) : 0.0; },
        FarFieldModel::zero());
    const SolveReport r = solve_dirichlet(g, m, k);
    REQUIRE(r.converged);
    return r.solution;
}

}  // namespace

TEST_CASE("summability exponents") {
    const auto a = summability_exponents(1, 0.3, 2.0);
    CHECK(a.t_bar == doctest::Approx(2.5));
    CHECK(a.q_bar == doctest::Approx(1.0 / 0.7));
    const auto b = summability_exponents(1, 0.5, 2.0);
    CHECK(std::isinf(b.t_bar));
    CHECK(b.q_bar == doctest::Approx(2.0));
    const auto c = summability_exponents(2, 0.5, 3.0);
    CHECK(c.t_bar == doctest::Approx(2.0 * 2.0 / 0.5));
    CHECK(c.q_bar == doctest::Approx(2.0 * 2.0 / 1.5));
}

TEST_CASE("lattice operations") {
    const RegionMask m = unit_interval(64);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 2.0);
    const FieldFunction u = solve_bump(m, k);
    const FieldFunction v = solve_bump(m, k, 0.5);
    CHECK(sup_norm_difference(pointwise_min(u, u), u) == 0.0);
    const FieldFunction big = sample_field(m.grid_ptr(), [](const Point&) { return 1e6; }, FarFieldModel::constant(1e6));
    CHECK(sup_norm_difference(pointwise_min(u, big), u) == 0.0);
    const Assembly a(m, k, u.far());
    CHECK(supersolution_check(pointwise_min(u, v), a, 1e-8).pass);

    const double top = *std::max_element(u.values().begin(), u.values().end());
    const double bot = *std::min_element(u.values().begin(), u.values().end());
    CHECK(sup_norm_difference(truncate_min(u, top), u) == 0.0);
    const FieldFunction low = truncate_min(u, bot - 1.0);
    for (double x : low.values()) CHECK(x == bot - 1.0);

    std::vector<double> sorted(u.values().begin(), u.values().end());
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const FieldFunction t = truncate_min(u, sorted[sorted.size() / 2]);
    CHECK(supersolution_check(t, a, 1e-8).pass);

    const FieldFunction lin = sample_field(m.grid_ptr(), [](const Point& x) { return x[0]; },
                                           FarFieldModel::power(1.0, 1.0, FarFieldModel::Parity::Odd));
    const FieldFunction pw = sample_field(m.grid_ptr(), [](const Point& x) { return x[0] * x[0]; },
                                          FarFieldModel::power_decay(1.0, 1.0));
    CHECK_THROWS_AS(pointwise_min(lin, pw), ConfigError);
}

TEST_CASE("infimal convolution against direct evaluation") {
    const RegionMask m = unit_interval(256);
    const Grid& g = m.grid();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-2.0, 3.0);
    std::vector<double> vals(g.size());
    for (double& v : vals) v = U(rng);
    const FieldFunction u(m.grid_ptr(), vals, FarFieldModel::zero());
    for (int j : {1, 2, 3, 7, 16}) {
        const FieldFunction psi = infimal_convolution(u, j, m);
        for (std::size_t x : m.interior()) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t y : m.interior()) {
                const double steps = static_cast<double>(x > y ? x - y : y - x);
                best = std::min(best, std::min(static_cast<double>(j), u[y]) + cone_cost(j, g.spacing(0), steps));
            }
            CHECK(psi[x] == best - 1.0 / j);
        }
    }
}

TEST_CASE("infimal convolution: flat input, spike, monotonicity and convergence") {
    const RegionMask m = unit_interval(128);
    const FieldFunction flat = sample_field(m.grid_ptr(), [](const Point&) { return 0.5; }, FarFieldModel::constant(0.5));
    for (std::size_t c : m.interior()) CHECK(infimal_convolution(flat, 3, m)[c] == 0.5 - 1.0 / 3.0);

    std::vector<double> spike(m.grid().size(), 0.0);
    const std::size_t x0 = m.interior()[10];
    spike[x0] = 10.0;
    const FieldFunction sp(m.grid_ptr(), spike, FarFieldModel::zero());
    const FieldFunction p2 = infimal_convolution(sp, 2, m);
    CHECK(p2[x0] == doctest::Approx(std::min(2.0 * 2.0 * m.grid().spacing(0), 2.0) - 0.5));

    const FieldFunction u = sample_field(m.grid_ptr(), [](const Point& x) { return std::sin(3.0 * x[0]) + 0.2; },
                                         FarFieldModel::zero());
    FieldFunction prev = infimal_convolution(u, 1, m);
    for (int j = 2; j <= 1024; j *= 2) {
        const FieldFunction cur = infimal_convolution(u, j, m);
        const int jp = j / 2;
        for (std::size_t c : m.interior()) {
            CHECK(cur[c] > prev[c]);
            CHECK(cur[c] < u[c]);
            CHECK(cur[c] - prev[c] >= (1.0 / jp - 1.0 / j) - 1e-12);
        }
        prev = cur;
    }
    for (std::size_t c : m.interior()) CHECK(std::abs(prev[c] - u[c]) <= 1.0 / 1024 + 1e-12);
}

TEST_CASE("lsc regularisation") {
    auto g = build_grid({{-1.0, 1.0}, {-1.0, 1.0}}, {8, 8});
    std::vector<double> v(g->size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = g->center(c)[0];
    v[g->flat(4, 4)] = 5.0;
    const FieldFunction f(g, v, FarFieldModel::zero());
    const FieldFunction r = lsc_regularize(f);
    CHECK(r[g->flat(4, 4)] == doctest::Approx(g->center(g->flat(3, 4))[0]));
    for (std::size_t c = 0; c < v.size(); ++c) CHECK(r[c] <= f[c]);
    std::vector<double> w = v;
    for (double& x : w) x += 0.1;
    const FieldFunction rw = lsc_regularize(f.with_values(w));
    for (std::size_t c = 0; c < v.size(); ++c) CHECK(r[c] <= rw[c]);
}

TEST_CASE("superharmonic check: solutions pass in both directions, dips fail") {
    const RegionMask m = unit_interval(64);
    for (double p : {1.5, 2.0, 3.0}) {
        const KernelSpec k = KernelSpec::gagliardo(1, 0.5, p);
        const FieldFunction u = solve_bump(m, k);
        SuperharmonicOptions opt;
        opt.trial_count = 12;
        const SuperharmonicReport a = superharmonic_check(u, m, k, opt);
        CHECK(a.pass);
        CHECK(a.trials == 12);
        CHECK(superharmonic_check(u.negated(), m, k, opt).pass);

        std::vector<double> dip(u.values().begin(), u.values().end());
        const std::size_t c = m.interior()[m.interior_count() / 2];
        dip[c] -= 0.1;
        const SuperharmonicReport b = superharmonic_check(u.with_values(dip), m, k, opt);
        CHECK_FALSE(b.pass);
        CHECK(b.witness_cell == c);
        CHECK_FALSE(b.witness_domain.empty());

        std::vector<double> sorted(u.values().begin(), u.values().end());
        std::sort(sorted.begin(), sorted.end());
        CHECK(superharmonic_check(truncate_min(u, sorted[sorted.size() / 2]), m, k, opt).pass);
    }
}

TEST_CASE("summability report") {
    const RegionMask m = unit_interval(64);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.4, 2.0);
    const FieldFunction one = sample_field(m.grid_ptr(), [](const Point&) { return 1.0; }, FarFieldModel::constant(1.0));
    const SummabilityReport r = summability_report(one, Ball{{0.0, 0.0}, 1.0}, k);
    CHECK(r.M == doctest::Approx(1.0));
    CHECK_FALSE(r.divergent);
    for (const auto& e : r.entries) {
        CHECK(e.seminorm == 0.0);
        CHECK(std::isfinite(e.ratio));
    }
    CHECK_THROWS_AS(summability_report(one, Ball{{0.0, 0.0}, 1.5}, k), ConfigError);
}
