#include <cmath>

#include "doctest.h"
#include "nlpt/error.hpp"
#include "nlpt/quadrature.hpp"
#include "nlpt/solver.hpp"
#include "nlpt/verify.hpp"

using namespace nlpt;

namespace {

RegionMask unit_interval(int n) {
    auto g = build_grid({{-2.0, 2.0}}, {n});
    return make_mask(g, [](const Point& x) { return std::abs(x[0]) < 1.0; }, 1);
}

double detail(const InequalityReport& r, const std::string& key) {
    for (const auto& [k, v] : r.details)
        if (k == key) return v;
    FAIL("missing detail " << key);
    return 0.0;
}

double right_bump(const Point& y) {
    const double r2 = (y[0] - 1.5) * (y[0] - 1.5) / 0.09;
    return std::abs(y[0]) >= 1.0 && r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
}

}  // namespace

TEST_CASE("poisson calibration reproduces the closed-form constant") {
    // c_{1,s} = sin(pi s) / pi, c_{2,s} = sin(pi s) / pi^2.
    CHECK(calibrate_poisson(1, 0.5).constant == doctest::Approx(0.31830988618379067).epsilon(1e-12));
    CHECK(calibrate_poisson(1, 0.3).constant == doctest::Approx(0.25751810740024185).epsilon(1e-12));
    CHECK(calibrate_poisson(1, 0.8).constant == doctest::Approx(0.18709785675772778).epsilon(1e-10));
    CHECK(calibrate_poisson(2, 0.5).constant == doctest::Approx(0.10132118364233778).epsilon(1e-10));
    for (double s : {0.05, 0.3, 0.5, 0.8, 0.95}) CHECK(calibrate_poisson(1, s).calibration_residual <= 1e-6);
    CHECK_THROWS_AS(calibrate_poisson(3, 0.5), ConfigError);
    CHECK_THROWS_AS(calibrate_poisson(1, 1.0), ConfigError);
}

TEST_CASE("poisson formula: trivial data, oddness and divergence") {
    const PoissonOracle o = calibrate_poisson(1, 0.5);
    const ValueRule zero = [](const Point&) { return 0.0; };
    const ValueRule one = [](const Point&) { return 1.0; };
    const ValueRule odd = [](const Point& y) { return std::abs(y[0]) < 3.0 ? std::sin(y[0]) : 0.0; };
    for (double x : {-0.7, 0.0, 0.3, 0.99}) {
        CHECK(poisson_formula(o, zero, {x, 0.0}).value == 0.0);
        CHECK(poisson_formula(o, one, {x, 0.0}).value == doctest::Approx(1.0).epsilon(1e-9));
        const double a = poisson_formula(o, odd, {x, 0.0}).value;
        const double b = poisson_formula(o, odd, {-x, 0.0}).value;
        CHECK(a == doctest::Approx(-b).epsilon(1e-12));
    }
    const ValueRule singular = [](const Point& y) { return std::pow(std::abs(y[0] * y[0] - 1.0), -0.5); };
    const PoissonValue v = poisson_formula(o, singular, {0.2, 0.0});
    CHECK(v.divergent);
    CHECK(v.where == "boundary");
    CHECK(std::isnan(v.value));
    const ValueRule growing = [](const Point& y) { return std::abs(y[0]); };
    const PoissonValue w = poisson_formula(o, growing, {0.0, 0.0});
    CHECK(w.divergent);
    CHECK(w.where == "infinity");
    CHECK_THROWS_AS(poisson_formula(o, one, {1.0, 0.0}), ConfigError);
}

TEST_CASE("poisson formula against the solver") {
    const PoissonComparison c = poisson_vs_solver(right_bump, FarFieldModel::zero(), 1, 0.5, {64, 128, 256});
    CHECK(c.pass);
    CHECK(c.decreasing);
    CHECK(c.discrepancies.back() <= 0.02);

    const PoissonComparison k = poisson_vs_solver([](const Point&) { return 0.7; }, FarFieldModel::constant(0.7), 1,
                                                  0.3, {64, 128});
    CHECK(k.pass);
    for (double d : k.discrepancies) CHECK(d <= 1e-6);

    // Reflected data: the solver output is odd.
    const RegionMask m = unit_interval(128);
    const ValueRule anti = [](const Point& y) { return right_bump(y) - right_bump(Point{-y[0], 0.0}); };
    const SolveReport r = solve_dirichlet(sample_field(m.grid_ptr(), anti, FarFieldModel::zero()), m,
                                          KernelSpec::gagliardo(1, 0.5, 2.0));
    REQUIRE(r.converged);
    const std::size_t n = m.grid().size();
    for (std::size_t c : m.interior()) CHECK(std::abs(r.solution[c] + r.solution[n - 1 - c]) <= 1e-9);
}

TEST_CASE("blow-up probe: logarithmic growth at the sphere, integrable control settles") {
    const PoissonOracle o = calibrate_poisson(1, 0.5);
    const std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    const std::vector<double> radii{2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0};
    const BlowupReport b = blowup_probe(o, -0.5, deltas, radii);
    CHECK(b.growing);
    CHECK(b.outer_converges);
    for (std::size_t k = 1; k < deltas.size(); ++k) CHECK(b.inner_values[k] > b.inner_values[k - 1]);
    // Near the sphere the integrand is c / t, so each decade adds c ln 10.
    CHECK(b.inner_values[4] - b.inner_values[3] == doctest::Approx(o.constant * std::log(10.0)).epsilon(1e-3));
    const BlowupReport ctrl = blowup_probe(o, 0.25, deltas, radii);
    CHECK_FALSE(ctrl.growing);
    for (double r : ctrl.increment_ratios) CHECK(r < 0.5);
    CHECK_THROWS_AS(blowup_probe(o, -0.5, {1e-1, 1e-2}, radii), ConfigError);
}

TEST_CASE("refinement study") {
    InequalityReport a, b;
    a.pass = b.pass = true;
    a.constant = 1.0;
    b.constant = 1.9;
    a.resolutions = {64};
    b.resolutions = {128};
    CHECK(refinement_study({a, b}).pass);
    b.constant = 2.1;
    const InequalityReport bad = refinement_study({a, b});
    CHECK_FALSE(bad.pass);
    CHECK(bad.constants == std::vector<double>{1.0, 2.1});
    CHECK(bad.resolutions == std::vector<int>{64, 128});
    a.vacuous = b.vacuous = true;
    a.constant = b.constant = 0.0;
    CHECK(refinement_study({a, b}).pass);
}

TEST_CASE("caccioppoli: trivial and vacuous cases") {
    const RegionMask m = unit_interval(64);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 2.0);
    const FieldFunction one = sample_field(m.grid_ptr(), [](const Point&) { return 1.0; }, FarFieldModel::constant(1.0));
    const InequalityReport r = caccioppoli_check(one, m, Ball{{0.0, 0.0}, 0.5}, 0.5, k);
    CHECK(r.vacuous);
    CHECK(r.pass);
    CHECK(r.lhs == 0.0);
    // Level above the constant: w is constant, so the lhs equals the local term.
    const InequalityReport t = caccioppoli_check(one, m, Ball{{0.0, 0.0}, 0.5}, 2.0, k);
    CHECK(t.pass);
    CHECK(t.lhs == doctest::Approx(detail(t, "local_term")).epsilon(1e-12));
    CHECK(detail(t, "tail_term") > 0.0);
    CHECK(t.constant < 1.0);
    CHECK_THROWS_AS(caccioppoli_check(one, m, Ball{{0.5, 0.0}, 0.9}, 0.5, k), ConfigError);
}

TEST_CASE("local boundedness of constants") {
    const RegionMask m = unit_interval(128);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 2.0);
    const FieldFunction c = sample_field(m.grid_ptr(), [](const Point&) { return 0.3; }, FarFieldModel::constant(0.3));
    // Tail(c; r/2) = 2c here, so c(delta) = max(1 - 2 delta, 0) delta^(1/2).
    const InequalityReport r = local_boundedness_check(c, m, Ball{{0.0, 0.0}, 0.5}, k, {1.0, 0.5, 0.1, 0.01});
    CHECK(r.pass);
    CHECK(detail(r, "gamma") == 0.5);
    CHECK(detail(r, "tail") == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(r.constant == doctest::Approx(0.8 * std::sqrt(0.1)).epsilon(1e-6));
    const InequalityReport neg = local_boundedness_check(c.negated(), m, Ball{{0.0, 0.0}, 0.5}, k, {1.0, 0.1});
    CHECK(neg.vacuous);
    CHECK(neg.pass);
    CHECK_THROWS_AS(local_boundedness_check(c, m, Ball{{0.0, 0.0}, 0.5}, k, {1.5}), ConfigError);
}

TEST_CASE("weak harnack: constants and the exponent range") {
    const RegionMask m = unit_interval(128);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.3, 2.0);
    const FieldFunction c = sample_field(m.grid_ptr(), [](const Point&) { return 0.4; }, FarFieldModel::constant(0.4));
    const InequalityReport r = weak_harnack_check(c, m, {0.0, 0.0}, 0.2, 0.8, k, {1.0, 2.0});
    CHECK(r.pass);
    CHECK(r.constant == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(detail(r, "t_bar") == doctest::Approx(2.5));
    CHECK_THROWS_AS(weak_harnack_check(c, m, {0.0, 0.0}, 0.2, 0.8, k, {3.0}), ConfigError);
    CHECK_THROWS_AS(weak_harnack_check(c, m, {0.0, 0.0}, 0.5, 0.8, k, {1.0}), ConfigError);
}

TEST_CASE("holder: constants, affine data and a rough kernel") {
    const RegionMask m = unit_interval(128);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 2.0);
    const std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
    const FieldFunction c = sample_field(m.grid_ptr(), [](const Point&) { return 1.0; }, FarFieldModel::constant(1.0));
    const InequalityReport rc = holder_check(c, m, {0.0, 0.0}, 0.4, radii, k);
    CHECK(rc.vacuous);
    CHECK(rc.pass);
    const FieldFunction lin = sample_field(m.grid_ptr(), [](const Point& x) { return x[0]; },
                                           FarFieldModel::power(1.0, 1.0, FarFieldModel::Parity::Odd));
    const InequalityReport rl = holder_check(lin, m, {0.0, 0.0}, 0.4, radii, KernelSpec::gagliardo(1, 0.7, 2.0));
    CHECK(detail(rl, "alpha") == doctest::Approx(1.0).epsilon(0.05));
    CHECK_THROWS_AS(holder_check(c, m, {0.0, 0.0}, 0.4, {0.4, 0.2}, k), ConfigError);

    const KernelSpec rough(1, 0.5, 2.0, 2.0, CoefficientRule::hashed(5, 2.0, {-2.0, 0.0}, 0.125));
    std::vector<InequalityReport> runs;
    for (int n : {128, 256}) {
        const RegionMask mm = unit_interval(n);
        const SolveReport s = solve_dirichlet(sample_field(mm.grid_ptr(), right_bump, FarFieldModel::zero()), mm, rough);
        REQUIRE(s.converged);
        runs.push_back(holder_check(s.solution, mm, {0.0, 0.0}, 0.4, radii, rough));
        CHECK(detail(runs.back(), "alpha") > 0.0);
    }
    CHECK(refinement_study(runs).pass);
}

TEST_CASE("algebraic reports") {
    const auto reps = algebraic_reports(5000);
    REQUIRE(reps.size() == 3);
    for (const auto& r : reps) {
        CHECK(r.pass);
        CHECK(r.constants.size() == 2);
    }
    CHECK(reps[0].constant <= 4.0);
}

TEST_CASE("suite on defaults passes and every negative control fails") {
    SuiteOptions o;
    o.resolution = 64;
    o.poisson_resolutions = {64, 128, 256};
    const auto reps = run_suite(Suite::All, o);
    CHECK(reps.size() >= 8);
    for (const auto& r : reps) {
        INFO(r.name << ": " << r.note);
        CHECK(r.pass);
    }
    o.threads = 3;
    const auto again = run_suite(Suite::All, o);
    REQUIRE(again.size() == reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
        CHECK(again[i].name == reps[i].name);
        CHECK(again[i].constant == reps[i].constant);
    }
    const auto neg = negative_controls(o);
    CHECK(neg.size() >= 6);
    for (const auto& r : neg) {
        INFO(r.name);
        CHECK_FALSE(r.pass);
    }
    CHECK(run_suite(Suite::Holder, o).size() == 1);
    CHECK(parse_suite("harnack") == Suite::Harnack);
    CHECK_THROWS_AS(parse_suite("nope"), ConfigError);
}
