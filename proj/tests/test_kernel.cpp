#include <cmath>
#include <random>

#include "doctest.h"
#include "nlpt/error.hpp"
#include "nlpt/kernel.hpp"

using namespace nlpt;

TEST_CASE("gagliardo kernel value") {
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 2.0);
    CHECK(kernel_eval(k, Point{0.0, 0.0}, Point{2.0, 0.0}) == doctest::Approx(0.25));
    CHECK(k.is_gagliardo());
}

TEST_CASE("non-symmetric coefficient is symmetrised") {
    auto rule = CoefficientRule::custom([](const Point& x, const Point& y) {
        return 1.0 + 0.5 * (x[0] > y[0] ? 1.0 : (x[0] < y[0] ? -1.0 : 0.0));
    });
    const KernelSpec k(1, 0.5, 2.0, 2.0, rule);
    const KernelSpec g = KernelSpec::gagliardo(1, 0.5, 2.0);
    const Point x{0.3, 0.0}, y{-1.1, 0.0};
    CHECK(kernel_eval(k, x, y) == doctest::Approx(kernel_eval(g, x, y)).epsilon(1e-15));
}

TEST_CASE("diagonal is an error") {
    const KernelSpec k = KernelSpec::gagliardo(2, 0.5, 2.0);
    CHECK_THROWS_AS(kernel_eval(k, Point{1.0, 1.0}, Point{1.0, 1.0}), NumericalError);
}

TEST_CASE("parameter clamps are hard errors") {
    CHECK_THROWS_AS(KernelSpec::gagliardo(1, 1.2, 2.0), ConfigError);
    CHECK_THROWS_AS(KernelSpec::gagliardo(1, 0.01, 2.0), ConfigError);
    CHECK_THROWS_AS(KernelSpec::gagliardo(1, 0.5, 1.05), ConfigError);
    CHECK_THROWS_AS(KernelSpec::gagliardo(1, 0.5, 9.0), ConfigError);
    CHECK_THROWS_AS(KernelSpec(1, 0.5, 2.0, 0.5, CoefficientRule::constant()), ConfigError);
    CHECK_THROWS_AS(KernelSpec::gagliardo(3, 0.5, 2.0), ConfigError);
}

TEST_CASE("exact symmetry for every built-in rule") {
    auto g = build_grid({{-1.0, 1.0}, {-1.0, 1.0}}, {16, 16});
    const std::vector<KernelSpec> specs{
        KernelSpec::gagliardo(2, 0.4, 2.5),
        KernelSpec(2, 0.4, 2.5, 3.0, CoefficientRule::hashed(17, 3.0, Point{-1.0, -1.0}, g->spacing())),
        KernelSpec(2, 0.4, 2.5, 3.0, CoefficientRule::checkerboard(0.3, 3.0)),
    };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (const auto& k : specs) {
        for (int t = 0; t < 2000; ++t) {
            const Point x{U(rng), U(rng)}, y{U(rng), U(rng)};
            CHECK(kernel_eval(k, x, y) == kernel_eval(k, y, x));
        }
    }
}

TEST_CASE("gagliardo scaling law") {
    for (int n : {1, 2}) {
        const KernelSpec k = KernelSpec::gagliardo(n, 0.35, 3.0);
        const Point x{0.2, -0.1}, d{0.3, n == 2 ? 0.4 : 0.0};
        for (double t : {0.01, 0.5, 3.0, 70.0}) {
            const double base = kernel_eval(k, x, x + d);
            const double scaled = kernel_eval(k, x, x + t * d);
            CHECK(std::abs(scaled - std::pow(t, -k.exponent()) * base) <= 1e-12 * scaled);
        }
    }
}

TEST_CASE("validate_bounds") {
    auto g = build_grid({{-1.0, 1.0}}, {64});
    const auto rep = validate_bounds(KernelSpec::gagliardo(1, 0.5, 2.0), *g, 200);
    CHECK(rep.min_coefficient == doctest::Approx(1.0));
    CHECK(rep.max_coefficient == doctest::Approx(1.0));

    const auto top = validate_bounds(KernelSpec(1, 0.5, 2.0, 2.5, CoefficientRule::constant(2.5)), *g, 200);
    CHECK(top.min_coefficient == doctest::Approx(2.5));

    const auto hashed = validate_bounds(
        KernelSpec(1, 0.5, 2.0, 4.0, CoefficientRule::hashed(9, 4.0, Point{-1.0, 0.0}, g->spacing())), *g, 1000);
    CHECK(hashed.min_coefficient >= 0.25);
    CHECK(hashed.max_coefficient <= 4.0);
    CHECK(hashed.max_coefficient / hashed.min_coefficient > 4.0);  // genuinely rough

    auto bad = CoefficientRule::custom([](const Point& x, const Point&) { return x[0] > 0.5 ? 3.0 : 1.0; });
    CHECK_THROWS_AS(validate_bounds(KernelSpec(1, 0.5, 2.0, 2.0, bad), *g, 500), ValidationError);
    CHECK_THROWS_AS(validate_bounds(KernelSpec::gagliardo(1, 0.5, 2.0), *g, 10), ConfigError);
}

TEST_CASE("hashed coefficients are reproducible") {
    auto r1 = CoefficientRule::hashed(42, 2.0, Point{0.0, 0.0}, 0.1);
    auto r2 = CoefficientRule::hashed(42, 2.0, Point{0.0, 0.0}, 0.1);
    auto r3 = CoefficientRule::hashed(43, 2.0, Point{0.0, 0.0}, 0.1);
    const Point x{0.15, 0.0}, y{0.73, 0.0};
    CHECK(r1(x, y) == r2(x, y));
    CHECK(r1(x, y) == r1(y, x));
    CHECK(r1(x, y) != r3(x, y));
}
