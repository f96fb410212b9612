#include <cmath>

#include "doctest.h"
#include "nlpt/error.hpp"
#include "nlpt/obstacle.hpp"
#include "nlpt/operator.hpp"

using namespace nlpt;

namespace {

ObstacleRules bump_rules(double height) {
    ObstacleRules r;
    r.box = {{-2.0, 2.0}};
    r.interior = [](const Point& x) { return std::abs(x[0]) < 1.0; };
    r.buffer_width = 2;
    r.g = [](const Point&) { return 0.0; };
    r.g_far = FarFieldModel::zero();
    r.h = [height](const Point& x) {
        const double t = std::abs(x[0]) / 0.5;
        return t < 1.0 ? height * (1.0 - t * t) : -1.0;
    };
    return r;
}

}  // namespace

TEST_CASE("no obstacle reproduces the Dirichlet solve") {
    ObstacleRules r = bump_rules(1.0);
    r.h.reset();
    r.g = [](const Point& x) { return std::abs(x[0]) >= 1.0 ? std::sin(2.0 * x[0]) : 0.0; };
    const ObstacleProblem pb = sample_problem(r, 64);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 2.0);
    const ObstacleReport o = solve_obstacle(pb, k);
    const SolveReport d = solve_dirichlet(pb.g, pb.mask, k);
    REQUIRE(o.solve.converged);
    CHECK(sup_norm_difference(o.solve.solution, d.solution) <= 1e-9);
    CHECK(o.active_count == 0);
    CHECK(complementarity_check(o.solve.solution, pb, k, 1e-8).pass);
}

TEST_CASE("dominating obstacle: u = h on the whole interior") {
    ObstacleRules r = bump_rules(1.0);
    r.h = [](const Point& x) { return std::abs(x[0]) < 1.0 ? 2.0 : 0.0; };
    const ObstacleProblem pb = sample_problem(r, 64);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 2.0);
    const ObstacleReport o = solve_obstacle(pb, k);
    REQUIRE(o.solve.converged);
    CHECK(o.active_count == pb.mask.interior_count());
    for (std::size_t c : pb.mask.interior()) CHECK(o.solve.solution[c] == 2.0);
    const ComplementarityReport cr = complementarity_check(o.solve.solution, pb, k, 1e-8);
    CHECK(cr.pass);
    CHECK(cr.supersolution > 0.0);
}

TEST_CASE("bump obstacle: plateau, complementarity and negative control") {
    for (double p : {2.0, 2.5, 1.6}) {
        const ObstacleProblem pb = sample_problem(bump_rules(1.0), 128);
        const KernelSpec k = KernelSpec::gagliardo(1, 0.5, p);
        const ObstacleReport o = solve_obstacle(pb, k);
        REQUIRE(o.solve.converged);
        const FieldFunction& u = o.solve.solution;
        CHECK(o.active_count > 0);
        CHECK(o.active_count < pb.mask.interior_count());
        for (std::size_t c : pb.mask.interior()) {
            CHECK(u[c] > 0.0);
            CHECK(u[c] >= (*pb.h)[c]);
        }
        CHECK(o.variational_margin >= -1e-8);
        const ComplementarityReport cr = complementarity_check(u, pb, k, 1e-8);
        CHECK(cr.pass);
        CHECK(cr.detached <= 1e-8);
        CHECK(supersolution_check(u, Assembly(pb.mask, k, pb.g.far()), 1e-8).pass);

        // Lift one detached cell.
        std::size_t target = 0;
        for (std::size_t c : pb.mask.interior())
            if (!o.active[c]) target = c;
        std::vector<double> bad(u.values().begin(), u.values().end());
        bad[target] += 1e-3;
        const ComplementarityReport br = complementarity_check(u.with_values(bad), pb, k, 1e-8);
        CHECK_FALSE(br.pass);
        CHECK(br.witness == target);
    }
}

TEST_CASE("obstacle solution does not depend on the start") {
    const ObstacleProblem pb = sample_problem(bump_rules(0.8), 96);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.4, 2.5);
    SolverConfig zero;
    zero.init = InitMode::Zero;
    const ObstacleReport a = solve_obstacle(pb, k);
    const ObstacleReport b = solve_obstacle(pb, k, zero);
    REQUIRE(a.solve.converged);
    REQUIRE(b.solve.converged);
    CHECK(sup_norm_difference(a.solve.solution, b.solve.solution) <= 1e-8);
}

TEST_CASE("monotone in the obstacle") {
    const KernelSpec k = KernelSpec::gagliardo(1, 0.6, 2.0);
    const ObstacleProblem lo = sample_problem(bump_rules(0.5), 96);
    const ObstacleProblem hi = sample_problem(bump_rules(1.0), 96);
    const ObstacleReport a = solve_obstacle(lo, k);
    const ObstacleReport b = solve_obstacle(hi, k);
    for (std::size_t c = 0; c < a.solve.solution.size(); ++c) CHECK(a.solve.solution[c] <= b.solve.solution[c] + 1e-8);
}

TEST_CASE("empty constraint set is an error") {
    ObstacleRules r = bump_rules(1.0);
    r.h = [](const Point&) { return 1.0; };
    auto g = build_grid(r.box, {64});
    const RegionMask m = make_mask(g, r.interior, 2);
    const ObstacleProblem pb{sample_field(g, r.g, r.g_far), sample_field(g, *r.h, FarFieldModel::zero()), m};
    CHECK_THROWS_AS(solve_obstacle(pb, KernelSpec::gagliardo(1, 0.5, 2.0)), ConfigError);
}

TEST_CASE("continuity probe") {
    ObstacleRules flat = bump_rules(1.0);
    flat.h.reset();
    flat.g = [](const Point&) { return 3.0; };
    flat.g_far = FarFieldModel::constant(3.0);
    const KernelSpec k = KernelSpec::gagliardo(1, 0.5, 2.0);
    const ContinuityReport c0 = continuity_probe(flat, k, {32, 64, 128});
    CHECK(c0.pass);
    for (double j : c0.jumps) CHECK(j == 0.0);

    ObstacleRules smooth = bump_rules(1.0);
    smooth.h.reset();
    smooth.g = [](const Point& x) { return std::cos(x[0]); };
    smooth.g_far = FarFieldModel::zero();
    const ContinuityReport c1 = continuity_probe(smooth, k, {32, 64, 128});
    CHECK(c1.pass);
    CHECK(c1.alpha > 0.0);

    ObstacleRules jump = smooth;
    jump.g = [](const Point& x) { return x[0] > 1.6 ? 1.0 : 0.0; };
    const ContinuityReport c2 = continuity_probe(jump, k, {32, 64, 128});
    CHECK(c2.pass);
}
