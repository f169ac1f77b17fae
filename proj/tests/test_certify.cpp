#include "nstr/certify.hpp"

#include "nstr/bench.hpp"
#include "nstr/driver.hpp"
#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace nstr;
using nstr::test::vec2;
using Catch::Approx;

namespace {

BoxDomain box1(double lo, double hi) {
    return {Vec::Constant(1, lo), Vec::Constant(1, hi)};
}

}  // namespace

TEST_CASE("quadrature-mode level iteration") {
    SECTION("negative parabola reproduces the analytic sequence") {
        auto f = [](const Vec& x) { return -x[0] * x[0]; };
        ZhengOptions opt;
        opt.mode = ZhengMode::Quadrature1d;
        opt.alpha0 = -1.0;
        opt.max_sweeps = 40;
        ZhengResult r = zheng_maximize(f, box1(-1, 1), opt);
        REQUIRE(r.levels.size() >= 2);
        CHECK(r.levels[0] == Approx(-1.0 / 3.0).margin(1e-10));
        CHECK(r.levels[1] == Approx(-1.0 / 9.0).margin(1e-10));
        CHECK(r.alpha_star == Approx(0.0).margin(1e-5));
    }

    SECTION("constant objective is a one-sweep fixed point") {
        auto f = [](const Vec&) { return 3.25; };
        ZhengOptions opt;
        opt.mode = ZhengMode::Quadrature1d;
        opt.alpha0 = 0.0;
        ZhengResult r = zheng_maximize(f, box1(-1, 1), opt);
        REQUIRE(!r.levels.empty());
        CHECK(r.levels[0] == Approx(3.25));
        CHECK(r.alpha_star == Approx(3.25));
        CHECK(r.iterations <= 3);
    }

    SECTION("linear ramp climbs by halves toward the top") {
        auto f = [](const Vec& x) { return x[0]; };
        ZhengOptions opt;
        opt.mode = ZhengMode::Quadrature1d;
        opt.alpha0 = 0.0;
        opt.max_sweeps = 30;
        ZhengResult r = zheng_maximize(f, box1(0, 1), opt);
        REQUIRE(r.levels.size() >= 2);
        CHECK(r.levels[0] == Approx(0.5).margin(1e-10));
        CHECK(r.levels[1] == Approx(0.75).margin(1e-10));
        CHECK(r.alpha_star == Approx(1.0).margin(1e-5));
    }

    SECTION("levels never decrease") {
        auto f = [](const Vec& x) { return std::max(-2.0, 1.0 - std::abs(x[0] - 0.3)); };
        ZhengOptions opt;
        opt.mode = ZhengMode::Quadrature1d;
        opt.alpha0 = -1.5;
        opt.max_sweeps = 50;
        ZhengResult r = zheng_maximize(f, box1(-1, 1), opt);
        for (std::size_t i = 1; i < r.levels.size(); ++i)
            CHECK(r.levels[i] >= r.levels[i - 1] - 1e-12);
    }
}

TEST_CASE("Monte-Carlo mode") {
    SECTION("levels track the analytic map within three standard errors") {
        auto f = [](const Vec& x) { return -x[0] * x[0]; };
        ZhengOptions opt;
        opt.alpha0 = -1.0;
        opt.seed = 42;
        opt.max_sweeps = 4;
        opt.var_tol = 0.0;  // run all four sweeps
        ZhengResult r = zheng_maximize(f, box1(-1, 1), opt);
        REQUIRE(r.levels.size() >= 3);
        double prev = -1.0;
        for (std::size_t k = 0; k < 3; ++k) {
            double expect = prev / 3.0;  // mean of -x^2 over [-s, s], s^2 = -prev
            CHECK(std::abs(r.levels[k] - expect) <= 3.0 * r.std_errors[k] + 1e-12);
            prev = r.levels[k];
        }
    }

    SECTION("monotone level sequence across twenty seeds") {
        auto f = [](const Vec& x) { return x[0] - 0.5 * x[0] * x[0]; };
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            ZhengOptions opt;
            opt.seed = seed;
            opt.max_sweeps = 30;
            ZhengResult r = zheng_maximize(f, box1(-1, 1), opt);
            for (std::size_t i = 1; i < r.levels.size(); ++i)
                CHECK(r.levels[i] >= r.levels[i - 1] - 1e-12);
        }
    }

    SECTION("deterministic for a fixed seed and any thread count") {
        auto f = [](const Vec& x) { return -(x - Vec::Constant(2, 0.3)).squaredNorm(); };
        BoxDomain box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)};
        ZhengOptions a, b, c;
        a.seed = b.seed = c.seed = 9;
        a.threads = 1;
        b.threads = 4;
        c.threads = 3;
        ZhengResult ra = zheng_maximize(f, box, a);
        ZhengResult rb = zheng_maximize(f, box, b);
        ZhengResult rc = zheng_maximize(f, box, c);
        CHECK(ra.alpha_star == rb.alpha_star);
        CHECK(ra.alpha_star == rc.alpha_star);
        CHECK(ra.levels == rb.levels);
        CHECK((ra.argbest - rc.argbest).norm() == 0.0);
    }

    SECTION("level above the maximum reports an empty superlevel set") {
        auto f = [](const Vec& x) { return -x[0] * x[0]; };
        ZhengOptions opt;
        opt.alpha0 = 1.0;  // unattainable
        ZhengResult r = zheng_maximize(f, box1(-1, 1), opt);
        CHECK(r.empty_superlevel);
        CHECK(r.alpha_star <= 1.0);
        CHECK(r.alpha_star >= -1e-6);  // falls back to the best sample
    }

    SECTION("certifier level dominates the local solver bound") {
        LftPlant p = random_lft_instance(2, 4, 321, true);
        SolverConfig cfg;
        WorstCaseRun run = worst_case_alpha_run(p, cfg);
        auto alpha_of = [&](const Vec& d) {
            return spectral_abscissa_value(closed_loop_A(p, d));
        };
        ZhengOptions opt;
        opt.seed = 5;
        BoxDomain box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)};
        ZhengResult r = zheng_maximize(alpha_of, box, opt);
        double se = r.std_errors.empty() ? 0.0 : r.std_errors.back();
        CHECK(r.alpha_star >= run.value - 3.0 * se - 1e-3);
    }
}

TEST_CASE("grid oracle") {
    auto f1 = [](const Vec& d) { return d[0]; };
    GridResult g = grid_certify(f1, box1(-1, 1), 0.5);
    CHECK(g.max_value == Approx(1.0));
    CHECK(g.argmax[0] == Approx(1.0));

    auto f2 = [](const Vec& d) { return -d.squaredNorm(); };
    BoxDomain box2{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)};
    GridResult g2 = grid_certify(f2, box2, 0.5);
    CHECK(g2.max_value == Approx(0.0).margin(1e-14));  // grid contains the origin
    CHECK(g2.argmax.norm() == Approx(0.0).margin(1e-14));

    // affine objectives over a box peak at a corner, found exactly
    auto f3 = [](const Vec& d) { return 0.7 * d[0] - 1.3 * d[1]; };
    GridResult g3 = grid_certify(f3, box2, 0.25);
    CHECK(g3.max_value == Approx(2.0));
    CHECK(g3.argmax[0] == Approx(1.0));
    CHECK(g3.argmax[1] == Approx(-1.0));

    BoxDomain big{Vec::Constant(4, -1.0), Vec::Constant(4, 1.0)};
    CHECK_THROWS_AS(grid_certify(f2, big, 0.5), std::invalid_argument);
}

TEST_CASE("stability decision on the scalar loop") {
    LftPlant p;
    p.A = Mat::Constant(1, 1, -1.0);
    p.Bp = Mat::Constant(1, 1, 1.0);
    p.Cq = Mat::Constant(1, 1, 1.0);
    p.Dqp = Mat::Zero(1, 1);
    p.Bw = Mat::Constant(1, 1, 1.0);
    p.Dqw = Mat::Zero(1, 1);
    p.Cz = Mat::Constant(1, 1, 1.0);
    p.Dzp = Mat::Zero(1, 1);
    p.Dzw = Mat::Zero(1, 1);
    p.structure = {1};

    ZhengOptions opt;
    opt.seed = 11;

    auto exact = stability_decision(p, 1.0, 0.05, opt);
    CHECK(exact.decision == StabilityDecision::Certified);
    CHECK(exact.alpha_under == Approx(-0.05).margin(2e-3));
    CHECK(exact.alpha_over == Approx(0.05).margin(2e-3));

    auto over = stability_decision(p, 1.2, 0.05, opt);
    CHECK(over.decision == StabilityDecision::RefutedUnder);
    CHECK(over.alpha_under == Approx(0.14).margin(2e-3));

    auto under = stability_decision(p, 0.5, 0.05, opt);
    CHECK(under.decision == StabilityDecision::RefutedOver);
    CHECK(under.alpha_over == Approx(-0.475).margin(2e-3));

    CHECK_THROWS_AS(stability_decision(p, 0.0, 0.05, opt), std::invalid_argument);
}

TEST_CASE("counter stream is pure and uniform-ish") {
    CounterRng rng{123};
    CHECK(rng.uniform(0) == rng.uniform(0));
    CHECK(rng.uniform(0) != rng.uniform(1));
    double acc = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform(i);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        acc += u;
    }
    CHECK(acc / 10000 == Approx(0.5).margin(0.02));
}
