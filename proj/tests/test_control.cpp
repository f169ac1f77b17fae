#include "nstr/control.hpp"

#include "nstr/bench.hpp"
#include "nstr/certify.hpp"
#include "nstr/driver.hpp"
#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace nstr;
using nstr::test::fd_gradient_error;
using nstr::test::random_vec;
using nstr::test::vec2;
using Catch::Approx;

namespace {

LftPlant scalar_plant(double a, double bp = 1.0, double cq = 1.0, double dqp = 0.0) {
    LftPlant p;
    p.A = Mat::Constant(1, 1, a);
    p.Bp = Mat::Constant(1, 1, bp);
    p.Cq = Mat::Constant(1, 1, cq);
    p.Dqp = Mat::Constant(1, 1, dqp);
    p.Bw = Mat::Constant(1, 1, 1.0);
    p.Dqw = Mat::Zero(1, 1);
    p.Cz = Mat::Constant(1, 1, 1.0);
    p.Dzp = Mat::Zero(1, 1);
    p.Dzw = Mat::Zero(1, 1);
    p.structure = {1};
    p.validate();
    return p;
}

Vec vec1(double x) { return Vec::Constant(1, x); }

}  // namespace

TEST_CASE("block-diagonal uncertainty matrix") {
    Vec d = vec2(0.5, -1.0);
    Mat D = build_delta_matrix(d, {2, 1});
    REQUIRE(D.rows() == 3);
    CHECK(D(0, 0) == 0.5);
    CHECK(D(1, 1) == 0.5);
    CHECK(D(2, 2) == -1.0);
    CHECK(D.cwiseAbs().sum() == Approx(2.0));

    CHECK(build_delta_matrix(Vec::Zero(2), {2, 1}).norm() == 0.0);
    CHECK(build_delta_matrix(vec1(0.3), {1})(0, 0) == Approx(0.3));
    CHECK_THROWS_AS(build_delta_matrix(vec1(0.3), {1, 1}), std::invalid_argument);
}

TEST_CASE("closed-loop matrix") {
    SECTION("affine when the feedthrough vanishes") {
        std::mt19937_64 rng(3);
        LftPlant p = random_lft_instance(2, 4, 99, true);
        Vec d = random_vec(rng, 2);
        Mat expect = p.A + p.Bp * build_delta_matrix(d, p.structure) * p.Cq;
        CHECK((closed_loop_A(p, d) - expect).norm() < 1e-12);
    }

    SECTION("scalar loop with feedthrough") {
        LftPlant p = scalar_plant(-1.0, 1.0, 1.0, 0.5);
        CHECK(closed_loop_A(p, vec1(1.0))(0, 0) == Approx(1.0));  // -1 + 1/(1-0.5)
        CHECK(closed_loop_A(p, vec1(0.0))(0, 0) == Approx(-1.0));
    }

    SECTION("nominal delta returns A exactly") {
        LftPlant p = random_lft_instance(3, 5, 17, false);
        CHECK((closed_loop_A(p, Vec::Zero(3)) - p.A).norm() == 0.0);
    }

    SECTION("ill-posed loop is reported") {
        LftPlant p = scalar_plant(-1.0, 1.0, 1.0, 1.0);
        CHECK_THROWS_AS(closed_loop_A(p, vec1(1.0)), IllPosedLft);
    }
}

TEST_CASE("closed-loop derivative matches finite differences") {
    SECTION("constant for affine plants") {
        LftPlant p = random_lft_instance(2, 4, 5, true);
        Vec d = vec2(0.3, -0.4);
        auto [at, len] = std::pair<int, int>{0, 1};
        (void)at;
        (void)len;
        Mat d0 = closed_loop_A_derivative(p, Vec::Zero(2), 0);
        Mat d1 = closed_loop_A_derivative(p, d, 0);
        CHECK((d0 - d1).norm() < 1e-12);
    }

    SECTION("scalar values from the sandwich rule") {
        LftPlant p = scalar_plant(-1.0, 1.0, 1.0, 0.5);
        CHECK(closed_loop_A_derivative(p, vec1(0.0), 0)(0, 0) == Approx(1.0));
        CHECK(closed_loop_A_derivative(p, vec1(1.0), 0)(0, 0) == Approx(4.0));
        double h = 1e-6;
        double fd = (closed_loop_A(p, vec1(1.0 + h))(0, 0) - closed_loop_A(p, vec1(1.0 - h))(0, 0)) /
                    (2 * h);
        CHECK(fd == Approx(4.0).margin(1e-5));
    }

    SECTION("entrywise central differences at random well-posed points") {
        std::mt19937_64 rng(11);
        int checked = 0;
        for (std::uint64_t seed = 200; checked < 50; ++seed) {
            LftPlant p = random_lft_instance(2 + seed % 2, 4, seed, seed % 2 == 0);
            int m = p.m();
            Vec d = random_vec(rng, m, 0.8);
            int i = static_cast<int>(seed % m);
            Mat analytic;
            try {
                analytic = closed_loop_A_derivative(p, d, i);
            } catch (const IllPosedLft&) {
                continue;
            }
            double best = kInf;
            for (double h : {1e-4, 1e-5, 1e-6}) {
                Vec dp = d, dm = d;
                dp[i] += h;
                dm[i] -= h;
                Mat fd = (closed_loop_A(p, dp) - closed_loop_A(p, dm)) / (2 * h);
                best = std::min(best, (fd - analytic).norm() / std::max(analytic.norm(), 1e-8));
            }
            CHECK(best <= 1e-5);
            ++checked;
        }
    }
}

TEST_CASE("spectral abscissa gradient") {
    SECTION("scalar affine loop has unit slope") {
        LftPlant p = scalar_plant(-1.0);
        auto g = alpha_gradient(p, vec1(0.2));
        CHECK(g.alpha == Approx(-0.8));
        CHECK(g.gradient[0] == Approx(1.0).margin(1e-10));
        CHECK_FALSE(g.degenerate);
    }

    SECTION("matches finite differences of the abscissa") {
        std::mt19937_64 rng(19);
        int checked = 0;
        for (std::uint64_t seed = 400; checked < 25; ++seed) {
            LftPlant p = random_lft_instance(2, 5, seed, seed % 2 == 0);
            Vec d = random_vec(rng, 2, 0.7);
            AlphaGradient g;
            try {
                g = alpha_gradient(p, d);
            } catch (const IllPosedLft&) {
                continue;
            }
            if (g.degenerate) continue;
            auto alpha_of = [&](const Vec& dd) {
                return spectral_abscissa_value(closed_loop_A(p, dd));
            };
            CHECK(fd_gradient_error(alpha_of, d, g.gradient) <= 1e-5);
            ++checked;
        }
    }

    SECTION("symmetric closed loop reduces to the Rayleigh form") {
        // A(delta) = A0 + delta * B with A0, B symmetric: gradient of the top
        // eigenvalue is v' B v for the unit eigenvector v
        Mat A0(2, 2), B(2, 2);
        A0 << -2, 0.3, 0.3, -1;
        B << 0.5, 0.2, 0.2, -0.1;
        LftPlant p;
        p.A = A0;
        // Bp * Delta * Cq = delta * B via Bp = B, Cq = I (rank-structure 2 with
        // a single repeated parameter)
        p.Bp = B;
        p.Cq = Mat::Identity(2, 2);
        p.Dqp = Mat::Zero(2, 2);
        p.Bw = Mat::Ones(2, 1);
        p.Dqw = Mat::Zero(2, 1);
        p.Cz = Mat::Ones(1, 2);
        p.Dzp = Mat::Zero(1, 2);
        p.Dzw = Mat::Zero(1, 1);
        p.structure = {2};
        p.validate();

        Vec d = vec1(0.4);
        auto g = alpha_gradient(p, d);
        Mat Ad = closed_loop_A(p, d);
        Eigen::SelfAdjointEigenSolver<Mat> es(Ad);
        Vec v = es.eigenvectors().col(1);  // top eigenvalue of the symmetric loop
        CHECK(g.gradient[0] == Approx(v.dot(B * v)).margin(1e-8));
    }
}

TEST_CASE("H-infinity norm evaluator") {
    SECTION("first-order lag peaks at zero frequency") {
        Mat A = Mat::Constant(1, 1, -2.0), B = Mat::Constant(1, 1, 1.0);
        Mat C = Mat::Constant(1, 1, 1.0), D = Mat::Zero(1, 1);
        auto h = hinf_norm(A, B, C, D, 1e-12);
        CHECK(std::abs(h.value - 0.5) <= 1e-10);
        CHECK(h.omega_peak == Approx(0.0).margin(1e-6));
    }

    SECTION("second-order resonance peak") {
        double zeta = 0.1, wn = 1.0;
        Mat A(2, 2);
        A << 0, 1, -wn * wn, -2 * zeta * wn;
        Mat B(2, 1);
        B << 0, 1;
        Mat C(1, 2);
        C << wn * wn, 0;
        Mat D = Mat::Zero(1, 1);
        double expect = 1.0 / (2 * zeta * std::sqrt(1 - zeta * zeta));
        auto h = hinf_norm(A, B, C, D, 1e-10);
        CHECK(h.value == Approx(expect).epsilon(1e-7));
        CHECK(h.omega_peak == Approx(wn * std::sqrt(1 - 2 * zeta * zeta)).margin(1e-4));
    }

    SECTION("zero output map gives zero norm") {
        Mat A = Mat::Constant(1, 1, -1.0), B = Mat::Constant(1, 1, 1.0);
        CHECK(hinf_norm(A, B, Mat::Zero(1, 1), Mat::Zero(1, 1)).value == 0.0);
    }

    SECTION("unstable systems are rejected") {
        Mat A = Mat::Constant(1, 1, 0.5);
        Mat I1 = Mat::Identity(1, 1);
        CHECK_THROWS_AS(hinf_norm(A, I1, I1, Mat::Zero(1, 1)), UnstableSystem);
    }

    SECTION("certified bracket around the returned value") {
        double zeta = 0.15, wn = 2.0;
        Mat A(2, 2);
        A << 0, 1, -wn * wn, -2 * zeta * wn;
        Mat B(2, 1);
        B << 0, 1;
        Mat C(1, 2);
        C << wn * wn, 0;
        Mat D = Mat::Zero(1, 1);
        double tol = 1e-9;
        auto h = hinf_norm(A, B, C, D, tol);
        CHECK_FALSE(ctrldetail::hamiltonian_crossings(A, B, C, D, h.value * (1 + 10 * tol), nullptr));
        CHECK(ctrldetail::hamiltonian_crossings(A, B, C, D, h.value * (1 - 10 * tol), nullptr));
    }
}

TEST_CASE("frequency-domain transfer evaluation") {
    SECTION("nominal delta yields the open-loop channel") {
        LftPlant p = random_lft_instance(2, 4, 31, false);
        double w = 0.7;
        CMat T = transfer_eval(p, Vec::Zero(2), w);
        // direct state-space evaluation of Cz (jwI - A)^{-1} Bw + Dzw
        CMat M = CMat::Identity(4, 4) * Complex(0, w) - p.A.cast<Complex>();
        CMat expect = p.Cz.cast<Complex>() * solve_complex(M, CMat(p.Bw.cast<Complex>())) +
                      p.Dzw.cast<Complex>();
        CHECK((T - expect).norm() < 1e-10);
    }

    SECTION("affine channel when P11 vanishes") {
        // Dqp = 0 and Cq (sI-A)^{-1} Bp = 0 by structure: pick Bp hitting only
        // states that Cq ignores is hard in general; use a static plant
        // instead (A fast, w -> z direct) and check the affine formula at a
        // fixed frequency via the P-blocks
        LftPlant p = scalar_plant(-1.0, 1.0, 0.0, 0.0);  // Cq = 0 so P11 = 0
        p.Dzp = Mat::Constant(1, 1, 2.0);
        p.Dqw = Mat::Constant(1, 1, 1.5);
        double w = 0.3;
        Vec d = vec1(0.6);
        CMat T0 = transfer_eval(p, Vec::Zero(1), w);
        CMat T = transfer_eval(p, d, w);
        // P21 = Dzp + Cz (jwI - A)^{-1} Bp and P12 = Dqw; channel is affine
        Complex p21 = 2.0 + 1.0 / (Complex(0, w) + 1.0);
        CMat expect = T0;
        expect(0, 0) += 0.6 * p21 * 1.5;
        CHECK((T - expect).norm() < 1e-12);
    }

    SECTION("gradient matches finite differences of the norm") {
        std::mt19937_64 rng(23);
        int checked = 0;
        for (std::uint64_t seed = 600; checked < 10; ++seed) {
            LftPlant p = random_lft_instance(2, 4, seed, seed % 2 == 0);
            Vec d = random_vec(rng, 2, 0.6);
            HinfGradient g;
            try {
                g = hinf_gradient(p, d);
            } catch (const std::exception&) {
                continue;
            }
            auto norm_of = [&](const Vec& dd) {
                StateSpace ss = close_loop(p, dd);
                return hinf_norm(ss.A, ss.B, ss.C, ss.D, 1e-11).value;
            };
            CHECK(fd_gradient_error(norm_of, d, g.gradient) <= 1e-4);
            ++checked;
        }
    }
}

TEST_CASE("worst-case spectral abscissa problems") {
    SECTION("monotone scalar loop maximizes at the box corner") {
        LftPlant p = scalar_plant(-1.0);
        SolverConfig cfg;
        WorstCaseRun run = worst_case_alpha_run(p, cfg);
        CHECK(run.value == Approx(0.0).margin(1e-9));
        CHECK(run.delta_star[0] == Approx(1.0).margin(1e-9));
    }

    SECTION("constant objective stalls critically at the start") {
        LftPlant p = scalar_plant(-1.0, 0.0, 0.0, 0.0);  // Bp = 0: alpha constant
        SolverConfig cfg;
        SolveResult res = outer_solve(worst_case_alpha_problem(p), cfg);
        CHECK(res.serious_steps == 0);
        CHECK(res.status == SolveStatus::Critical);
    }

    SECTION("solver value agrees with a dense grid") {
        for (std::uint64_t seed : {801, 802, 803}) {
            LftPlant p = random_lft_instance(2, 4, seed, true);
            SolverConfig cfg;
            WorstCaseRun run = worst_case_alpha_run(p, cfg);
            auto alpha_of = [&](const Vec& d) {
                return spectral_abscissa_value(closed_loop_A(p, d));
            };
            BoxDomain box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)};
            GridResult grid = grid_certify(alpha_of, box, 0.01);
            CHECK(std::abs(run.value - grid.max_value) <= 1e-3);
        }
    }
}

TEST_CASE("worst-case gain problem") {
    // scale the uncertainty so the loop stays stable across the box
    LftPlant p = scalar_plant(-2.0, 0.5);
    SolverConfig cfg;
    WorstCaseRun run = worst_case_hinf_run(p, cfg);
    CHECK(run.value == Approx(1.0 / 1.5).margin(1e-6));  // 1/(2 - 0.5) at delta = 1
    CHECK(run.delta_star[0] == Approx(1.0).margin(1e-6));

    auto gain_of = [&](const Vec& d) {
        StateSpace ss = close_loop(p, d);
        return hinf_norm(ss.A, ss.B, ss.C, ss.D).value;
    };
    BoxDomain box{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
    GridResult grid = grid_certify(gain_of, box, 0.01);
    CHECK(std::abs(run.value - grid.max_value) <= 1e-3);

    // tie exposure: at least the dominant peak comes back
    auto grads = worst_case_hinf_problem(p).model.get();
    (void)grads;
    std::vector<double> peaks = hinf_peak_frequencies(close_loop(p, Vec::Zero(1)));
    CHECK(!peaks.empty());
    CHECK(peaks.front() == Approx(0.0).margin(1e-4));  // lag peaks at DC
}

TEST_CASE("distance to instability") {
    SECTION("scalar loop crosses at one") {
        LftPlant p = scalar_plant(-1.0);
        SolverConfig cfg;
        DistanceRun run = solve_distance(p, cfg);
        CHECK(run.d_star == Approx(1.0).margin(1e-4));
        CHECK_FALSE(run.robustly_stable_on_delta);
    }

    SECTION("loop stable on the normalized box is flagged") {
        LftPlant p = scalar_plant(-2.0);  // alpha = -2 + delta: distance 2
        SolverConfig cfg;
        DistanceRun run = solve_distance(p, cfg);
        CHECK(run.d_star == Approx(2.0).margin(1e-3));
        CHECK(run.robustly_stable_on_delta);
    }

    SECTION("two parameters against a bisection-grid oracle") {
        LftPlant p = random_lft_instance(2, 4, 900, true);
        SolverConfig cfg;
        DistanceRun run = solve_distance(p, cfg);

        auto stable_at = [&](double d) {
            BoxDomain box{Vec::Constant(2, -d), Vec::Constant(2, d)};
            auto alpha_of = [&](const Vec& dd) {
                return spectral_abscissa_value(closed_loop_A(p, dd));
            };
            return grid_certify(alpha_of, box, d / 50.0).max_value < 0.0;
        };
        double lo = 0.0, hi = 1.0;
        while (stable_at(hi)) hi *= 2.0;
        lo = hi / 2.0;
        for (int it = 0; it < 40; ++it) {
            double mid = 0.5 * (lo + hi);
            (stable_at(mid) ? lo : hi) = mid;
        }
        CHECK(run.d_star == Approx(0.5 * (lo + hi)).margin(2e-3));
    }

    SECTION("nominally unstable plants are rejected") {
        LftPlant p = scalar_plant(0.5);
        CHECK_THROWS_AS(distance_to_instability_problem(p, 100.0), UnstableSystem);
    }
}

TEST_CASE("abscissa stays continuous across ordering swaps") {
    std::mt19937_64 rng(47);
    LftPlant p = random_lft_instance(2, 5, 1000, true);
    for (int seg = 0; seg < 5; ++seg) {
        Vec a = random_vec(rng, 2, 0.9), b = random_vec(rng, 2, 0.9);
        double prev = spectral_abscissa_value(closed_loop_A(p, a));
        int steps = 200;
        for (int s = 1; s <= steps; ++s) {
            Vec d = a + (b - a) * (double(s) / steps);
            double cur = spectral_abscissa_value(closed_loop_A(p, d));
            CHECK(std::abs(cur - prev) < 0.2);  // Lipschitz-scale bound on small steps
            prev = cur;
        }
    }
}

TEST_CASE("plant validation") {
    LftPlant p = scalar_plant(-1.0);
    CHECK_NOTHROW(p.validate());
    LftPlant bad = p;
    bad.structure = {2};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.Bp = Mat::Zero(2, 1);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
