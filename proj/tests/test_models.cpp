#include "nstr/models.hpp"

#include "nstr/bench.hpp"
#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace nstr;
using nstr::test::central_diff;
using nstr::test::random_vec;
using nstr::test::vec2;
using Catch::Approx;

namespace {

MaxAffine abs_pieces() {  // |x| on R
    MaxAffine m;
    m.c = {0.0, 0.0};
    Vec gp(1), gm(1);
    gp << 1.0;
    gm << -1.0;
    m.g = {gp, gm};
    return m;
}

MaxAffine random_max_affine(std::mt19937_64& rng, int n, int pieces) {
    MaxAffine m;
    for (int i = 0; i < pieces; ++i) {
        m.c.push_back(random_vec(rng, 1)[0]);
        m.g.push_back(random_vec(rng, n, 2.0));
    }
    return m;
}

}  // namespace

TEST_CASE("standard model evaluation") {
    StandardModel abs_model(abs_pieces().oracle());
    Vec zero = Vec::Zero(1);
    for (double y : {-0.7, -0.1, 0.0, 0.4, 2.0})
        CHECK(abs_model.eval(Vec::Constant(1, y), zero) == Approx(std::abs(y)).margin(1e-14));

    // dragon at a branch point: the model is the dominant affine piece
    StandardModel dragon(dragon_pieces().oracle());
    Vec x = vec2(1, 3);
    for (auto [y1, y2] : {std::pair{0.0, 0.0}, {0.5, 2.25}, {-1.0, 3.0}, {0.0, 3.7}})
        CHECK(dragon.eval(vec2(y1, y2), x) == Approx(2 * y1 + 3 * y2).margin(1e-12));
}

TEST_CASE("natural model of a convex composite") {
    SmoothMap F;
    F.n = 1;
    F.p = 1;
    F.value = [](const Vec& x) { return Vec(Vec::Constant(1, x[0] * x[0])); };
    F.jacobian = [](const Vec& x) { return Mat(Mat::Constant(1, 1, 2 * x[0])); };
    NaturalModel model(abs_pieces(), F);

    CHECK(model.eval(Vec::Constant(1, 1.2), Vec::Constant(1, 1.0)) == Approx(1.4).margin(1e-14));
    CHECK(model.f(Vec::Constant(1, -2.0)) == Approx(4.0));
    // value matches at the anchor
    CHECK(model.eval(Vec::Constant(1, 0.7), Vec::Constant(1, 0.7)) == Approx(0.49));
}

TEST_CASE("standard model cutting planes") {
    StandardModel dragon(dragon_pieces().oracle());
    // slope maximizes g'(z - x): both (2,3) and (5,2) are active at the
    // corner (1,3); z = (-1,3) selects (2,3)
    CuttingPlane p = dragon.cut(vec2(1, 3), vec2(-1, 3), 0);
    CHECK(p.a == Approx(11.0));
    CHECK(p.g[0] == Approx(2.0));
    CHECK(p.g[1] == Approx(3.0));

    StandardModel abs_model(abs_pieces().oracle());
    CuttingPlane q = abs_model.cut(Vec::Zero(1), Vec::Constant(1, 1.0), 0);
    CHECK(q.a == Approx(0.0));
    CHECK(q.g[0] == Approx(1.0));

    // every standard-model cut passes through (x, f(x))
    std::mt19937_64 rng(5);
    MaxAffine m = random_max_affine(rng, 3, 5);
    StandardModel sm(m.oracle());
    for (int t = 0; t < 20; ++t) {
        Vec x = random_vec(rng, 3), z = random_vec(rng, 3);
        CuttingPlane c = sm.cut(x, z, t);
        CHECK(c.a == Approx(m.eval(x)).margin(1e-12));
    }
}

TEST_CASE("convex function as its own model") {
    ConvexSelfModel model(abs_pieces().oracle());
    CuttingPlane p = model.cut(Vec::Constant(1, 1.0), Vec::Constant(1, -2.0), 0);
    CHECK(p.a == Approx(-1.0));
    CHECK(p.g[0] == Approx(-1.0));
    CHECK(model.planes_are_global_minorants());

    // planes minorize f itself everywhere
    std::mt19937_64 rng(17);
    MaxAffine m = random_max_affine(rng, 2, 6);
    ConvexSelfModel csm(m.oracle());
    for (int t = 0; t < 20; ++t) {
        Vec x = random_vec(rng, 2), z = random_vec(rng, 2, 3.0);
        CuttingPlane c = csm.cut(x, z, t);
        for (int probe = 0; probe < 50; ++probe) {
            Vec y = random_vec(rng, 2, 4.0);
            CHECK(plane_eval(c, y, x) <= m.eval(y) + 1e-10 * (1.0 + std::abs(m.eval(y))));
        }
    }
}

TEST_CASE("splitting model of smooth plus convex") {
    SmoothFunction g;
    g.n = 2;
    g.value = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
    g.gradient = [](const Vec& x) { return x; };
    MaxAffine h;  // |x1|
    h.c = {0.0, 0.0};
    h.g = {vec2(1, 0), vec2(-1, 0)};
    SplittingModel model(g, h);

    Vec x = vec2(1, 2);
    CHECK(model.f(x) == Approx(0.5 * 5 + 1));
    CHECK(model.eval(x, x) == Approx(model.f(x)).margin(1e-14));
    // model is linearized g plus exact h
    Vec y = vec2(-0.5, 1.0);
    CHECK(model.eval(y, x) == Approx(2.5 + x.dot(y - x) + 0.5).margin(1e-14));

    CuttingPlane p = model.cut(x, y, 0);
    CHECK(plane_eval(p, y, x) == Approx(model.eval(y, x)).margin(1e-12));
}

TEST_CASE("penalty max model") {
    // inner model: linear f(w) = w, its own convex model
    MaxAffine lin;
    lin.c = {0.0};
    lin.g = {Vec::Constant(1, 1.0)};
    auto inner = std::make_shared<ConvexSelfModel>(lin.oracle());

    PenaltyMaxModel pen10(inner, 10.0);
    Vec anchor = vec2(0, 0);
    CHECK(penalty_eval(pen10, vec2(2.0, -0.3), anchor) == Approx(2.0));
    CHECK(penalty_eval(pen10, vec2(2.0, 0.3), anchor) == Approx(5.0));
    CHECK(penalty_eval(pen10, vec2(2.0, 0.0), anchor) == Approx(2.0));

    CHECK_THROWS_AS(PenaltyMaxModel(inner, 0.0), std::invalid_argument);

    SECTION("objective gradient where the inner value is negative") {
        PenaltyMaxModel pen(inner, 7.0);
        auto f = [&](const Vec& y) { return pen.f(y); };
        Vec y0 = vec2(0.4, -0.8);
        CHECK(central_diff(f, y0, 0, 1e-6) == Approx(1.0).margin(1e-8));
        CHECK(central_diff(f, y0, 1, 1e-6) == Approx(0.0).margin(1e-8));
    }

    SECTION("cut at the kink prefers the zero branch") {
        PenaltyMaxModel pen(inner, 7.0);
        CuttingPlane p = pen.cut(vec2(1.0, -0.5), vec2(1.0, 0.0), 0);
        CHECK(p.g[0] == Approx(1.0));
        CHECK(p.g[1] == Approx(0.0));
    }
}

TEST_CASE("model axiom: value matches the objective at the center") {
    std::mt19937_64 rng(23);
    MaxAffine m = random_max_affine(rng, 3, 5);

    StandardModel standard(m.oracle());
    ConvexSelfModel convex(m.oracle());

    SmoothMap F;
    F.n = 3;
    F.p = 2;
    F.value = [](const Vec& x) {
        Vec u(2);
        u << x[0] * x[1], x[2] - x[0] * x[0];
        return u;
    };
    F.jacobian = [](const Vec& x) {
        Mat J(2, 3);
        J << x[1], x[0], 0, -2 * x[0], 0, 1;
        return J;
    };
    MaxAffine h;  // max(u1, u2, -u1 - u2)
    h.c = {0.0, 0.0, 0.0};
    h.g = {vec2(1, 0), vec2(0, 1), vec2(-1, -1)};
    NaturalModel natural(h, F);

    SmoothFunction gs;
    gs.n = 3;
    gs.value = [](const Vec& x) { return 0.5 * x.squaredNorm() + std::sin(x[0]); };
    gs.gradient = [](const Vec& x) { return Vec(x + std::cos(x[0]) * Vec::Unit(3, 0)); };
    SplittingModel splitting(gs, m);

    MaxAffine lin;
    lin.c = {0.2};
    lin.g = {Vec::Constant(2, 1.0)};
    PenaltyMaxModel penalty(std::make_shared<ConvexSelfModel>(lin.oracle()), 5.0);

    for (int t = 0; t < 100; ++t) {
        Vec x = random_vec(rng, 3, 2.0);
        CHECK(standard.eval(x, x) ==
              Approx(standard.f(x)).margin(1e-12 * (1.0 + std::abs(standard.f(x)))));
        CHECK(convex.eval(x, x) ==
              Approx(convex.f(x)).margin(1e-12 * (1.0 + std::abs(convex.f(x)))));
        CHECK(natural.eval(x, x) ==
              Approx(natural.f(x)).margin(1e-12 * (1.0 + std::abs(natural.f(x)))));
        CHECK(splitting.eval(x, x) ==
              Approx(splitting.f(x)).margin(1e-12 * (1.0 + std::abs(splitting.f(x)))));
        CHECK(penalty.eval(x, x) ==
              Approx(penalty.f(x)).margin(1e-12 * (1.0 + std::abs(penalty.f(x)))));
    }
}

TEST_CASE("one-sided expansion bound at shrinking steps") {
    std::mt19937_64 rng(29);
    MaxAffine m = random_max_affine(rng, 3, 5);
    StandardModel standard(m.oracle());

    SmoothMap F;
    F.n = 2;
    F.p = 1;
    F.value = [](const Vec& x) {
        return Vec(Vec::Constant(1, x[0] * x[0] + std::sin(x[1])));
    };
    F.jacobian = [](const Vec& x) {
        Mat J(1, 2);
        J << 2 * x[0], std::cos(x[1]);
        return J;
    };
    NaturalModel natural(abs_pieces(), F);

    auto min_ratio = [](auto&& f, auto&& eval, const Vec& x, const Vec& d) {
        double best = kInf;
        for (double step : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
            Vec y = x + step * d;
            best = std::min(best, (f(y) - eval(y, x)) / step);
        }
        return best;
    };
    for (int t = 0; t < 30; ++t) {
        Vec x3 = random_vec(rng, 3), d3 = random_vec(rng, 3);
        d3.normalize();
        Vec x2 = random_vec(rng, 2), d2 = random_vec(rng, 2);
        d2.normalize();
        CHECK(min_ratio([&](const Vec& y) { return standard.f(y); },
                        [&](const Vec& y, const Vec& x) { return standard.eval(y, x); }, x3,
                        d3) <= 1e-6);
        CHECK(min_ratio([&](const Vec& y) { return natural.f(y); },
                        [&](const Vec& y, const Vec& x) { return natural.eval(y, x); }, x2,
                        d2) <= 1e-6);
    }
}

TEST_CASE("cuts minorize the model") {
    std::mt19937_64 rng(31);
    MaxAffine m = random_max_affine(rng, 2, 5);
    StandardModel sm(m.oracle());
    Vec x = random_vec(rng, 2);
    for (int t = 0; t < 10; ++t) {
        Vec z = x + random_vec(rng, 2);
        CuttingPlane p = sm.cut(x, z, t);
        // the plane touches the model at z
        CHECK(plane_eval(p, z, x) == Approx(sm.eval(z, x)).margin(1e-12));
        for (int probe = 0; probe < 100; ++probe) {
            Vec y = x + random_vec(rng, 2, 2.0);
            double mv = sm.eval(y, x);
            CHECK(plane_eval(p, y, x) <= mv + 1e-10 * (1.0 + std::abs(mv)));
        }
    }
}
