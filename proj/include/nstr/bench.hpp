#pragma once

// Built-in problems: the piecewise-affine "dragon" counterexample with its
// closed-form step quantities, convex polyhedral test functions, and random
// LFT instance generators for oracle-vs-solver runs.

#include "nstr/control.hpp"
#include "nstr/core.hpp"
#include "nstr/models.hpp"

#include <random>

namespace nstr {

// ---------------------------------------------------------------------------
// Dragon function f(x) = max{-100, +-2 x1 + 3 x2, +-5 x1 + 2 x2}. Convex
// piecewise affine with global minimum -100; the level polygon [f = a] in the
// upper half-plane connects (-a/5, 0), (-a/11, 3a/11), (0, a/3), (a/11,
// 3a/11), (a/5, 0).
// ---------------------------------------------------------------------------

inline MaxAffine dragon_pieces() {
    MaxAffine m;
    auto add = [&](double c, double g1, double g2) {
        m.c.push_back(c);
        Vec g(2);
        g << g1, g2;
        m.g.push_back(g);
    };
    add(-100.0, 0.0, 0.0);
    add(0.0, 2.0, 3.0);
    add(0.0, -2.0, 3.0);
    add(0.0, 5.0, 2.0);
    add(0.0, -5.0, 2.0);
    return m;
}

inline double dragon_f(const Vec& x) { return dragon_pieces().eval(x); }

// Start point on the upper-right branch of the level-a polygon.
inline Vec dragon_start(double a, double x1) {
    Vec x(2);
    x << x1, -2.0 / 3.0 * x1 + a / 3.0;
    return x;
}

// Closed-form quantities for steepest-descent trials y = x + r(-2, -3) from
// the upper-right branch: the axis crossing r_A, the boundary crossing r_B,
// the largest accepted r for ratio threshold gamma, and the objective values
// at those two points.
struct DragonQuantities {
    double r_A = 0.0;
    double r_B = 0.0;
    double r_gamma = 0.0;
    double f_A = 0.0;
    double f_B = 0.0;
};

inline DragonQuantities dragon_quantities(double a, double x1, double gamma) {
    if (!(x1 > 0 && x1 <= a / 11.0))
        throw std::invalid_argument("dragon: x1 must lie in (0, a/11]");
    if (!(gamma > 5.0 / 13.0 && gamma < 1.0))
        throw std::invalid_argument("dragon: gamma must lie in (5/13, 1)");
    DragonQuantities q;
    q.r_A = 0.5 * x1;
    q.r_B = 7.0 / 27.0 * x1 + a / 27.0;
    q.r_gamma = 4.0 * x1 / (13.0 * gamma - 5.0);
    q.f_A = a - 13.0 / 2.0 * x1;
    q.f_B = -143.0 / 27.0 * x1 + 22.0 / 27.0 * a;
    return q;
}

// Acceptance ratio along the steepest-descent ray as a function of r:
// 1 on (0, r_A], (4 x1 + 5r)/(13 r) on [r_A, r_B], (a - 12r + 19 x1)/(39 r)
// beyond; continuous at both breakpoints.
inline double dragon_rho(double a, double x1, double r) {
    if (!(r > 0)) throw std::invalid_argument("dragon_rho: r must be positive");
    double r_A = 0.5 * x1;
    double r_B = 7.0 / 27.0 * x1 + a / 27.0;
    if (r <= r_A) return 1.0;
    if (r <= r_B) return (4.0 * x1 + 5.0 * r) / (13.0 * r);
    return (a - 12.0 * r + 19.0 * x1) / (39.0 * r);
}

// Dragon as a solvable problem. Classical runs use the standard model (one
// exactness plane, Euclidean steps); bundle runs treat the convex f as its
// own model so cutting planes are global tangents.
inline ProblemInstance dragon_problem(double a, double x1, bool convex_model) {
    ProblemInstance p;
    MaxAffine pieces = dragon_pieces();
    if (convex_model)
        p.model = std::make_shared<ConvexSelfModel>(pieces.oracle());
    else
        p.model = std::make_shared<StandardModel>(pieces.oracle());
    p.feasible = FeasibleSet::all_space();
    p.x0 = dragon_start(a, x1);
    p.name = "dragon";
    return p;
}

inline std::vector<Vec> dragon_polygon(double a) {
    auto pt = [](double x1, double x2) {
        Vec v(2);
        v << x1, x2;
        return v;
    };
    return {pt(-a / 5, 0), pt(-a / 11, 3 * a / 11), pt(0, a / 3), pt(a / 11, 3 * a / 11),
            pt(a / 5, 0)};
}

// ---------------------------------------------------------------------------
// Convex polyhedral test problems.
// ---------------------------------------------------------------------------

// f(x) = |x1| + 2 |x2| over [-2, 2]^2 from (1.5, 1); unique minimizer at the
// origin with value 0.
inline ProblemInstance l1box_problem() {
    MaxAffine m;
    auto add = [&](double g1, double g2) {
        m.c.push_back(0.0);
        Vec g(2);
        g << g1, g2;
        m.g.push_back(g);
    };
    add(1, 2);
    add(1, -2);
    add(-1, 2);
    add(-1, -2);
    ProblemInstance p;
    p.model = std::make_shared<ConvexSelfModel>(m.oracle());
    p.feasible = FeasibleSet::box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
    Vec x0(2);
    x0 << 1.5, 1.0;
    p.x0 = x0;
    p.name = "l1box";
    return p;
}

// Random bounded max-affine instance over a box; convex by construction.
inline ProblemInstance random_polyhedral_problem(std::uint64_t seed, int n = 0, int pieces = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_int_distribution<int> dim_d(2, 6), piece_d(3, 8);
    if (n <= 0) n = dim_d(rng);
    if (pieces <= 0) pieces = piece_d(rng);

    MaxAffine m;
    for (int i = 0; i < pieces; ++i) {
        m.c.push_back(unif(rng));
        Vec g(n);
        for (int j = 0; j < n; ++j) g[j] = 2.0 * unif(rng);
        m.g.push_back(g);
    }
    ProblemInstance p;
    p.model = std::make_shared<ConvexSelfModel>(m.oracle());
    p.feasible = FeasibleSet::box(Vec::Constant(n, -3.0), Vec::Constant(n, 3.0));
    Vec x0(n);
    for (int j = 0; j < n; ++j) x0[j] = 2.0 * unif(rng);
    p.x0 = x0;
    p.name = "poly-" + std::to_string(seed);
    return p;
}

// ---------------------------------------------------------------------------
// Random LFT instances, nominally stable by construction.
// ---------------------------------------------------------------------------

inline LftPlant random_lft_instance(int m, int n, std::uint64_t seed, bool affine) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto rand_mat = [&](int r, int c, double scale) {
        Mat M(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) M(i, j) = scale * unif(rng);
        return M;
    };

    LftPlant plant;
    plant.structure.assign(m, 1);
    plant.A = rand_mat(n, n, 1.0);
    // shift so the nominal spectral abscissa sits at or below -0.5
    double a0 = spectral_abscissa_value(plant.A);
    plant.A -= (a0 + 0.5) * Mat::Identity(n, n);
    plant.Bp = rand_mat(n, m, 1.0);
    plant.Cq = rand_mat(m, n, 1.0);
    plant.Dqp = affine ? Mat::Zero(m, m) : rand_mat(m, m, 0.2 / m);
    plant.Bw = rand_mat(n, 1, 1.0);
    plant.Dqw = Mat::Zero(m, 1);
    plant.Cz = rand_mat(1, n, 1.0);
    plant.Dzp = Mat::Zero(1, m);
    plant.Dzw = Mat::Zero(1, 1);
    plant.validate();
    return plant;
}

}  // namespace nstr
