#pragma once

// Trust-region tangent program: minimize the working model over C
// intersected with a norm ball around the anchor. Polyhedral norms (inf, l1)
// go through an epigraph LP; the Euclidean norm is supported in closed form
// for single-plane bundles.

#include "nstr/core.hpp"
#include "nstr/simplex.hpp"

#include <optional>
#include <random>

namespace nstr {

struct TangentSolution {
    Vec y_star;
    double model_value = 0.0;
    Vec multipliers;  // simplex weights over the planes
    Vec g_agg;        // plane aggregate, sum_i lambda_i g_i
    // Aggregate in d(phi_k + i_C)(y*): the plane aggregate plus the
    // feasible-set normal-cone part certified by the duals. The trust-ball
    // normal balances it, so its norm drives the stationarity tests.
    Vec g_agg_constrained;
    std::vector<int> active_planes;
    bool tr_active = false;
    int lp_iterations = 0;
};

class TangentInfeasible : public std::runtime_error {
  public:
    TangentInfeasible() : std::runtime_error("tangent program: C intersect ball infeasible") {}
};

namespace tpdetail {

// Per-coordinate interval for y centered on the trust ball and clipped by a
// box feasible set.
inline void coordinate_bounds(const Vec& x, double R, const FeasibleSet& C, Vec& lo, Vec& hi) {
    const int n = static_cast<int>(x.size());
    lo = x.array() - R;
    hi = x.array() + R;
    if (C.kind == FeasibleSet::Kind::Box) {
        lo = lo.cwiseMax(C.lower);
        hi = hi.cwiseMin(C.upper);
    }
    for (int i = 0; i < n; ++i)
        if (lo[i] > hi[i]) throw TangentInfeasible();
}

// Holding y_j as close to x_j as the active constraints allow (at the optimal
// epigraph level) gives degenerate programs a least-motion solution.
inline void least_motion_polish(const Bundle& b, const FeasibleSet& C, const Vec& x, double t_star,
                                TrustNorm norm, double R, Vec& y) {
    const int n = static_cast<int>(x.size());
    const double slackt = 1e-12 * (1.0 + std::abs(t_star));
    for (int j = 0; j < n; ++j) {
        double lo = -kInf, hi = kInf;
        auto restrict_linear = [&](double coef, double bound_minus_rest) {
            // coef * y_j <= bound_minus_rest
            if (coef > 0)
                hi = std::min(hi, bound_minus_rest / coef);
            else if (coef < 0)
                lo = std::max(lo, bound_minus_rest / coef);
            else if (bound_minus_rest < -slackt)
                lo = hi + 1;  // infeasible direction; give up on this coordinate
        };
        for (const auto& p : b.planes()) {
            double rest = p.a + p.g.dot(y - x) - p.g[j] * (y[j] - x[j]);
            restrict_linear(p.g[j], t_star + slackt - rest + p.g[j] * x[j]);
        }
        if (C.kind == FeasibleSet::Kind::Box) {
            lo = std::max(lo, C.lower[j]);
            hi = std::min(hi, C.upper[j]);
        } else if (C.kind == FeasibleSet::Kind::Polyhedron) {
            for (int r = 0; r < C.rows.rows(); ++r) {
                double rest = C.rows.row(r).dot(y) - C.rows(r, j) * y[j];
                restrict_linear(C.rows(r, j), C.rhs[r] + 1e-12 * (1 + std::abs(C.rhs[r])) - rest);
            }
        }
        if (norm == TrustNorm::Inf) {
            lo = std::max(lo, x[j] - R);
            hi = std::min(hi, x[j] + R);
        } else {  // l1: moving y_j toward x_j only loosens the budget
            double used = 0.0;
            for (int i = 0; i < n; ++i)
                if (i != j) used += std::abs(y[i] - x[i]);
            lo = std::max(lo, x[j] - std::max(0.0, R - used));
            hi = std::min(hi, x[j] + std::max(0.0, R - used));
        }
        if (lo <= hi) y[j] = std::clamp(x[j], lo, hi);
    }
}

}  // namespace tpdetail

// Tangent program over a polyhedral norm ball, solved as an epigraph LP:
//   min t  s.t.  a_i + g_i'(y - x) <= t,  y in C,  ||y - x|| <= R.
inline TangentSolution solve_tangent_lp(const Bundle& b, const FeasibleSet& C, double R,
                                        TrustNorm norm) {
    if (!(R > 0)) throw std::invalid_argument("tangent program needs R > 0");
    if (b.planes().empty()) throw std::logic_error("tangent program: empty bundle");
    if (norm == TrustNorm::L2SinglePlane)
        throw std::invalid_argument("Euclidean tangent program is single-plane only");

    const Vec& x = b.anchor();
    const int n = static_cast<int>(x.size());
    const int k = static_cast<int>(b.planes().size());

    Vec ylo, yhi;
    if (norm == TrustNorm::Inf) {
        tpdetail::coordinate_bounds(x, R, C, ylo, yhi);
    } else {
        tpdetail::coordinate_bounds(x, R, C, ylo, yhi);  // l1 ball implies inf ball
    }

    // epigraph bounds for t with margin
    double tlo = -kInf, thi = -kInf;
    for (const auto& p : b.planes()) {
        double pmin = p.a, pmax = p.a;
        for (int j = 0; j < n; ++j) {
            double glo = p.g[j] * (ylo[j] - x[j]), ghi = p.g[j] * (yhi[j] - x[j]);
            pmin += std::min(glo, ghi);
            pmax += std::max(glo, ghi);
        }
        tlo = std::max(tlo, pmin);  // max-of-planes >= every single plane's min
        thi = std::max(thi, pmax);
    }
    double margin = 1.0 + 0.01 * (std::abs(tlo) + std::abs(thi));
    tlo -= margin;
    thi += margin;

    const bool l1 = norm == TrustNorm::L1;
    const int nv = l1 ? 2 * n + 1 : n + 1;  // (p, q, t) or (y, t)
    const int tcol = nv - 1;

    int extra_rows = (C.kind == FeasibleSet::Kind::Polyhedron) ? static_cast<int>(C.rows.rows()) : 0;
    const int mrows = k + extra_rows + (l1 ? 1 : 0);

    Vec c = Vec::Zero(nv);
    c[tcol] = 1.0;
    Mat A = Mat::Zero(mrows, nv);
    Vec rhs(mrows);
    Vec lo(nv), hi(nv);

    if (!l1) {
        lo.head(n) = ylo;
        hi.head(n) = yhi;
    } else {
        for (int j = 0; j < n; ++j) {
            lo[j] = 0.0;
            hi[j] = std::min(R, yhi[j] - x[j]);  // p_j
            lo[n + j] = 0.0;
            hi[n + j] = std::min(R, x[j] - ylo[j]);  // q_j
            hi[j] = std::max(hi[j], 0.0);
            hi[n + j] = std::max(hi[n + j], 0.0);
        }
    }
    lo[tcol] = tlo;
    hi[tcol] = thi;

    // plane rows: g'(y - x) - t <= -a
    for (int i = 0; i < k; ++i) {
        const auto& p = b.planes()[i];
        if (!l1) {
            A.row(i).head(n) = p.g.transpose();
            rhs[i] = p.g.dot(x) - p.a;
        } else {
            A.row(i).head(n) = p.g.transpose();
            A.row(i).segment(n, n) = -p.g.transpose();
            rhs[i] = -p.a;
        }
        A(i, tcol) = -1.0;
    }
    int row = k;
    if (C.kind == FeasibleSet::Kind::Polyhedron) {
        for (int r = 0; r < extra_rows; ++r, ++row) {
            if (!l1) {
                A.row(row).head(n) = C.rows.row(r);
                rhs[row] = C.rhs[r];
            } else {
                A.row(row).head(n) = C.rows.row(r);
                A.row(row).segment(n, n) = -C.rows.row(r);
                rhs[row] = C.rhs[r] - C.rows.row(r).dot(x);
            }
        }
    }
    if (l1) {
        A.row(row).head(2 * n).setOnes();
        rhs[row] = R;
    }

    LpSolution lp;
    try {
        lp = solve_bounded_lp(c, A, rhs, lo, hi);
    } catch (const LpInfeasible&) {
        throw TangentInfeasible();
    }

    TangentSolution ts;
    ts.lp_iterations = lp.iterations;
    if (!l1) {
        ts.y_star = lp.w.head(n);
    } else {
        // cancel joint positive parts before reconstructing y
        Vec p = lp.w.head(n), q = lp.w.segment(n, n);
        for (int j = 0; j < n; ++j) {
            double both = std::min(p[j], q[j]);
            p[j] -= both;
            q[j] -= both;
        }
        ts.y_star = x + p - q;
    }
    double t_star = lp.w[tcol];
    tpdetail::least_motion_polish(b, C, x, t_star, norm, R, ts.y_star);
    ts.model_value = b.eval(ts.y_star);

    // plane multipliers from the epigraph row duals
    Vec lam = lp.row_duals.head(k);
    double sum = lam.sum();
    if (sum <= 0) {  // degenerate: fall back to the active plane nearest the top
        lam.setZero();
        lam[0] = 1.0;
        sum = 1.0;
    }
    ts.multipliers = lam / sum;
    ts.g_agg = Vec::Zero(n);
    for (int i = 0; i < k; ++i) ts.g_agg += ts.multipliers[i] * b.planes()[i].g;

    // add the feasible-set normal-cone part: polyhedron row duals directly,
    // and box-bound duals implied by stationarity on coordinates where C
    // binds strictly inside the ball
    ts.g_agg_constrained = ts.g_agg;
    if (C.kind == FeasibleSet::Kind::Polyhedron && extra_rows > 0)
        ts.g_agg_constrained += C.rows.transpose() * lp.row_duals.segment(k, extra_rows) / sum;
    if (C.kind == FeasibleSet::Kind::Box) {
        for (int j = 0; j < n; ++j) {
            double btol = 1e-9 * (1.0 + std::abs(ts.y_star[j]));
            bool c_binds = ts.y_star[j] <= C.lower[j] + btol || ts.y_star[j] >= C.upper[j] - btol;
            bool ball_binds = std::abs(ts.y_star[j] - x[j]) >= R * (1.0 - 1e-9);
            if (norm == TrustNorm::L1)
                ball_binds = (ts.y_star - x).lpNorm<1>() >= R * (1.0 - 1e-9);
            if (c_binds && !ball_binds) ts.g_agg_constrained[j] = 0.0;
        }
    }

    double scale = 1.0 + std::abs(ts.model_value);
    for (int i = 0; i < k; ++i)
        if (plane_eval(b.planes()[i], ts.y_star, x) >= ts.model_value - 1e-9 * scale)
            ts.active_planes.push_back(i);

    double dist = (norm == TrustNorm::L1) ? (ts.y_star - x).lpNorm<1>()
                                          : (ts.y_star - x).lpNorm<Eigen::Infinity>();
    ts.tr_active = dist >= R - 1e-9 * (1.0 + R);
    return ts;
}

// Euclidean single-plane solution y = x - R g / |g|; the predicted decrease
// is exactly R |g|.
inline TangentSolution solve_tangent_euclid_single(const Vec& g, const Vec& x, double R,
                                                   double f_anchor) {
    if (!(R > 0)) throw std::invalid_argument("tangent program needs R > 0");
    double gn = g.norm();
    if (gn == 0.0) throw std::invalid_argument("zero slope: anchor already critical");
    TangentSolution ts;
    ts.y_star = x - (R / gn) * g;
    ts.model_value = f_anchor - R * gn;
    ts.multipliers = Vec::Ones(1);
    ts.g_agg = g;
    ts.g_agg_constrained = g;
    ts.active_planes = {0};
    ts.tr_active = true;
    return ts;
}

inline double trust_norm(TrustNorm norm, const Vec& v) {
    switch (norm) {
        case TrustNorm::Inf:
            return v.lpNorm<Eigen::Infinity>();
        case TrustNorm::L1:
            return v.lpNorm<1>();
        case TrustNorm::L2SinglePlane:
            return v.norm();
    }
    return v.norm();
}

// Trial-step condition: z in C, ||z - x|| <= M ||x - y*||, and
// f(x) - phi_k(z, x) >= theta (f(x) - phi_k(y*, x)).
inline bool trial_condition(const Bundle& b, const FeasibleSet& C, const SolverConfig& cfg,
                            const TangentSolution& ts, const Vec& z) {
    const Vec& x = b.anchor();
    if (!C.contains(z)) return false;
    if (trust_norm(cfg.norm, z - x) > cfg.M * trust_norm(cfg.norm, ts.y_star - x) + 1e-14)
        return false;
    double lhs = b.f_anchor() - b.eval(z);
    double rhs = cfg.theta * (b.f_anchor() - ts.model_value);
    return lhs >= rhs - 1e-14 * (1.0 + std::abs(b.f_anchor()));
}

// Deterministic mode returns y*; randomized mode samples a shrinking box
// around y* (clipped into C when it is a box) until the trial condition
// holds, falling back to y* after 20 draws.
inline Vec trial_step(const TangentSolution& ts, const Bundle& b, const FeasibleSet& C,
                      const SolverConfig& cfg, std::mt19937_64& rng) {
    if (cfg.trial_mode == TrialMode::Deterministic) return ts.y_star;
    const Vec& x = b.anchor();
    double base = (ts.y_star - x).norm();
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int attempt = 0; attempt < 20; ++attempt) {
        double radius = 0.25 * base * std::pow(0.5, attempt);
        Vec z = ts.y_star;
        for (int j = 0; j < z.size(); ++j) z[j] += radius * unif(rng);
        if (C.kind == FeasibleSet::Kind::Box)
            z = z.cwiseMax(C.lower).cwiseMin(C.upper);
        if (trial_condition(b, C, cfg, ts, z)) return z;
    }
    return ts.y_star;
}

}  // namespace nstr
