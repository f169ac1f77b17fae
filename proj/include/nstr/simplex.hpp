#pragma once

// Dense two-phase primal simplex for bounded-variable linear programs
//
//     minimize    c'w
//     subject to  A w <= b,   lo <= w <= hi
//
// Bland's rule throughout (anti-cycling, deterministic). The basis matrix is
// refactored every iteration; problems here are tiny (tens of variables), so
// numerical robustness wins over update tricks. Row duals come back with the
// solution so callers can certify optimality.

#include "nstr/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace nstr {

struct LpSolution {
    Vec w;          // structural variables
    Vec row_duals;  // lambda >= 0, one per row of A w <= b
    double objective = 0.0;
    int iterations = 0;
};

class LpInfeasible : public std::runtime_error {
  public:
    LpInfeasible() : std::runtime_error("linear program infeasible") {}
};

namespace lpdetail {

enum class VarState { Basic, AtLower, AtUpper };

struct Tableau {
    Mat cols;  // m x N
    Vec cost;
    Vec lo, hi;
    std::vector<VarState> state;
    Vec value;  // current value of every variable
    std::vector<int> basis;
    Vec b;
    int iterations = 0;

    int m() const { return static_cast<int>(cols.rows()); }
    int nvars() const { return static_cast<int>(cols.cols()); }

    void compute_basics() {
        Vec rhs = b;
        for (int j = 0; j < nvars(); ++j)
            if (state[j] != VarState::Basic) rhs -= cols.col(j) * value[j];
        Mat B(m(), m());
        for (int i = 0; i < m(); ++i) B.col(i) = cols.col(basis[i]);
        Vec xb = B.partialPivLu().solve(rhs);
        for (int i = 0; i < m(); ++i) value[basis[i]] = xb[i];
    }

    // Runs simplex on the current cost vector. Returns false if unbounded.
    bool optimize(Vec* duals_out, int max_iter) {
        const double dtol = 1e-11;
        while (iterations < max_iter) {
            Mat B(m(), m());
            for (int i = 0; i < m(); ++i) B.col(i) = cols.col(basis[i]);
            Eigen::PartialPivLU<Mat> lu(B);

            Vec cb(m());
            for (int i = 0; i < m(); ++i) cb[i] = cost[basis[i]];
            Vec pi = lu.transpose().solve(cb);

            // Bland: lowest-index eligible entering variable
            int enter = -1;
            double dir = 0.0;
            for (int j = 0; j < nvars(); ++j) {
                if (state[j] == VarState::Basic) continue;
                double d = cost[j] - pi.dot(cols.col(j));
                if (state[j] == VarState::AtLower && d < -dtol && hi[j] > lo[j]) {
                    enter = j;
                    dir = 1.0;
                    break;
                }
                if (state[j] == VarState::AtUpper && d > dtol && hi[j] > lo[j]) {
                    enter = j;
                    dir = -1.0;
                    break;
                }
            }
            if (enter < 0) {
                if (duals_out) *duals_out = pi;
                return true;
            }

            Vec w = lu.solve(cols.col(enter));

            // ratio test: tightest basic-variable limit, Bland tie-break
            int leave_row = -1;
            double row_limit = kInf;
            double leave_target = 0.0;
            for (int i = 0; i < m(); ++i) {
                double wi = dir * w[i];
                int bi = basis[i];
                double limit, target;
                if (wi > 1e-11) {  // basic decreases toward its lower bound
                    limit = (value[bi] - lo[bi]) / wi;
                    target = lo[bi];
                } else if (wi < -1e-11) {  // basic increases toward its upper bound
                    if (hi[bi] == kInf) continue;
                    limit = (hi[bi] - value[bi]) / (-wi);
                    target = hi[bi];
                } else {
                    continue;
                }
                limit = std::max(limit, 0.0);
                bool better = limit < row_limit - 1e-13;
                bool tie = !better && limit <= row_limit + 1e-13 &&
                           (leave_row < 0 || bi < basis[leave_row]);
                if (better || tie) {
                    leave_row = i;
                    row_limit = std::min(row_limit, limit);
                    leave_target = target;
                }
            }

            double flip_limit = hi[enter] - lo[enter];
            if (row_limit == kInf && flip_limit == kInf) return false;  // unbounded
            bool flip = flip_limit < row_limit - 1e-13;
            double step = flip ? flip_limit : row_limit;

            for (int i = 0; i < m(); ++i) value[basis[i]] -= dir * step * w[i];
            value[enter] = (state[enter] == VarState::AtLower) ? lo[enter] + step
                                                               : hi[enter] - step;
            if (flip) {
                state[enter] =
                    (state[enter] == VarState::AtLower) ? VarState::AtUpper : VarState::AtLower;
            } else {
                int out = basis[leave_row];
                value[out] = leave_target;
                state[out] = (leave_target == lo[out]) ? VarState::AtLower : VarState::AtUpper;
                state[enter] = VarState::Basic;
                basis[leave_row] = enter;
            }
            ++iterations;
        }
        throw std::runtime_error("simplex: iteration guard exceeded");
    }
};

}  // namespace lpdetail

// Solves min c'w s.t. A w <= b, lo <= w <= hi (all bounds finite).
// Throws LpInfeasible when the constraints are inconsistent.
inline LpSolution solve_bounded_lp(const Vec& c, const Mat& A, const Vec& b, const Vec& lo,
                                   const Vec& hi) {
    using namespace lpdetail;
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(A.rows());
    if (A.cols() != n || b.size() != m || lo.size() != n || hi.size() != n)
        throw std::invalid_argument("solve_bounded_lp: dimension mismatch");
    for (int j = 0; j < n; ++j)
        if (!(lo[j] <= hi[j]) || !std::isfinite(lo[j]) || !std::isfinite(hi[j]))
            throw std::invalid_argument("solve_bounded_lp: bad variable bounds");

    Tableau t;
    const int N = n + m + m;  // structurals + slacks + artificials
    t.cols = Mat::Zero(m, N);
    t.cols.leftCols(n) = A;
    for (int i = 0; i < m; ++i) t.cols(i, n + i) = 1.0;            // slacks
    for (int i = 0; i < m; ++i) t.cols(i, n + m + i) = -1.0;       // artificials
    t.lo = Vec::Zero(N);
    t.hi = Vec::Constant(N, kInf);
    t.lo.head(n) = lo;
    t.hi.head(n) = hi;
    t.b = b;
    t.value = Vec::Zero(N);
    t.state.assign(N, VarState::AtLower);
    t.basis.resize(m);

    // start structurals at the bound of smaller magnitude
    for (int j = 0; j < n; ++j) {
        t.value[j] = (std::abs(lo[j]) <= std::abs(hi[j])) ? lo[j] : hi[j];
        t.state[j] = (t.value[j] == lo[j]) ? VarState::AtLower : VarState::AtUpper;
    }

    Vec resid = b - t.cols.leftCols(n) * t.value.head(n);
    bool need_phase1 = false;
    for (int i = 0; i < m; ++i) {
        if (resid[i] >= 0) {
            t.basis[i] = n + i;  // slack basic
            t.state[n + i] = VarState::Basic;
            t.value[n + i] = resid[i];
            t.hi[n + m + i] = 0.0;  // artificial unused
        } else {
            t.basis[i] = n + m + i;  // artificial basic
            t.state[n + m + i] = VarState::Basic;
            t.value[n + m + i] = -resid[i];
            need_phase1 = true;
        }
    }

    const int max_iter = 200 * (N + m) + 2000;

    if (need_phase1) {
        t.cost = Vec::Zero(N);
        for (int i = 0; i < m; ++i) t.cost[n + m + i] = 1.0;
        if (!t.optimize(nullptr, max_iter))
            throw std::runtime_error("simplex: phase 1 unbounded");
        double infeas = 0.0;
        for (int i = 0; i < m; ++i)
            if (t.state[n + m + i] == VarState::Basic) infeas += std::abs(t.value[n + m + i]);
        double scale = 1.0 + b.cwiseAbs().maxCoeff();
        if (infeas > 1e-9 * scale) throw LpInfeasible();
        for (int i = 0; i < m; ++i) t.hi[n + m + i] = 0.0;  // pin artificials
    }

    t.cost = Vec::Zero(N);
    t.cost.head(n) = c;
    Vec pi;
    if (!t.optimize(&pi, max_iter))
        throw std::runtime_error("simplex: objective unbounded");
    t.compute_basics();

    LpSolution out;
    out.w = t.value.head(n);
    out.row_duals = (-pi).cwiseMax(0.0);
    out.objective = c.dot(out.w);
    out.iterations = t.iterations;
    return out;
}

// Residual of the optimality system: primal feasibility, dual sign,
// complementary slackness, and the stationarity defect on the structurals.
inline double lp_certificate_residual(const Vec& c, const Mat& A, const Vec& b, const Vec& lo,
                                      const Vec& hi, const LpSolution& s) {
    double res = 0.0;
    Vec slack = b - A * s.w;
    res = std::max(res, -slack.minCoeff());
    for (int j = 0; j < s.w.size(); ++j)
        res = std::max({res, lo[j] - s.w[j], s.w[j] - hi[j]});
    // reduced cost on structurals: d = c + A' lambda must point away from the
    // active bound
    Vec d = c + A.transpose() * s.row_duals;
    for (int j = 0; j < s.w.size(); ++j) {
        double to_lo = s.w[j] - lo[j], to_hi = hi[j] - s.w[j];
        if (to_lo > 1e-9 && to_hi > 1e-9)
            res = std::max(res, std::abs(d[j]));  // interior: stationary
        else if (to_lo <= 1e-9)
            res = std::max(res, -d[j]);  // at lower: d >= 0
        else
            res = std::max(res, d[j]);  // at upper: d <= 0
    }
    for (int i = 0; i < slack.size(); ++i)
        res = std::max(res, std::abs(s.row_duals[i] * slack[i]) /
                                (1.0 + std::abs(b[i])));
    return res;
}

}  // namespace nstr
