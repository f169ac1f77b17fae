#pragma once

// Shared helpers for the test suites: deterministic random vectors, finite
// difference oracles, and small constructors.

#include "nstr/core.hpp"

#include <functional>
#include <random>

namespace nstr::test {

inline Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

inline Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::uniform_real_distribution<double> unif(-scale, scale);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = unif(rng);
    return v;
}

// Central finite difference of a scalar function along coordinate i.
inline double central_diff(const std::function<double(const Vec&)>& f, const Vec& x, int i,
                           double h) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (f(xp) - f(xm)) / (2.0 * h);
}

// Min-over-h relative error between an analytic gradient and central
// differences with the step sweep h in {1e-4, 1e-5, 1e-6}.
inline double fd_gradient_error(const std::function<double(const Vec&)>& f, const Vec& x,
                                const Vec& grad) {
    double best = kInf;
    for (double h : {1e-4, 1e-5, 1e-6}) {
        Vec fd(x.size());
        for (int i = 0; i < x.size(); ++i) fd[i] = central_diff(f, x, i, h);
        double err = (fd - grad).norm() / std::max(grad.norm(), 1e-8);
        best = std::min(best, err);
    }
    return best;
}

}  // namespace nstr::test
