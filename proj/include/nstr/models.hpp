#pragma once

// First-order models phi(., x) of a nonsmooth objective and their cutting
// plane generators: standard (directional-derivative based), natural
// (convex-composite), convex-self, splitting, and exact-penalty max models.

#include "nstr/core.hpp"

#include <functional>
#include <memory>
#include <utility>

namespace nstr {

// ---------------------------------------------------------------------------
// Objective oracle. active_gradients returns gradients of the pieces active
// at x (max-type functions); dir_deriv is the Clarke directional derivative.
// Both have sensible defaults built from subgrad.
// ---------------------------------------------------------------------------

struct Oracle {
    int n = 0;
    std::function<double(const Vec&)> f;
    std::function<Vec(const Vec&)> subgrad;
    std::function<std::vector<Vec>(const Vec&)> active_gradients;  // optional
    std::function<double(const Vec&, const Vec&)> dir_deriv;       // optional

    std::vector<Vec> actives(const Vec& x) const {
        if (active_gradients) return active_gradients(x);
        return {subgrad(x)};
    }

    double dderiv(const Vec& x, const Vec& d) const {
        if (dir_deriv) return dir_deriv(x, d);
        double best = -kInf;
        for (const auto& g : actives(x)) best = std::max(best, g.dot(d));
        return best;
    }
};

// f(x) = max_i (c_i + g_i'x). Piece i is active when its value is within
// 1e-10 * (1 + |f(x)|) of the max; the absolute-relative mix guards scaling.
struct MaxAffine {
    std::vector<double> c;
    std::vector<Vec> g;

    int dim() const { return g.empty() ? 0 : static_cast<int>(g.front().size()); }
    std::size_t pieces() const { return c.size(); }

    double eval(const Vec& x) const {
        double best = -kInf;
        for (std::size_t i = 0; i < c.size(); ++i) best = std::max(best, c[i] + g[i].dot(x));
        return best;
    }

    std::vector<int> active(const Vec& x) const {
        double fx = eval(x);
        double tol = 1e-10 * (1.0 + std::abs(fx));
        std::vector<int> idx;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i] + g[i].dot(x) >= fx - tol) idx.push_back(static_cast<int>(i));
        return idx;
    }

    Oracle oracle() const {
        Oracle o;
        o.n = dim();
        auto self = *this;
        o.f = [self](const Vec& x) { return self.eval(x); };
        o.subgrad = [self](const Vec& x) { return self.g[self.active(x).front()]; };
        o.active_gradients = [self](const Vec& x) {
            std::vector<Vec> grads;
            for (int i : self.active(x)) grads.push_back(self.g[i]);
            return grads;
        };
        return o;
    }
};

// ---------------------------------------------------------------------------
// Model interface: a convex local approximation phi(., x) of f that can
// evaluate itself and emit cutting planes at trial points.
// ---------------------------------------------------------------------------

class FirstOrderModel {
  public:
    virtual ~FirstOrderModel() = default;

    virtual int dim() const = 0;
    virtual double f(const Vec& x) const = 0;

    // phi(y, x); satisfies phi(x, x) = f(x).
    virtual double eval(const Vec& y, const Vec& x) const = 0;

    // Cutting plane at trial point z for anchor x: (a, g) with
    // g in d1 phi(z, x) and a = phi(z,x) + g'(x - z). z = x yields an
    // exactness plane a = f(x).
    virtual CuttingPlane cut(const Vec& x, const Vec& z, std::int64_t birth) const = 0;

    // Planes drawn at z = x with each active slope (used to seed full
    // working models). Default: the single canonical exactness plane.
    virtual std::vector<CuttingPlane> exactness_planes(const Vec& x, std::int64_t birth) const {
        return {cut(x, x, birth)};
    }

    // True when every cutting plane is a global minorant of f itself, which
    // makes plane recycling across serious steps sound.
    virtual bool planes_are_global_minorants() const { return false; }
};

inline double model_eval(const FirstOrderModel& m, const Vec& y, const Vec& x) {
    return m.eval(y, x);
}
inline CuttingPlane model_cut(const FirstOrderModel& m, const Vec& x, const Vec& z,
                              std::int64_t birth = 0) {
    return m.cut(x, z, birth);
}

namespace detail {
inline CuttingPlane make_plane(double a, Vec g, const Vec& x, const Vec& z, std::int64_t birth) {
    CuttingPlane p;
    p.a = a;
    p.g = std::move(g);
    p.birth = birth;
    if ((z - x).norm() > 0) {
        p.origin = CuttingPlane::Origin::NullStep;
        p.z = z;
    }
    return p;
}
}  // namespace detail

// phi(y, x) = f(x) + f°(x, y - x). Every cutting plane is an exactness plane
// whose slope maximizes g'(z - x) over the active gradients at x (ties broken
// by lowest piece index so runs are deterministic).
class StandardModel final : public FirstOrderModel {
  public:
    explicit StandardModel(Oracle o) : oracle_(std::move(o)) {}

    int dim() const override { return oracle_.n; }
    double f(const Vec& x) const override { return oracle_.f(x); }

    double eval(const Vec& y, const Vec& x) const override {
        return oracle_.f(x) + oracle_.dderiv(x, y - x);
    }

    CuttingPlane cut(const Vec& x, const Vec& z, std::int64_t birth) const override {
        const auto grads = oracle_.actives(x);
        Vec d = z - x;
        int best = 0;
        double best_val = grads[0].dot(d);
        for (std::size_t i = 1; i < grads.size(); ++i) {
            double v = grads[i].dot(d);
            if (v > best_val) {  // strict: ties keep the lowest piece index
                best = static_cast<int>(i);
                best_val = v;
            }
        }
        return detail::make_plane(oracle_.f(x), grads[best], x, z, birth);
    }

    std::vector<CuttingPlane> exactness_planes(const Vec& x, std::int64_t birth) const override {
        std::vector<CuttingPlane> out;
        double fx = oracle_.f(x);
        for (const auto& g : oracle_.actives(x)) out.push_back(detail::make_plane(fx, g, x, x, birth));
        return out;
    }

    const Oracle& oracle() const { return oracle_; }

  private:
    Oracle oracle_;
};

// Convex f is its own model: phi(y, x) = f(y). Cutting planes are tangents of
// f at the trial point, re-expressed at the anchor; they minorize f globally.
class ConvexSelfModel final : public FirstOrderModel {
  public:
    explicit ConvexSelfModel(Oracle o) : oracle_(std::move(o)) {}

    int dim() const override { return oracle_.n; }
    double f(const Vec& x) const override { return oracle_.f(x); }
    double eval(const Vec& y, const Vec&) const override { return oracle_.f(y); }

    CuttingPlane cut(const Vec& x, const Vec& z, std::int64_t birth) const override {
        Vec g = oracle_.subgrad(z);
        double a = oracle_.f(z) + g.dot(x - z);
        return detail::make_plane(a, std::move(g), x, z, birth);
    }

    bool planes_are_global_minorants() const override { return true; }

  private:
    Oracle oracle_;
};

// Smooth map F with Jacobian, for composite models.
struct SmoothMap {
    int n = 0;  // domain dimension
    int p = 0;  // range dimension
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> jacobian;
};

// Composite f = h(F(.)) with h convex piecewise-max-affine and F smooth:
// phi(y, x) = h(F(x) + F'(x)(y - x)).
class NaturalModel final : public FirstOrderModel {
  public:
    NaturalModel(MaxAffine h, SmoothMap F) : h_(std::move(h)), F_(std::move(F)) {}

    int dim() const override { return F_.n; }
    double f(const Vec& x) const override { return h_.eval(F_.value(x)); }

    double eval(const Vec& y, const Vec& x) const override {
        return h_.eval(F_.value(x) + F_.jacobian(x) * (y - x));
    }

    CuttingPlane cut(const Vec& x, const Vec& z, std::int64_t birth) const override {
        Mat J = F_.jacobian(x);
        Vec u = F_.value(x) + J * (z - x);
        int piece = h_.active(u).front();
        Vec g = J.transpose() * h_.g[piece];
        double a = (h_.c[piece] + h_.g[piece].dot(u)) + g.dot(x - z);
        return detail::make_plane(a, std::move(g), x, z, birth);
    }

  private:
    MaxAffine h_;
    SmoothMap F_;
};

// Smooth scalar function with gradient, for the splitting model.
struct SmoothFunction {
    int n = 0;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
};

// f = g + h with g smooth and h convex piecewise-max-affine:
// phi(y, x) = g(x) + grad g(x)'(y - x) + h(y).
class SplittingModel final : public FirstOrderModel {
  public:
    SplittingModel(SmoothFunction g, MaxAffine h) : g_(std::move(g)), h_(std::move(h)) {}

    int dim() const override { return g_.n; }
    double f(const Vec& x) const override { return g_.value(x) + h_.eval(x); }

    double eval(const Vec& y, const Vec& x) const override {
        return g_.value(x) + g_.gradient(x).dot(y - x) + h_.eval(y);
    }

    CuttingPlane cut(const Vec& x, const Vec& z, std::int64_t birth) const override {
        int piece = h_.active(z).front();
        Vec slope = g_.gradient(x) + h_.g[piece];
        double a = eval(z, x) + slope.dot(x - z);
        return detail::make_plane(a, std::move(slope), x, z, birth);
    }

  private:
    SmoothFunction g_;
    MaxAffine h_;
};

// Exact-penalty objective over (t, w): f(t, w) = t + c * max{0, f_in(w)},
// modeled as phi((t', w'), (t, w)) = t' + c * max{0, phi_in(w', w)}.
// At the kink the zero branch is preferred (0 minorizes the max term).
class PenaltyMaxModel final : public FirstOrderModel {
  public:
    PenaltyMaxModel(std::shared_ptr<const FirstOrderModel> inner, double c)
        : inner_(std::move(inner)), c_(c) {
        if (!(c_ > 0)) throw std::invalid_argument("penalty constant must be positive");
    }

    int dim() const override { return inner_->dim() + 1; }

    double f(const Vec& x) const override {
        return x[0] + c_ * std::max(0.0, inner_->f(tail(x)));
    }

    double eval(const Vec& y, const Vec& x) const override {
        return y[0] + c_ * std::max(0.0, inner_->eval(tail(y), tail(x)));
    }

    CuttingPlane cut(const Vec& x, const Vec& z, std::int64_t birth) const override {
        Vec xw = tail(x), zw = tail(z);
        double s = inner_->eval(zw, xw);
        Vec g = Vec::Zero(dim());
        g[0] = 1.0;
        if (s > 0.0) {
            CuttingPlane ip = inner_->cut(xw, zw, birth);
            g.segment(1, inner_->dim()) = c_ * ip.g;
        }
        double a = eval(z, x) + g.dot(x - z);
        return detail::make_plane(a, std::move(g), x, z, birth);
    }

    double penalty() const { return c_; }
    const FirstOrderModel& inner() const { return *inner_; }

  private:
    static Vec tail(const Vec& v) { return v.segment(1, v.size() - 1); }

    std::shared_ptr<const FirstOrderModel> inner_;
    double c_;
};

// t + c * max{0, inner value}, the penalty objective at y = (t, w).
inline double penalty_eval(const PenaltyMaxModel& m, const Vec& y, const Vec& x) {
    return m.eval(y, x);
}

// ---------------------------------------------------------------------------
// A problem instance ties a model (which owns its oracle) to a feasible set
// and a start point.
// ---------------------------------------------------------------------------

struct ProblemInstance {
    std::shared_ptr<const FirstOrderModel> model;
    FeasibleSet feasible;
    Vec x0;
    std::string name;
};

}  // namespace nstr
