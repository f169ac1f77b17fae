#pragma once

// Core domain types shared by every module: decision vectors, feasible sets,
// cutting planes, bundles, solver configuration and run traces.

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nstr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Feasible set C: all of R^n, a box, or a polyhedron {y : A y <= b}.
// ---------------------------------------------------------------------------

struct FeasibleSet {
    enum class Kind { AllSpace, Box, Polyhedron };

    Kind kind = Kind::AllSpace;
    Vec lower, upper;  // box
    Mat rows;          // polyhedron A
    Vec rhs;           // polyhedron b

    static FeasibleSet all_space() { return FeasibleSet{}; }

    static FeasibleSet box(Vec lo, Vec hi) {
        if (lo.size() != hi.size())
            throw std::invalid_argument("box bounds dimension mismatch");
        for (int i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i]))
                throw std::invalid_argument("box requires lower <= upper");
        FeasibleSet c;
        c.kind = Kind::Box;
        c.lower = std::move(lo);
        c.upper = std::move(hi);
        return c;
    }

    static FeasibleSet polyhedron(Mat a, Vec b) {
        if (a.rows() != b.size())
            throw std::invalid_argument("polyhedron row count mismatch");
        FeasibleSet c;
        c.kind = Kind::Polyhedron;
        c.rows = std::move(a);
        c.rhs = std::move(b);
        return c;
    }

    bool contains(const Vec& y, double tol = 1e-12) const {
        switch (kind) {
            case Kind::AllSpace:
                return true;
            case Kind::Box:
                for (int i = 0; i < y.size(); ++i)
                    if (y[i] < lower[i] - tol || y[i] > upper[i] + tol) return false;
                return true;
            case Kind::Polyhedron: {
                Vec r = rows * y - rhs;
                return r.maxCoeff() <= tol * (1.0 + rhs.cwiseAbs().maxCoeff());
            }
        }
        return false;
    }
};

// ---------------------------------------------------------------------------
// Cutting planes and bundles.
//
// A plane (a, g) anchored at x evaluates as a + g'(y - x); exactness planes
// additionally satisfy a = f(x).
// ---------------------------------------------------------------------------

struct CuttingPlane {
    enum class Origin { Exactness, NullStep };

    double a = 0.0;  // value at the anchor
    Vec g;           // slope
    Origin origin = Origin::Exactness;
    Vec z;           // trial point the plane was drawn at (empty for exactness)
    std::int64_t birth = 0;
    bool active_last = true;  // active at the most recent tangent solution
};

inline double plane_eval(const CuttingPlane& p, const Vec& y, const Vec& x) {
    if (y.size() != x.size() || y.size() != p.g.size())
        throw std::invalid_argument("plane_eval: dimension mismatch");
    return p.a + p.g.dot(y - x);
}

class Bundle {
  public:
    Bundle(Vec anchor, double f_anchor) : anchor_(std::move(anchor)), f_anchor_(f_anchor) {}

    const Vec& anchor() const { return anchor_; }
    double f_anchor() const { return f_anchor_; }
    const std::vector<CuttingPlane>& planes() const { return planes_; }
    std::vector<CuttingPlane>& planes() { return planes_; }
    std::size_t size() const { return planes_.size(); }

    // Max over planes. Requires at least one plane.
    double eval(const Vec& y) const {
        if (planes_.empty()) throw std::logic_error("working model: empty bundle");
        double best = -kInf;
        for (const auto& p : planes_) best = std::max(best, plane_eval(p, y, anchor_));
        return best;
    }

    // Appends a plane (dedup by exact (a, g) equality) and prunes if the
    // budget is exceeded. The plane must be anchored at this bundle's anchor.
    void add_plane(CuttingPlane p, std::size_t max_bundle) {
        if (p.g.size() != anchor_.size())
            throw std::invalid_argument("add_plane: anchor dimension mismatch");
        for (const auto& q : planes_)
            if (q.a == p.a && q.g == p.g) return;
        planes_.push_back(std::move(p));
        if (planes_.size() > max_bundle) prune(max_bundle);
    }

    // Marks which planes were active at the latest tangent solution.
    void mark_active(const std::vector<int>& active_idx) {
        for (auto& p : planes_) p.active_last = false;
        for (int i : active_idx)
            if (i >= 0 && i < static_cast<int>(planes_.size())) planes_[i].active_last = true;
    }

    // Drops planes until size <= max_bundle. The first exactness plane and the
    // newest null-step plane always survive; planes inactive at the last
    // tangent solution go first (oldest first), then the oldest remaining.
    void prune(std::size_t max_bundle) {
        if (planes_.size() <= max_bundle) return;
        std::int64_t newest_null = -1;
        for (const auto& p : planes_)
            if (p.origin == CuttingPlane::Origin::NullStep)
                newest_null = std::max(newest_null, p.birth);
        for (int pass = 0; pass < 2 && planes_.size() > max_bundle; ++pass) {
            // pass 0 removes inactive planes, pass 1 anything unprotected
            for (std::size_t i = 0; i < planes_.size() && planes_.size() > max_bundle;) {
                const CuttingPlane& p = planes_[i];
                bool keep = p.origin == CuttingPlane::Origin::Exactness
                                ? is_first_exactness(i)
                                : p.birth == newest_null;
                if (!keep && (pass == 1 || !p.active_last))
                    planes_.erase(planes_.begin() + static_cast<std::ptrdiff_t>(i));
                else
                    ++i;
            }
        }
    }

  private:
    bool is_first_exactness(std::size_t idx) const {
        for (std::size_t i = 0; i < idx; ++i)
            if (planes_[i].origin == CuttingPlane::Origin::Exactness) return false;
        return planes_[idx].origin == CuttingPlane::Origin::Exactness;
    }

    Vec anchor_;
    double f_anchor_;
    std::vector<CuttingPlane> planes_;
};

inline double working_model_eval(const Bundle& b, const Vec& y) { return b.eval(y); }

// ---------------------------------------------------------------------------
// Solver configuration and traces.
// ---------------------------------------------------------------------------

enum class TrustNorm { Inf, L1, L2SinglePlane };
enum class SolveMode { Bundle, Classical };
enum class TrialMode { Deterministic, Randomized };

struct SolverConfig {
    double gamma = 1e-4;        // acceptance threshold
    double gamma_tilde = 2e-4;  // radius-reduction threshold on null steps
    double Gamma = 0.1;         // memory-radius doubling threshold
    double theta = 0.1;         // trial-step fraction
    double M = 2.0;             // trial-step ball inflation
    TrustNorm norm = TrustNorm::Inf;
    double R_init = 1.0;
    double tol1 = 1e-5;  // relative step
    double tol2 = 1e-5;  // relative decrease
    double tol3 = 1e-6;  // relative aggregate-gradient norm
    int k_max = 50;
    int nu_max = 5;
    int max_serious = 1000;
    std::size_t max_bundle = 50;
    SolveMode mode = SolveMode::Bundle;
    TrialMode trial_mode = TrialMode::Deterministic;
    std::uint64_t seed = 42;

    void validate() const {
        if (!(0 < gamma && gamma < gamma_tilde && gamma_tilde < 1))
            throw std::invalid_argument("config requires 0 < gamma < gamma_tilde < 1");
        if (!(gamma < Gamma && Gamma <= 1))
            throw std::invalid_argument("config requires 0 < gamma < Gamma <= 1");
        if (!(0 < theta && theta < 1)) throw std::invalid_argument("config requires 0 < theta < 1");
        if (!(M >= 1)) throw std::invalid_argument("config requires M >= 1");
        if (!(tol1 > 0 && tol2 > 0 && tol3 > 0))
            throw std::invalid_argument("config requires positive tolerances");
        if (!(R_init > 0)) throw std::invalid_argument("config requires R_init > 0");
        if (k_max < 1 || nu_max < 1 || max_serious < 1 || max_bundle < 1)
            throw std::invalid_argument("config requires positive iteration budgets");
    }
};

struct TraceRecord {
    int outer = 0;  // j
    int inner = 0;  // k
    bool serious = false;
    Vec x;  // iterate the step was taken from
    double f = 0.0;
    double rho = 0.0;
    double rho_tilde = 0.0;
    double radius = 0.0;
    double g_agg_norm = 0.0;
};

struct SolverTrace {
    std::vector<TraceRecord> records;
};

}  // namespace nstr
