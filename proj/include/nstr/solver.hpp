#pragma once

// Outer/inner loop driver: acceptance ratio rho, secondary ratio rho~,
// trust-region halving on null steps, memory-radius doubling on very
// successful steps, and the relative stopping tests. Classical mode keeps a
// single exactness plane, never adds cuts, and halves the radius on every
// null step (the nonsmooth steepest-descent scheme used by the built-in
// counterexample experiments).

#include "nstr/core.hpp"
#include "nstr/models.hpp"
#include "nstr/tanprog.hpp"

#include <cstdio>
#include <functional>
#include <optional>
#include <random>

namespace nstr {

enum class SolveStatus { Critical, InnerStall, BudgetExhausted };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Critical: return "critical";
        case SolveStatus::InnerStall: return "inner_stall";
        case SolveStatus::BudgetExhausted: return "budget_exhausted";
    }
    return "unknown";
}

struct SolveResult {
    Vec x_final;
    double f_final = 0.0;
    SolveStatus status = SolveStatus::BudgetExhausted;
    int serious_steps = 0;
    int inner_iterations = 0;
    SolverTrace trace;
};

// rho = (f(x) - f(z)) / (f(x) - model_z). A predicted decrease at or below
// 1e-15 (1 + |f(x)|) is below double-precision resolution; the ratio test is
// meaningless there and the caller must stop the inner loop.
inline std::optional<double> compute_rho(double f_x, double f_z, double model_z) {
    double pred = f_x - model_z;
    if (pred <= 1e-15 * (1.0 + std::abs(f_x))) return std::nullopt;
    return (f_x - f_z) / pred;
}

// rho~ = (f(x) - phi(z, x)) / (f(x) - model_z), the secondary control ratio.
inline std::optional<double> compute_rho_tilde(double f_x, double ideal_z, double model_z) {
    double pred = f_x - model_z;
    if (pred <= 1e-15 * (1.0 + std::abs(f_x))) return std::nullopt;
    return (f_x - ideal_z) / pred;
}

// Null-step radius update: halve when rho~ >= gamma~, never increase.
inline double update_radius(double R, double rho_tilde, const SolverConfig& cfg) {
    return rho_tilde >= cfg.gamma_tilde ? 0.5 * R : R;
}

// Memory radius carried to the next inner loop: double on rho >= Gamma.
inline double update_memory_radius(double R_accept, double rho, const SolverConfig& cfg) {
    return rho >= cfg.Gamma ? 2.0 * R_accept : R_accept;
}

// Stopping test applied when a serious step is accepted.
inline bool stopping_serious(double step_rel, double dec_rel, double g_min_rel,
                             const SolverConfig& cfg) {
    return step_rel < cfg.tol1 && dec_rel < cfg.tol2 && g_min_rel < cfg.tol3;
}

struct InnerCounters {
    int k = 0;
    int consecutive_small = 0;
};

// Inner-loop stall test: k_max exceeded, or nu_max consecutive iterations
// with small step, small decrease and small aggregate gradient.
inline bool stopping_inner(double step_rel, double dec_rel, double g_rel, InnerCounters& counters,
                           const SolverConfig& cfg) {
    if (counters.k > cfg.k_max) return true;
    bool small = step_rel < cfg.tol1 && dec_rel < cfg.tol2 && g_rel < cfg.tol3;
    counters.consecutive_small = small ? counters.consecutive_small + 1 : 0;
    return counters.consecutive_small >= cfg.nu_max;
}

// Detailed per-trial information for observers (tests, trajectory dumps).
struct StepInfo {
    int outer = 0;
    int inner = 0;
    bool serious = false;
    Vec x;
    Vec z;
    double f_x = 0.0;
    double f_z = 0.0;
    double model_y = 0.0;  // working model at the tangent solution
    double model_z = 0.0;  // working model at the trial point
    double rho = 0.0;
    double rho_tilde = 0.0;
    double radius = 0.0;
    double g_agg_norm = 0.0;
    bool euclid_single = false;
};

using StepObserver = std::function<void(const StepInfo&)>;

struct InnerOutcome {
    enum class Kind { Accepted, Stalled } kind = Kind::Stalled;
    Vec z;
    double f_z = 0.0;
    double R_accept = 0.0;
    double rho = 0.0;
    double g_agg_norm = kInf;  // aggregate norm at acceptance / at stall
    bool radius_reduced = false;
    int iterations = 0;
    bool critical_stall = false;  // stall with the aggregate test satisfied
};

namespace solverdetail {

inline Bundle seed_bundle(const FirstOrderModel& model, const Vec& x, double f_x,
                          const Bundle* previous, const SolverConfig& cfg, std::int64_t birth) {
    Bundle b(x, f_x);
    b.add_plane(model.cut(x, x, birth), cfg.max_bundle);
    // Recycle planes from the previous serious step when they are global
    // minorants of f; re-anchor via a+ = value of the old plane at the new
    // anchor.
    if (previous && model.planes_are_global_minorants() && cfg.mode == SolveMode::Bundle) {
        for (const auto& p : previous->planes()) {
            CuttingPlane q = p;
            q.a = plane_eval(p, x, previous->anchor());
            q.origin = CuttingPlane::Origin::NullStep;
            if (q.z.size() == 0) q.z = previous->anchor();
            b.add_plane(std::move(q), cfg.max_bundle);
        }
    }
    return b;
}

}  // namespace solverdetail

// One inner loop at serious iterate x. On acceptance returns the new point
// with the radius and ratio at acceptance; otherwise reports a stall and
// whether the final aggregate-gradient test would certify criticality.
inline InnerOutcome inner_loop(const FirstOrderModel& model, const Vec& x, double f_x,
                               const FeasibleSet& C, const SolverConfig& cfg, double R_init,
                               Bundle& bundle, std::mt19937_64& rng, int outer_index,
                               SolverTrace* trace, const StepObserver& observer,
                               std::int64_t* birth_counter) {
    InnerOutcome out;
    double R = R_init;
    InnerCounters counters;
    const bool classical = cfg.mode == SolveMode::Classical;

    for (counters.k = 1; counters.k <= cfg.k_max; ++counters.k) {
        ++out.iterations;

        TangentSolution ts;
        if (cfg.norm == TrustNorm::L2SinglePlane) {
            const Vec& g = bundle.planes().front().g;
            if (g.norm() == 0.0) {
                out.g_agg_norm = 0.0;
                out.critical_stall = true;
                return out;
            }
            ts = solve_tangent_euclid_single(g, x, R, f_x);
        } else {
            ts = solve_tangent_lp(bundle, C, R, cfg.norm);
            bundle.mark_active(ts.active_planes);
        }
        out.g_agg_norm = ts.g_agg_constrained.norm();

        double pred_y = f_x - ts.model_value;
        if (pred_y <= 1e-15 * (1.0 + std::abs(f_x))) {
            // The anchor already minimizes the working model over C and the
            // ball; the aggregate decides whether this certifies criticality.
            out.critical_stall = ts.g_agg_constrained.norm() / (1.0 + std::abs(f_x)) < cfg.tol3;
            return out;
        }

        Vec z = trial_step(ts, bundle, C, cfg, rng);
        double f_z = model.f(z);
        double model_z = (cfg.norm == TrustNorm::L2SinglePlane) ? ts.model_value : bundle.eval(z);
        auto rho_opt = compute_rho(f_x, f_z, model_z);
        if (!rho_opt) {
            out.critical_stall = ts.g_agg_constrained.norm() / (1.0 + std::abs(f_x)) < cfg.tol3;
            return out;
        }
        double rho = *rho_opt;
        double ideal_z = model.eval(z, x);
        double rho_tilde = compute_rho_tilde(f_x, ideal_z, model_z).value_or(1.0);

        StepInfo info;
        info.outer = outer_index;
        info.inner = counters.k;
        info.serious = rho >= cfg.gamma;
        info.x = x;
        info.z = z;
        info.f_x = f_x;
        info.f_z = f_z;
        info.model_y = ts.model_value;
        info.model_z = model_z;
        info.rho = rho;
        info.rho_tilde = rho_tilde;
        info.radius = R;
        info.g_agg_norm = ts.g_agg_constrained.norm();
        info.euclid_single = cfg.norm == TrustNorm::L2SinglePlane;
        if (observer) observer(info);
        if (trace)
            trace->records.push_back({outer_index, counters.k, info.serious, x, f_x, rho,
                                      rho_tilde, R, info.g_agg_norm});

        if (rho >= cfg.gamma) {
            out.kind = InnerOutcome::Kind::Accepted;
            out.z = std::move(z);
            out.f_z = f_z;
            out.R_accept = R;
            out.rho = rho;
            out.g_agg_norm = ts.g_agg_constrained.norm();
            return out;
        }

        // null step: enrich the working model, then manage the radius
        if (!classical) {
            bundle.add_plane(model.cut(x, z, (*birth_counter)++), cfg.max_bundle);
            double R_new = update_radius(R, rho_tilde, cfg);
            out.radius_reduced |= R_new < R;
            R = R_new;
        } else {
            R *= 0.5;
            out.radius_reduced = true;
        }

        double step_rel = (z - x).norm() / (1.0 + x.norm());
        double dec_rel = (f_x - f_z) / (1.0 + std::abs(f_x));
        double g_rel = ts.g_agg_constrained.norm() / (1.0 + std::abs(f_x));
        if (stopping_inner(step_rel, dec_rel, g_rel, counters, cfg)) {
            out.critical_stall = g_rel < cfg.tol3;
            return out;
        }
    }
    out.critical_stall = out.g_agg_norm / (1.0 + std::abs(f_x)) < cfg.tol3;
    return out;
}

// Full solve: serious values decrease strictly; the status reports whether
// the stopping tests certified criticality, the inner loop stalled without a
// certificate, or the iteration budget ran out.
inline SolveResult outer_solve(const ProblemInstance& problem, const SolverConfig& cfg,
                               const StepObserver& observer = {}) {
    cfg.validate();
    const FirstOrderModel& model = *problem.model;
    if (!problem.feasible.contains(problem.x0))
        throw std::invalid_argument("outer_solve: start point infeasible");

    SolveResult res;
    Vec x = problem.x0;
    double f_x = model.f(x);
    double R_sharp = cfg.R_init;
    std::mt19937_64 rng(cfg.seed);
    std::int64_t birth = 0;

    double g_last_reduced = kInf;  // aggregate norm at the most recent
                                   // radius-reducing inner loop's acceptance
    bool have_reduced = false;
    std::optional<Bundle> prev_bundle;

    res.status = SolveStatus::BudgetExhausted;
    for (int j = 1; j <= cfg.max_serious; ++j) {
        Bundle bundle = solverdetail::seed_bundle(model, x, f_x,
                                                  prev_bundle ? &*prev_bundle : nullptr, cfg,
                                                  birth++);
        InnerOutcome inner = inner_loop(model, x, f_x, problem.feasible, cfg, R_sharp, bundle,
                                        rng, j, &res.trace, observer, &birth);
        res.inner_iterations += inner.iterations;

        if (inner.kind == InnerOutcome::Kind::Stalled) {
            res.status = inner.critical_stall ? SolveStatus::Critical : SolveStatus::InnerStall;
            break;
        }

        double step_rel = (x - inner.z).norm() / (1.0 + x.norm());
        double dec_rel = (f_x - inner.f_z) / (1.0 + std::abs(f_x));
        double g_min = inner.g_agg_norm;
        if (!inner.radius_reduced && have_reduced) g_min = std::min(g_min, g_last_reduced);
        double g_min_rel = g_min / (1.0 + std::abs(f_x));

        if (inner.radius_reduced) {
            g_last_reduced = inner.g_agg_norm;
            have_reduced = true;
        }

        R_sharp = update_memory_radius(inner.R_accept, inner.rho, cfg);
        prev_bundle = std::move(bundle);
        x = inner.z;
        f_x = inner.f_z;
        ++res.serious_steps;

        if (stopping_serious(step_rel, dec_rel, g_min_rel, cfg)) {
            res.status = SolveStatus::Critical;
            break;
        }
    }

    res.x_final = std::move(x);
    res.f_final = f_x;
    return res;
}

// Trace export: one row per trial with the exact header
// j,k,kind,f,rho,rho_tilde,R,g_norm.
inline void write_trace_csv(const SolverTrace& trace, std::FILE* out) {
    std::fputs("j,k,kind,f,rho,rho_tilde,R,g_norm\n", out);
    for (const auto& r : trace.records)
        std::fprintf(out, "%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.outer, r.inner,
                     r.serious ? "serious" : "null", r.f, r.rho, r.rho_tilde, r.radius,
                     r.g_agg_norm);
}

inline void write_trace_csv(const SolverTrace& trace, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open trace file: " + path);
    write_trace_csv(trace, f);
    std::fclose(f);
}

}  // namespace nstr
