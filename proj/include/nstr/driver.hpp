#pragma once

// Run-level drivers shared by the CLI and the acceptance harness:
// multi-start solves for the worst-case problems and the penalty-escalation
// loop for the distance to instability.

#include "nstr/bench.hpp"
#include "nstr/certify.hpp"
#include "nstr/control.hpp"
#include "nstr/solver.hpp"

namespace nstr {

// Corner/center/random starting points inside the normalized box.
inline std::vector<Vec> default_starts(int m, int random_extra = 4, std::uint64_t seed = 7) {
    std::vector<Vec> starts{Vec::Zero(m)};
    if (m <= 4) {
        for (int mask = 0; mask < (1 << m); ++mask) {
            Vec c(m);
            for (int i = 0; i < m; ++i) c[i] = (mask >> i) & 1 ? 1.0 : -1.0;
            starts.push_back(c);
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k < random_extra; ++k) {
        Vec r(m);
        for (int i = 0; i < m; ++i) r[i] = unif(rng);
        starts.push_back(r);
    }
    return starts;
}

// Best-of-many-starts solve; problems are minimization, so the smallest final
// value wins.
template <typename ProblemBuilder>
inline SolveResult multi_start_solve(const ProblemBuilder& build, const std::vector<Vec>& starts,
                                     const SolverConfig& cfg) {
    SolveResult best;
    bool have = false;
    for (const auto& s : starts) {
        ProblemInstance p = build(s);
        SolveResult r = outer_solve(p, cfg);
        if (!have || r.f_final < best.f_final) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

struct WorstCaseRun {
    double value = 0.0;  // worst-case alpha or H-inf norm (maximized quantity)
    Vec delta_star;
    SolveResult solve;
};

inline WorstCaseRun worst_case_alpha_run(const LftPlant& plant, const SolverConfig& cfg) {
    auto build = [&](const Vec& s) { return worst_case_alpha_problem(plant, s); };
    WorstCaseRun run;
    run.solve = multi_start_solve(build, default_starts(plant.m()), cfg);
    run.value = -run.solve.f_final;
    run.delta_star = run.solve.x_final;
    return run;
}

inline WorstCaseRun worst_case_hinf_run(const LftPlant& plant, const SolverConfig& cfg) {
    auto build = [&](const Vec& s) { return worst_case_hinf_problem(plant, s); };
    WorstCaseRun run;
    run.solve = multi_start_solve(build, default_starts(plant.m()), cfg);
    run.value = -run.solve.f_final;
    run.delta_star = run.solve.x_final;
    return run;
}

struct DistanceRun {
    double d_star = 0.0;
    Vec delta_star;
    double penalty_constant = 0.0;
    int escalations = 0;
    bool robustly_stable_on_delta = false;  // d* exceeds the normalized box
    SolveResult solve;
};

// Penalty program for the distance to instability, with automatic 10x
// escalation of c while the returned point still has alpha(A(delta)) < 0.
inline DistanceRun solve_distance(const LftPlant& plant, const SolverConfig& cfg,
                                  double c_init = 0.0) {
    DistanceRun run;
    double c = c_init > 0 ? c_init : default_penalty_constant(plant);
    double alpha_tol = 1e-6 * (1.0 + std::abs(spectral_abscissa_value(plant.A)));
    for (int attempt = 0; attempt < 4; ++attempt) {
        ProblemInstance p = distance_to_instability_problem(plant, c);
        run.solve = outer_solve(p, cfg);
        run.penalty_constant = c;
        run.d_star = run.solve.x_final[0];
        run.delta_star = run.solve.x_final.tail(plant.m());
        double alpha = spectral_abscissa_value(closed_loop_A(plant, run.delta_star));
        if (alpha >= -alpha_tol) break;  // constraint alpha >= 0 holds (to tolerance)
        c *= 10.0;
        run.escalations = attempt + 1;
    }
    run.robustly_stable_on_delta = run.d_star > 1.0 + 1e-9;
    return run;
}

}  // namespace nstr
