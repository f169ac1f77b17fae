// Command-line front end: solve problem files or built-ins, certify
// worst-case values against global-optimization oracles, and run the
// classical-vs-bundle comparison on the built-in dragon example.

#include "nstr/driver.hpp"
#include "nstr/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace nstr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitStalled = 2;

struct CommonFlags {
    std::string problem;
    std::string out_dir;
    std::string mode = "bundle";
    std::string norm = "inf";
    double gamma = -1, gamma_tilde = -1, Gamma = -1, theta = -1, M = -1, R0 = -1;
    std::uint64_t seed = 42;
    int threads = 1;
    int max_serious = -1;
};

void add_solver_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--mode", f.mode, "bundle | classical")->check(CLI::IsMember({"bundle", "classical"}));
    cmd->add_option("--norm", f.norm, "inf | l1")->check(CLI::IsMember({"inf", "l1"}));
    cmd->add_option("--gamma", f.gamma, "acceptance threshold");
    cmd->add_option("--gamma-tilde", f.gamma_tilde, "radius-reduction threshold");
    cmd->add_option("--Gamma", f.Gamma, "memory-radius doubling threshold");
    cmd->add_option("--theta", f.theta, "trial-step fraction");
    cmd->add_option("--M", f.M, "trial-step ball inflation");
    cmd->add_option("--R0", f.R0, "initial trust-region radius");
    cmd->add_option("--seed", f.seed, "random seed (recorded in the report)");
    cmd->add_option("--threads", f.threads, "sampling threads for certify");
    cmd->add_option("--max-serious", f.max_serious, "serious-step budget");
    cmd->add_option("--out", f.out_dir, "output directory for report and trace");
}

// CLI flags override problem-file config fields, which override defaults.
void apply_flags(const CLI::App* cmd, const CommonFlags& f, SolverConfig& cfg) {
    if (cmd->count("--mode")) cfg.mode = f.mode == "classical" ? SolveMode::Classical : SolveMode::Bundle;
    if (cmd->count("--norm")) cfg.norm = f.norm == "l1" ? TrustNorm::L1 : TrustNorm::Inf;
    if (cmd->count("--gamma")) cfg.gamma = f.gamma;
    if (cmd->count("--gamma-tilde")) cfg.gamma_tilde = f.gamma_tilde;
    if (cmd->count("--Gamma")) cfg.Gamma = f.Gamma;
    if (cmd->count("--theta")) cfg.theta = f.theta;
    if (cmd->count("--M")) cfg.M = f.M;
    if (cmd->count("--R0")) cfg.R_init = f.R0;
    if (cmd->count("--max-serious")) cfg.max_serious = f.max_serious;
    cfg.seed = f.seed;
}

void write_outputs(const std::string& out_dir, const std::string& name, const SolveResult& res,
                   const SolverConfig& cfg, Json extra = {}) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    Json rep = report_json(name, res, cfg);
    if (extra.is_object())
        for (auto& [k, v] : extra.items()) rep[k] = v;
    write_json_file(rep, out_dir + "/report.json");
    write_trace_csv(res.trace, out_dir + "/trace.csv");
}

int exit_code_for(SolveStatus s) {
    return s == SolveStatus::Critical ? kExitOk : kExitStalled;
}

ProblemInstance load_problem(const std::string& name_or_path, SolverConfig& cfg) {
    if (name_or_path == "dragon") {
        cfg.gamma = 0.9;
        cfg.gamma_tilde = 0.95;
        cfg.Gamma = 1.0;
        return dragon_problem(11.0, (11.0 / 11.0) / std::sqrt(2.0), cfg.mode == SolveMode::Bundle);
    }
    if (name_or_path == "l1box") return l1box_problem();
    Json j = load_json_file(name_or_path);
    if (j.contains("config")) apply_config_json(j.at("config"), cfg);
    return problem_from_json(j);
}

int cmd_solve(const CLI::App* cmd, const CommonFlags& f) {
    SolverConfig cfg;
    ProblemInstance prob = load_problem(f.problem, cfg);
    apply_flags(cmd, f, cfg);
    if (cfg.mode == SolveMode::Classical && prob.feasible.kind == FeasibleSet::Kind::AllSpace &&
        !cmd->count("--norm"))
        cfg.norm = TrustNorm::L2SinglePlane;
    cfg.validate();

    SolveResult res = outer_solve(prob, cfg);
    std::cout << prob.name << ": status=" << to_string(res.status) << " f=" << res.f_final
              << " serious=" << res.serious_steps << "\n";
    write_outputs(f.out_dir, prob.name, res, cfg);
    return exit_code_for(res.status);
}

int cmd_certify(const CLI::App* cmd, const CommonFlags& f, const std::string& task,
                const std::string& method, double dstar, double gamma_conf) {
    SolverConfig cfg;
    apply_flags(cmd, f, cfg);
    cfg.validate();
    LftPlant plant = plant_from_json(load_json_file(f.problem));
    int m = plant.m();

    ZhengOptions zopt;
    zopt.seed = f.seed;
    zopt.threads = f.threads;

    if (task == "distance") {
        DistanceRun run = solve_distance(plant, cfg);
        double d = dstar > 0 ? dstar : run.d_star;
        auto dec = stability_decision(plant, d, gamma_conf, zopt);
        std::cout << "distance: d*=" << run.d_star << " penalty_c=" << run.penalty_constant
                  << (run.robustly_stable_on_delta ? " (robustly stable on the normalized box)"
                                                   : "")
                  << "\n";
        std::cout << "decision at d*=" << d << ", confidence " << gamma_conf << ": "
                  << to_string(dec.decision) << " (alpha_under=" << dec.alpha_under
                  << ", alpha_over=" << dec.alpha_over << ")\n";
        if (!f.out_dir.empty()) {
            Json extra;
            extra["d_star"] = run.d_star;
            extra["penalty_constant"] = run.penalty_constant;
            extra["robustly_stable_on_delta"] = run.robustly_stable_on_delta;
            extra["decision"] = to_string(dec.decision);
            extra["alpha_under"] = dec.alpha_under;
            extra["alpha_over"] = dec.alpha_over;
            write_outputs(f.out_dir, "distance", run.solve, cfg, extra);
        }
        return dec.decision == StabilityDecision::Certified ? kExitOk : kExitStalled;
    }

    // wc-alpha / wc-hinf: solver lower bound vs certifier value
    double solver_value;
    Vec delta_star;
    std::function<double(const Vec&)> objective;
    if (task == "wc-alpha") {
        WorstCaseRun run = worst_case_alpha_run(plant, cfg);
        solver_value = run.value;
        delta_star = run.delta_star;
        objective = [plant](const Vec& d) {
            return spectral_abscissa_value(closed_loop_A(plant, d));
        };
    } else {
        WorstCaseRun run = worst_case_hinf_run(plant, cfg);
        solver_value = run.value;
        delta_star = run.delta_star;
        objective = [plant](const Vec& d) {
            StateSpace ss = close_loop(plant, d);
            try {
                return hinf_norm(ss.A, ss.B, ss.C, ss.D).value;
            } catch (const UnstableSystem&) {
                return kInf;
            }
        };
    }

    double cert_value;
    BoxDomain box{Vec::Constant(m, -1.0), Vec::Constant(m, 1.0)};
    if (method == "grid") {
        if (m > 3) {
            std::cerr << "error: grid method limited to m <= 3 parameters\n";
            return kExitError;
        }
        cert_value = grid_certify_refined(objective, box, 0.01, 0.001).max_value;
    } else {
        cert_value = zheng_maximize(objective, box, zopt).alpha_star;
    }
    double gap = cert_value - solver_value;
    std::cout << task << ": solver=" << solver_value << " " << method << "=" << cert_value
              << " gap=" << gap << " seed=" << f.seed << "\n";
    return kExitOk;
}

int cmd_dragon(double gamma, double a, bool emit_polygon, const std::string& out_dir,
               std::uint64_t seed) {
    if (!(gamma > 5.0 / 13.0 && gamma < 1.0)) {
        std::cerr << "error: gamma must lie in (5/13, 1)\n";
        return kExitError;
    }
    double x1 = (a / 11.0) / std::sqrt(2.0);

    SolverConfig cfg;
    cfg.gamma = gamma;
    cfg.gamma_tilde = 0.5 * (gamma + 1.0);
    cfg.Gamma = 1.0;
    cfg.max_serious = 500;
    cfg.seed = seed;

    DragonQuantities q = dragon_quantities(a, x1, gamma);
    std::cout << "a=" << a << " x1=" << x1 << "\n";
    std::cout << "r_A=" << q.r_A << " r_B=" << q.r_B << " r_gamma=" << q.r_gamma
              << " f_A=" << q.f_A << " f_B=" << q.f_B << "\n";
    std::cout << "rho at {r_A/2, r_A, r_B, 3/2 r_B} = {" << dragon_rho(a, x1, q.r_A / 2) << ", "
              << dragon_rho(a, x1, q.r_A) << ", " << dragon_rho(a, x1, q.r_B) << ", "
              << dragon_rho(a, x1, 1.5 * q.r_B) << "}\n";

    if (emit_polygon) {
        std::cout << "level polygon [f=" << a << "]:\n";
        for (const auto& v : dragon_polygon(a)) std::cout << "  " << v[0] << "," << v[1] << "\n";
    }

    SolverConfig ccfg = cfg;
    ccfg.mode = SolveMode::Classical;
    ccfg.norm = TrustNorm::L2SinglePlane;
    SolveResult classical = outer_solve(dragon_problem(a, x1, false), ccfg);

    SolverConfig bcfg = cfg;
    bcfg.mode = SolveMode::Bundle;
    bcfg.norm = TrustNorm::Inf;
    SolveResult bundle = outer_solve(dragon_problem(a, x1, true), bcfg);

    std::cout << "classical: status=" << to_string(classical.status) << " f=" << classical.f_final
              << " serious=" << classical.serious_steps << "\n";
    std::cout << "bundle:    status=" << to_string(bundle.status) << " f=" << bundle.f_final
              << " serious=" << bundle.serious_steps << "\n";

    bool classical_stalled =
        classical.status != SolveStatus::Critical && classical.f_final > -100.0 + 1e-4;
    bool bundle_min = bundle.f_final <= -100.0 + 1e-4;
    if (gamma > 198.0 / 234.0 && classical_stalled && bundle_min)
        std::cout << "verdict: classical: stalled at non-critical origin / bundle: reached "
                     "global minimum -100\n";
    else if (gamma <= 198.0 / 234.0)
        std::cout << "verdict: no stall guarantee (gamma at or below 198/234)\n";
    else
        std::cout << "verdict: unexpected outcome, inspect traces\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_trace_csv(classical.trace, out_dir + "/classical_trace.csv");
        write_trace_csv(bundle.trace, out_dir + "/bundle_trace.csv");
        Json rep;
        rep["a"] = a;
        rep["x1"] = x1;
        rep["gamma"] = gamma;
        rep["r_A"] = q.r_A;
        rep["r_B"] = q.r_B;
        rep["r_gamma"] = q.r_gamma;
        rep["classical"] = report_json("dragon-classical", classical, ccfg);
        rep["bundle"] = report_json("dragon-bundle", bundle, bcfg);
        write_json_file(rep, out_dir + "/dragon.json");
    }
    return classical.status == SolveStatus::Critical ? kExitOk : kExitStalled;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonsmooth bundle trust-region solver and robustness toolkit"};
    app.require_subcommand(1);

    CommonFlags sf;
    std::string solve_task = "min";
    CLI::App* solve = app.add_subcommand("solve", "minimize a problem file or built-in");
    solve->add_option("--problem", sf.problem, "problem file or built-in name (dragon, l1box)")
        ->required();
    solve->add_option("--task", solve_task, "min")->check(CLI::IsMember({"min"}));
    add_solver_flags(solve, sf);

    CommonFlags cf;
    std::string task = "wc-alpha", method = "zheng";
    double dstar = -1.0, gamma_conf = 0.05;
    CLI::App* certify = app.add_subcommand("certify", "compare solver bounds with global oracles");
    certify->add_option("--problem", cf.problem, "plant JSON file")->required();
    certify->add_option("--task", task, "wc-alpha | wc-hinf | distance")
        ->check(CLI::IsMember({"wc-alpha", "wc-hinf", "distance"}));
    certify->add_option("--method", method, "zheng | grid")->check(CLI::IsMember({"zheng", "grid"}));
    certify->add_option("--dstar", dstar, "distance value to test (default: solver result)");
    certify->add_option("--gamma-conf", gamma_conf, "confidence level for the decision test");
    add_solver_flags(certify, cf);

    double dgamma = 0.9, da = 11.0;
    bool emit_polygon = false;
    std::string dout;
    std::uint64_t dseed = 42;
    CLI::App* dragon = app.add_subcommand("dragon", "classical vs bundle on the dragon example");
    dragon->add_option("--gamma", dgamma, "acceptance threshold, in (5/13, 1)");
    dragon->add_option("--a", da, "initial level value");
    dragon->add_flag("--emit-polygon", emit_polygon, "print the level-polygon vertices");
    dragon->add_option("--out", dout, "output directory");
    dragon->add_option("--seed", dseed, "random seed");

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return cmd_solve(solve, sf);
        if (certify->parsed()) return cmd_certify(certify, cf, task, method, dstar, gamma_conf);
        if (dragon->parsed()) return cmd_dragon(dgamma, da, emit_polygon, dout, dseed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const FileFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
