#pragma once

// Parametric-robustness oracles and problem builders: block-diagonal real
// uncertainty, the closed-loop matrix A(delta) with its analytic derivative,
// spectral abscissa and H-infinity norms with gradients, and the worst-case /
// distance-to-instability optimization problems.

#include "nstr/core.hpp"
#include "nstr/linalg.hpp"
#include "nstr/models.hpp"

#include <memory>
#include <numeric>

namespace nstr {

class IllPosedLft : public std::runtime_error {
  public:
    IllPosedLft() : std::runtime_error("ill-posed LFT: I - Dqp*Delta singular") {}
};

class UnstableSystem : public std::runtime_error {
  public:
    UnstableSystem() : std::runtime_error("system matrix is not Hurwitz") {}
};

// ---------------------------------------------------------------------------
// Plant with uncertainty channel p = Delta q and performance channel w -> z:
//   x' = A x + Bp p + Bw w
//   q  = Cq x + Dqp p + Dqw w
//   z  = Cz x + Dzp p + Dzw w
// Delta = diag[d_1 I_{r_1}, ..., d_m I_{r_m}], normalized to |d_i| <= 1.
// ---------------------------------------------------------------------------

struct LftPlant {
    Mat A, Bp, Bw, Cq, Dqp, Dqw, Cz, Dzp, Dzw;
    std::vector<int> structure;  // repetitions r_i

    int nx() const { return static_cast<int>(A.rows()); }
    int nq() const { return static_cast<int>(Cq.rows()); }
    int m() const { return static_cast<int>(structure.size()); }
    int nw() const { return static_cast<int>(Bw.cols()); }
    int nz() const { return static_cast<int>(Cz.rows()); }

    void validate() const {
        int n = nx(), q = nq();
        int total = std::accumulate(structure.begin(), structure.end(), 0);
        if (A.cols() != n) throw std::invalid_argument("plant: A must be square");
        if (total != q) throw std::invalid_argument("plant: structure must sum to dim(q)");
        for (int r : structure)
            if (r < 1) throw std::invalid_argument("plant: repetitions must be positive");
        if (Bp.rows() != n || Bp.cols() != q) throw std::invalid_argument("plant: Bp shape");
        if (Cq.cols() != n) throw std::invalid_argument("plant: Cq shape");
        if (Dqp.rows() != q || Dqp.cols() != q) throw std::invalid_argument("plant: Dqp shape");
        if (Bw.size() > 0 && Bw.rows() != n) throw std::invalid_argument("plant: Bw shape");
        if (Dqw.size() > 0 && (Dqw.rows() != q || Dqw.cols() != nw()))
            throw std::invalid_argument("plant: Dqw shape");
        if (Cz.size() > 0 && Cz.cols() != n) throw std::invalid_argument("plant: Cz shape");
        if (Dzp.size() > 0 && (Dzp.rows() != nz() || Dzp.cols() != q))
            throw std::invalid_argument("plant: Dzp shape");
        if (Dzw.size() > 0 && (Dzw.rows() != nz() || Dzw.cols() != nw()))
            throw std::invalid_argument("plant: Dzw shape");
    }
};

inline Mat build_delta_matrix(const Vec& delta, const std::vector<int>& structure) {
    if (delta.size() != static_cast<int>(structure.size()))
        throw std::invalid_argument("delta dimension does not match structure");
    int q = std::accumulate(structure.begin(), structure.end(), 0);
    Mat D = Mat::Zero(q, q);
    int at = 0;
    for (std::size_t i = 0; i < structure.size(); ++i)
        for (int r = 0; r < structure[i]; ++r, ++at) D(at, at) = delta[i];
    return D;
}

namespace ctrldetail {

inline Mat real_solve(const Mat& A, const Mat& B) {
    Eigen::PartialPivLU<Mat> lu(A);
    Mat X = lu.solve(B);
    if (!X.allFinite() || (A * X - B).norm() > 1e-10 * (A.norm() * X.norm() + B.norm() + 1))
        throw IllPosedLft();
    return X;
}

inline std::pair<int, int> block_range(const std::vector<int>& structure, int i) {
    int at = 0;
    for (int j = 0; j < i; ++j) at += structure[j];
    return {at, structure[i]};
}

}  // namespace ctrldetail

// A(delta) = A + Bp Delta (I - Dqp Delta)^{-1} Cq.
inline Mat closed_loop_A(const LftPlant& plant, const Vec& delta) {
    Mat D = build_delta_matrix(delta, plant.structure);
    int q = plant.nq();
    Mat S = Mat::Identity(q, q) - plant.Dqp * D;
    Mat X = ctrldetail::real_solve(S, plant.Cq);  // (I - Dqp D)^{-1} Cq
    return plant.A + plant.Bp * D * X;
}

// d A(delta) / d delta_i = Bp (I - Delta Dqp)^{-1} E_i (I - Dqp Delta)^{-1} Cq
// with E_i the indicator of block i.
inline Mat closed_loop_A_derivative(const LftPlant& plant, const Vec& delta, int i) {
    if (i < 0 || i >= plant.m()) throw std::invalid_argument("parameter index out of range");
    Mat D = build_delta_matrix(delta, plant.structure);
    int q = plant.nq();
    Mat right = ctrldetail::real_solve(Mat::Identity(q, q) - plant.Dqp * D, plant.Cq);
    // (I - Delta Dqp)^T = I - Dqp^T Delta, so this yields Bp (I - Delta Dqp)^{-1}
    Mat leftT = ctrldetail::real_solve(Mat::Identity(q, q) - plant.Dqp.transpose() * D,
                                       Mat(plant.Bp.transpose()));
    auto [at, len] = ctrldetail::block_range(plant.structure, i);
    return leftT.transpose().middleCols(at, len) * right.middleRows(at, len);
}

// ---------------------------------------------------------------------------
// Spectral abscissa of A(delta) and its gradient.
// ---------------------------------------------------------------------------

struct AlphaGradient {
    double alpha = 0.0;
    Vec gradient;                    // of the leading active eigenvalue
    bool degenerate = false;         // leading eigenvalue not simple
    std::vector<Vec> active_grads;   // one per distinct active eigenvalue
};

inline AlphaGradient alpha_gradient(const LftPlant& plant, const Vec& delta) {
    Mat Ad = closed_loop_A(plant, delta);
    SpectralAbscissa sa = spectral_abscissa(Ad);
    const int m = plant.m();

    std::vector<Mat> dA(m);
    for (int i = 0; i < m; ++i) dA[i] = closed_loop_A_derivative(plant, delta, i);

    AlphaGradient out;
    out.alpha = sa.alpha;
    int distinct = 0;
    for (const auto& t : sa.active) {
        if (t.lambda.imag() < -1e-12 * (1.0 + std::abs(t.lambda.imag())))
            continue;  // conjugate pair: the Im >= 0 member carries the gradient
        ++distinct;
        Complex uv = t.left.dot(t.right);  // u^H v
        bool bad_pairing = std::abs(uv) < 1e-8 * t.left.norm() * t.right.norm();
        Vec g(m);
        for (int i = 0; i < m; ++i) {
            Complex num = t.left.dot(dA[i].cast<Complex>() * t.right);  // u^H dA v
            g[i] = bad_pairing ? 0.0 : (num / uv).real();
        }
        if (out.active_grads.empty()) {
            out.gradient = g;
            out.degenerate = bad_pairing;
        }
        out.active_grads.push_back(std::move(g));
    }
    if (distinct > 1) out.degenerate = true;
    return out;
}

// ---------------------------------------------------------------------------
// H-infinity norm of C (sI - A)^{-1} B + D by bisection on the Hamiltonian
// imaginary-eigenvalue test, with a frequency pre-grid and local refinement
// for the peak frequency.
// ---------------------------------------------------------------------------

struct HinfResult {
    double value = 0.0;
    double omega_peak = 0.0;
};

namespace ctrldetail {

inline double sigma_at(const Mat& A, const Mat& B, const Mat& C, const Mat& D, double omega) {
    int n = static_cast<int>(A.rows());
    CMat M = CMat::Identity(n, n) * Complex(0.0, omega) - A.cast<Complex>();
    CMat X = solve_complex(M, CMat(B.cast<Complex>()));
    CMat T = C.cast<Complex>() * X + D.cast<Complex>();
    return sigma_max(T);
}

// True when the Hamiltonian-type matrix for level gamma has an eigenvalue on
// the imaginary axis, i.e. sigma_max(T(jw)) hits gamma at some frequency.
inline bool hamiltonian_crossings(const Mat& A, const Mat& B, const Mat& C, const Mat& D,
                                  double gamma, std::vector<double>* freqs) {
    int n = static_cast<int>(A.rows());
    Mat R = gamma * gamma * Mat::Identity(D.cols(), D.cols()) - D.transpose() * D;
    Eigen::PartialPivLU<Mat> lu(R);
    Mat Rinv_Dt_C = lu.solve(D.transpose() * C);
    Mat Rinv_Bt = lu.solve(Mat(B.transpose()));
    Mat Abar = A + B * Rinv_Dt_C;
    Mat H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = Abar;
    H.topRightCorner(n, n) = B * Rinv_Bt;
    H.bottomLeftCorner(n, n) = -C.transpose() * (Mat::Identity(C.rows(), C.rows()) +
                                                 D * lu.solve(Mat(D.transpose()))) * C;
    H.bottomRightCorner(n, n) = -Abar.transpose();

    Eigen::EigenSolver<Mat> es(H, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("hamiltonian eigensolve failed");
    bool found = false;
    for (int i = 0; i < 2 * n; ++i) {
        Complex lam = es.eigenvalues()(i);
        if (std::abs(lam.real()) <= 1e-8 * (1.0 + std::abs(lam.imag()))) {
            found = true;
            if (freqs && lam.imag() > 0) freqs->push_back(lam.imag());
        }
    }
    if (freqs) std::sort(freqs->begin(), freqs->end());
    return found;
}

}  // namespace ctrldetail

inline HinfResult hinf_norm(const Mat& A, const Mat& B, const Mat& C, const Mat& D,
                            double tol = 1e-9) {
    if (spectral_abscissa_value(A) >= 0) throw UnstableSystem();
    if (B.size() == 0 || C.size() == 0 || C.cwiseAbs().maxCoeff() == 0.0) {
        double d = D.size() ? sigma_max(D) : 0.0;
        return {d, 0.0};
    }

    auto sigma = [&](double w) { return ctrldetail::sigma_at(A, B, C, D, w); };

    // pre-grid: DC plus 200 log-spaced frequencies
    double best = sigma(0.0), omega = 0.0;
    std::vector<double> grid{0.0};
    for (int i = 0; i < 200; ++i) {
        double w = std::pow(10.0, -4.0 + 8.0 * i / 199.0);
        grid.push_back(w);
        double s = sigma(w);
        if (s > best) {
            best = s;
            omega = w;
        }
    }
    double dinf = D.size() ? sigma_max(D) : 0.0;
    best = std::max(best, dinf);

    auto golden_refine = [&](double lo, double hi) {
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = lo, b = hi;
        double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        double f1 = sigma(c1), f2 = sigma(c2);
        for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + b); ++it) {
            if (f1 < f2) {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + gr * (b - a);
                f2 = sigma(c2);
            } else {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - gr * (b - a);
                f1 = sigma(c1);
            }
        }
        double wmid = 0.5 * (a + b), s = sigma(wmid);
        if (s > best) {
            best = s;
            omega = wmid;
        }
    };
    // refine around the best grid point
    if (omega > 0.0) {
        auto it = std::lower_bound(grid.begin(), grid.end(), omega);
        double lo = (it == grid.begin()) ? 0.0 : *(it - 1);
        double hi = (it + 1 == grid.end()) ? omega * 10 : *(it + 1);
        golden_refine(lo, hi);
    } else {
        golden_refine(0.0, grid[1]);
    }

    if (best <= 0.0) return {0.0, 0.0};

    // bisection with certified bracket [g_lo <= norm < g_hi]
    double g_lo = best;
    double g_hi = std::max(2.0 * g_lo, g_lo + 1.0);
    for (int guard = 0; guard < 200 && ctrldetail::hamiltonian_crossings(A, B, C, D, g_hi, nullptr);
         ++guard)
        g_hi *= 2.0;

    for (int it = 0; it < 200 && (g_hi - g_lo) > tol * g_hi; ++it) {
        double mid = 0.5 * (g_lo + g_hi);
        std::vector<double> freqs;
        if (ctrldetail::hamiltonian_crossings(A, B, C, D, mid, &freqs)) {
            g_lo = mid;
            // crossing frequencies bracket the peak; evaluating sigma there
            // raises the certified lower bound and pins omega_peak
            for (std::size_t i = 0; i + 1 < freqs.size(); ++i) {
                double w = 0.5 * (freqs[i] + freqs[i + 1]);
                double s = sigma(w);
                if (s > g_lo) {
                    g_lo = s;
                    omega = w;
                }
            }
            for (double w : freqs) {
                double s = sigma(w);
                if (s > g_lo) {
                    g_lo = s;
                    omega = w;
                }
            }
        } else {
            g_hi = mid;
        }
    }
    return {g_lo, omega};
}

// ---------------------------------------------------------------------------
// Frequency-domain LFT: T_wz(delta, jw) and its parameter gradient at the
// peak frequency.
// ---------------------------------------------------------------------------

namespace ctrldetail {

struct PBlocks {
    CMat P11, P12, P21, P22;
};

inline PBlocks p_blocks(const LftPlant& plant, double omega) {
    int n = plant.nx();
    CMat M = CMat::Identity(n, n) * Complex(0.0, omega) - plant.A.cast<Complex>();
    CMat Xp = solve_complex(M, CMat(plant.Bp.cast<Complex>()));
    CMat Xw = solve_complex(M, CMat(plant.Bw.cast<Complex>()));
    PBlocks P;
    P.P11 = plant.Dqp.cast<Complex>() + plant.Cq.cast<Complex>() * Xp;
    P.P12 = plant.Dqw.cast<Complex>() + plant.Cq.cast<Complex>() * Xw;
    P.P21 = plant.Dzp.cast<Complex>() + plant.Cz.cast<Complex>() * Xp;
    P.P22 = plant.Dzw.cast<Complex>() + plant.Cz.cast<Complex>() * Xw;
    return P;
}

}  // namespace ctrldetail

// T_wz(delta, jw) = P22 + P21 Delta (I - P11 Delta)^{-1} P12.
inline CMat transfer_eval(const LftPlant& plant, const Vec& delta, double omega) {
    auto P = ctrldetail::p_blocks(plant, omega);
    CMat D = build_delta_matrix(delta, plant.structure).cast<Complex>();
    int q = plant.nq();
    CMat S = CMat::Identity(q, q) - P.P11 * D;
    CMat X;
    try {
        X = solve_complex(S, P.P12);
    } catch (const SingularSystem&) {
        throw IllPosedLft();
    }
    return P.P22 + P.P21 * D * X;
}

// Closed-loop state space of the w -> z channel at a fixed delta.
struct StateSpace {
    Mat A, B, C, D;
};

inline StateSpace close_loop(const LftPlant& plant, const Vec& delta) {
    Mat Dm = build_delta_matrix(delta, plant.structure);
    int q = plant.nq();
    Mat M = ctrldetail::real_solve(Mat::Identity(q, q) - Dm * plant.Dqp, Dm);  // Delta(I-Dqp D)^{-1}
    StateSpace ss;
    ss.A = plant.A + plant.Bp * M * plant.Cq;
    ss.B = plant.Bw + plant.Bp * M * plant.Dqw;
    ss.C = plant.Cz + plant.Dzp * M * plant.Cq;
    ss.D = plant.Dzw + plant.Dzp * M * plant.Dqw;
    return ss;
}

struct HinfGradient {
    double value = 0.0;
    double omega_peak = 0.0;
    Vec gradient;
};

// Gradient of sigma_max(T_wz(delta, jw)) in delta at a fixed frequency, via
// the top singular pair and the sandwich rule on the frequency-domain LFT.
inline Vec hinf_frequency_gradient(const LftPlant& plant, const Vec& delta, double omega) {
    auto P = ctrldetail::p_blocks(plant, omega);
    CMat Dm = build_delta_matrix(delta, plant.structure).cast<Complex>();
    int q = plant.nq();
    CMat right = solve_complex(CMat(CMat::Identity(q, q) - P.P11 * Dm), P.P12);
    CMat leftT = solve_complex(CMat((CMat::Identity(q, q) - Dm * P.P11).transpose()),
                               CMat(P.P21.transpose()));
    CMat T = P.P22 + P.P21 * Dm * right;

    Eigen::JacobiSVD<CMat> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
    CVec u = svd.matrixU().col(0), v = svd.matrixV().col(0);

    Vec grad(plant.m());
    for (int i = 0; i < plant.m(); ++i) {
        auto [at, len] = ctrldetail::block_range(plant.structure, i);
        CMat dT = leftT.transpose().middleCols(at, len) * right.middleRows(at, len);
        grad[i] = (u.dot(dT * v)).real();
    }
    return grad;
}

// Gradient at the peak frequency of the closed loop.
inline HinfGradient hinf_gradient(const LftPlant& plant, const Vec& delta, double tol = 1e-10) {
    StateSpace ss = close_loop(plant, delta);
    HinfResult h = hinf_norm(ss.A, ss.B, ss.C, ss.D, tol);
    HinfGradient out;
    out.value = h.value;
    out.omega_peak = h.omega_peak;
    out.gradient = hinf_frequency_gradient(plant, delta, h.omega_peak);
    return out;
}

// Frequencies whose local response maximum comes within rel_tol of the peak;
// ties here feed the standard model's active-gradient set.
inline std::vector<double> hinf_peak_frequencies(const StateSpace& ss, double rel_tol = 1e-8) {
    auto sigma = [&](double w) { return ctrldetail::sigma_at(ss.A, ss.B, ss.C, ss.D, w); };
    std::vector<double> grid{0.0};
    std::vector<double> vals{sigma(0.0)};
    for (int i = 0; i < 200; ++i) {
        double w = std::pow(10.0, -4.0 + 8.0 * i / 199.0);
        grid.push_back(w);
        vals.push_back(sigma(w));
    }
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    std::vector<std::pair<double, double>> peaks;  // (omega, sigma)
    for (std::size_t i = 0; i < grid.size(); ++i) {
        bool local_max = (i == 0 || vals[i] >= vals[i - 1]) &&
                         (i + 1 == grid.size() || vals[i] >= vals[i + 1]);
        if (!local_max) continue;
        double a = i == 0 ? 0.0 : grid[i - 1];
        double b = i + 1 == grid.size() ? grid[i] * 10 : grid[i + 1];
        double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        double f1 = sigma(c1), f2 = sigma(c2);
        for (int it = 0; it < 60 && (b - a) > 1e-10 * (1.0 + b); ++it) {
            if (f1 < f2) {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + gr * (b - a);
                f2 = sigma(c2);
            } else {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - gr * (b - a);
                f1 = sigma(c1);
            }
        }
        double w = 0.5 * (a + b);
        peaks.emplace_back(w, sigma(w));
    }
    double top = 0.0;
    for (auto& [w, s] : peaks) top = std::max(top, s);
    std::vector<double> out;
    for (auto& [w, s] : peaks) {
        if (s < top * (1.0 - rel_tol)) continue;
        bool dup = false;
        for (double o : out) dup |= std::abs(o - w) <= 1e-6 * (1.0 + w);
        if (!dup) out.push_back(w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Optimization problems over the normalized parameter box.
// ---------------------------------------------------------------------------

// Minimize a_-(delta) = -alpha(A(delta)) over [-1, 1]^m with the standard
// model; active eigenvalue ties feed the active-gradient set.
inline ProblemInstance worst_case_alpha_problem(const LftPlant& plant, Vec start = {}) {
    plant.validate();
    auto sp = std::make_shared<LftPlant>(plant);
    int m = plant.m();

    Oracle o;
    o.n = m;
    o.f = [sp](const Vec& d) { return -spectral_abscissa_value(closed_loop_A(*sp, d)); };
    o.subgrad = [sp](const Vec& d) { return Vec(-alpha_gradient(*sp, d).gradient); };
    o.active_gradients = [sp](const Vec& d) {
        auto ag = alpha_gradient(*sp, d);
        std::vector<Vec> out;
        for (auto& g : ag.active_grads) out.push_back(-g);
        return out;
    };

    ProblemInstance p;
    p.model = std::make_shared<StandardModel>(std::move(o));
    p.feasible = FeasibleSet::box(Vec::Constant(m, -1.0), Vec::Constant(m, 1.0));
    p.x0 = start.size() ? std::move(start) : Vec::Zero(m);
    p.name = "wc-alpha";
    return p;
}

// Minimize h_-(delta) = -||T_wz(delta)||_inf over [-1, 1]^m.
inline ProblemInstance worst_case_hinf_problem(const LftPlant& plant, Vec start = {}) {
    plant.validate();
    auto sp = std::make_shared<LftPlant>(plant);
    int m = plant.m();

    Oracle o;
    o.n = m;
    o.f = [sp](const Vec& d) {
        StateSpace ss = close_loop(*sp, d);
        return -hinf_norm(ss.A, ss.B, ss.C, ss.D).value;
    };
    o.subgrad = [sp](const Vec& d) { return Vec(-hinf_gradient(*sp, d).gradient); };
    o.active_gradients = [sp](const Vec& d) {
        std::vector<Vec> out;
        for (double w : hinf_peak_frequencies(close_loop(*sp, d)))
            out.push_back(-hinf_frequency_gradient(*sp, d, w));
        if (out.empty()) out.push_back(Vec(-hinf_gradient(*sp, d).gradient));
        return out;
    };

    ProblemInstance p;
    p.model = std::make_shared<StandardModel>(std::move(o));
    p.feasible = FeasibleSet::box(Vec::Constant(m, -1.0), Vec::Constant(m, 1.0));
    p.x0 = start.size() ? std::move(start) : Vec::Zero(m);
    p.name = "wc-hinf";
    return p;
}

// Exact-penalty program for the structured distance to instability: decision
// variable (t, delta) in C = {(t, delta): -t <= delta_i <= t}, objective
// t + c max{0, -alpha(A(delta))}.
inline ProblemInstance distance_to_instability_problem(const LftPlant& plant, double c) {
    plant.validate();
    if (!(c > 0)) throw std::invalid_argument("penalty constant must be positive");
    if (spectral_abscissa_value(plant.A) >= 0)
        throw UnstableSystem();
    auto sp = std::make_shared<LftPlant>(plant);
    int m = plant.m();

    Oracle inner;
    inner.n = m;
    inner.f = [sp](const Vec& d) { return -spectral_abscissa_value(closed_loop_A(*sp, d)); };
    inner.subgrad = [sp](const Vec& d) { return Vec(-alpha_gradient(*sp, d).gradient); };
    inner.active_gradients = [sp](const Vec& d) {
        auto ag = alpha_gradient(*sp, d);
        std::vector<Vec> out;
        for (auto& g : ag.active_grads) out.push_back(-g);
        return out;
    };
    auto inner_model = std::make_shared<StandardModel>(std::move(inner));

    ProblemInstance p;
    p.model = std::make_shared<PenaltyMaxModel>(inner_model, c);
    // rows: delta_i - t <= 0 and -delta_i - t <= 0
    Mat rows = Mat::Zero(2 * m, m + 1);
    for (int i = 0; i < m; ++i) {
        rows(2 * i, 0) = -1.0;
        rows(2 * i, i + 1) = 1.0;
        rows(2 * i + 1, 0) = -1.0;
        rows(2 * i + 1, i + 1) = -1.0;
    }
    p.feasible = FeasibleSet::polyhedron(rows, Vec::Zero(2 * m));
    p.x0 = Vec::Zero(m + 1);
    p.name = "distance";
    return p;
}

// Default penalty constant: 100 (1 + 1/|alpha(A(0))|).
inline double default_penalty_constant(const LftPlant& plant) {
    double a0 = spectral_abscissa_value(plant.A);
    if (a0 >= 0) throw UnstableSystem();
    return 100.0 * (1.0 + 1.0 / std::abs(a0));
}

}  // namespace nstr
