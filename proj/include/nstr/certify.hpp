#pragma once

// Monte-Carlo / quadrature certification of global maxima: the integral
// global-optimization iteration (mean of f over its superlevel set), a dense
// grid oracle for small dimensions, and the distance-to-instability decision
// test on under- and over-scaled parameter boxes.

#include "nstr/control.hpp"
#include "nstr/core.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace nstr {

// ---------------------------------------------------------------------------
// Counter-based pseudo-random stream: sample i of a seeded stream is a pure
// function of (seed, i), so parallel sampling is reproducible independent of
// scheduling.
// ---------------------------------------------------------------------------

namespace rngdetail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace rngdetail

struct CounterRng {
    std::uint64_t seed = 0;

    // uniform double in [0, 1)
    double uniform(std::uint64_t index) const {
        std::uint64_t z = rngdetail::splitmix64(seed * 0x9E3779B97F4A7C15ull + index + 1);
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }
};

struct BoxDomain {
    Vec lower, upper;
    int dim() const { return static_cast<int>(lower.size()); }
};

// ---------------------------------------------------------------------------
// Zheng iteration.
// ---------------------------------------------------------------------------

enum class ZhengMode { MonteCarlo, Quadrature1d };

struct ZhengResult {
    double alpha_star = -kInf;
    Vec argbest;
    int iterations = 0;
    std::vector<double> levels;       // alpha after each sweep
    std::vector<double> std_errors;   // standard error of each sweep's mean
    bool empty_superlevel = false;    // stopped because no sample survived
};

struct ZhengOptions {
    int samples_per_dim = 2000;   // Monte-Carlo samples per sweep = this * m
    double var_tol = 1e-7;        // stop when the superlevel sample variance drops below
    std::uint64_t seed = 42;
    ZhengMode mode = ZhengMode::MonteCarlo;
    int max_sweeps = 200;
    int threads = 1;
    double alpha0 = -kInf;        // initial level; default: mean of the first batch
};

namespace zhengdetail {

// Fixed-size blocks keep floating-point reductions identical for every
// thread count.
constexpr int kBlock = 4096;

struct Sample {
    Vec x;
    double value = -kInf;
};

struct BlockStats {
    double sum = 0.0, sumsq = 0.0;
    int kept = 0;
    Sample best;
    std::vector<Sample> survivors;
};

template <typename F>
inline void sweep_blocks(const F& f, const CounterRng& rng, std::uint64_t index0, int total,
                         const BoxDomain& box, double level, int threads,
                         std::vector<BlockStats>& stats) {
    const int m = box.dim();
    const int nblocks = (total + kBlock - 1) / kBlock;
    stats.assign(nblocks, {});

    auto run_block = [&](int bidx) {
        BlockStats s;
        int begin = bidx * kBlock, end = std::min(total, begin + kBlock);
        for (int i = begin; i < end; ++i) {
            Vec x(m);
            for (int d = 0; d < m; ++d) {
                double u = rng.uniform(index0 + static_cast<std::uint64_t>(i) * m + d);
                x[d] = box.lower[d] + u * (box.upper[d] - box.lower[d]);
            }
            double v = f(x);
            if (v > s.best.value) s.best = {x, v};
            if (v >= level) {
                s.sum += v;
                s.sumsq += v * v;
                ++s.kept;
                s.survivors.push_back({std::move(x), v});
            }
        }
        stats[bidx] = std::move(s);
    };

    if (threads <= 1) {
        for (int b = 0; b < nblocks; ++b) run_block(b);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        int nt = std::min(threads, nblocks);
        pool.reserve(nt);
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&] {
                for (int b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) run_block(b);
            });
        for (auto& th : pool) th.join();
    }
}

}  // namespace zhengdetail

// Maximizes f over a box by iterating alpha <- mean of f over [f >= alpha].
// Monte-Carlo mode draws samples_per_dim * m points per sweep from the
// bounding box of the surviving superlevel-set sample (10% margin, clipped to
// the original box) and keeps the survivors across sweeps; the level sequence
// is nondecreasing by construction.
template <typename F>
inline ZhengResult zheng_maximize(const F& f, const BoxDomain& box, const ZhengOptions& opt = {}) {
    const int m = box.dim();
    ZhengResult res;

    if (opt.mode == ZhengMode::Quadrature1d) {
        if (m != 1) throw std::invalid_argument("quadrature mode needs a 1-d box");
        auto f1 = [&](double x) {
            Vec v(1);
            v[0] = x;
            return f(v);
        };
        double lo = box.lower[0], hi = box.upper[0];
        double alpha = opt.alpha0;
        if (!std::isfinite(alpha)) {
            alpha = kInf;
            for (int i = 0; i <= 64; ++i) alpha = std::min(alpha, f1(lo + (hi - lo) * i / 64.0));
        }
        double argbest = lo;
        double best = -kInf;
        // scan grid for the superlevel set, refine boundaries by bisection,
        // integrate each segment with adaptive Simpson
        const int scan = 4096;
        for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
            double num = 0.0, den = 0.0;
            auto simpson = [&](auto&& self, double a, double b, double fa, double fm, double fb,
                               int depth) -> double {
                double mid = 0.5 * (a + b);
                double lm = 0.5 * (a + mid), rm = 0.5 * (mid + b);
                double flm = f1(lm), frm = f1(rm);
                double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
                double left = (mid - a) / 6.0 * (fa + 4 * flm + fm);
                double right = (b - mid) / 6.0 * (fm + 4 * frm + fb);
                if (depth > 24 || std::abs(left + right - whole) < 1e-13 * (1 + std::abs(whole)))
                    return left + right;
                return self(self, a, mid, fa, flm, fm, depth + 1) +
                       self(self, mid, b, fm, frm, fb, depth + 1);
            };
            double prev_x = lo, prev_v = f1(lo);
            bool inside = prev_v >= alpha;
            double seg_start = inside ? lo : 0.0;
            auto close_segment = [&](double a, double b) {
                double fa = f1(a), fb = f1(b), fm = f1(0.5 * (a + b));
                num += simpson(simpson, a, b, fa, fm, fb, 0);
                den += b - a;
            };
            for (int i = 1; i <= scan; ++i) {
                double x = lo + (hi - lo) * i / scan;
                double v = f1(x);
                if (v > best) {
                    best = v;
                    argbest = x;
                }
                bool now = v >= alpha;
                if (now != inside) {
                    // bisect the crossing
                    double a = prev_x, b = x;
                    for (int it = 0; it < 80 && (b - a) > 1e-14 * (hi - lo); ++it) {
                        double c = 0.5 * (a + b);
                        if ((f1(c) >= alpha) == inside)
                            a = c;
                        else
                            b = c;
                    }
                    double cross = 0.5 * (a + b);
                    if (inside)
                        close_segment(seg_start, cross);
                    else
                        seg_start = cross;
                    inside = now;
                }
                prev_x = x;
                prev_v = v;
            }
            if (inside) close_segment(seg_start, hi);
            ++res.iterations;
            if (den <= 0) {
                res.empty_superlevel = true;
                break;
            }
            double next = num / den;
            res.levels.push_back(next);
            res.std_errors.push_back(0.0);
            if (std::abs(next - alpha) < 1e-12 * (1.0 + std::abs(next)) && sweep > 0) {
                alpha = next;
                break;
            }
            alpha = next;
        }
        res.alpha_star = alpha;
        res.argbest = Vec::Constant(1, argbest);
        return res;
    }

    // Monte-Carlo mode
    const int total = std::max(1, opt.samples_per_dim * m);
    CounterRng rng{opt.seed};
    std::vector<zhengdetail::Sample> pool;
    double alpha = opt.alpha0;
    zhengdetail::Sample best;
    std::uint64_t index0 = 0;

    BoxDomain sample_box = box;
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        std::vector<zhengdetail::BlockStats> stats;
        double level = std::isfinite(alpha) ? alpha : -kInf;
        zhengdetail::sweep_blocks(f, rng, index0, total, sample_box, level, opt.threads, stats);
        index0 += static_cast<std::uint64_t>(total) * m;

        double sum = 0.0, sumsq = 0.0;
        int kept = 0;
        std::size_t old_count = pool.size();
        for (auto& s : stats) {
            sum += s.sum;
            sumsq += s.sumsq;
            kept += s.kept;
            if (s.best.value > best.value) best = s.best;
            for (auto& smp : s.survivors) pool.push_back(std::move(smp));
        }
        // carried survivors still sit at or above the old level
        for (std::size_t i = 0; i < old_count; ++i) {
            sum += pool[i].value;
            sumsq += pool[i].value * pool[i].value;
            ++kept;
        }
        ++res.iterations;
        if (kept == 0) {
            res.empty_superlevel = true;
            break;
        }
        double mean = sum / kept;
        double var = std::max(0.0, sumsq / kept - mean * mean);
        res.levels.push_back(mean);
        res.std_errors.push_back(std::sqrt(var / kept));
        alpha = std::isfinite(level) ? std::max(level, mean) : mean;

        // drop pool members below the new level, then shrink the sampling
        // region to the surviving sample's bounding box
        std::vector<zhengdetail::Sample> keep;
        for (auto& s : pool)
            if (s.value >= alpha) keep.push_back(std::move(s));
        pool = std::move(keep);

        if (!pool.empty()) {
            Vec lo = pool.front().x, hi = pool.front().x;
            for (const auto& s : pool) {
                lo = lo.cwiseMin(s.x);
                hi = hi.cwiseMax(s.x);
            }
            Vec width = (hi - lo).cwiseMax(1e-12 * (box.upper - box.lower));
            sample_box.lower = (lo - 0.1 * width).cwiseMax(box.lower);
            sample_box.upper = (hi + 0.1 * width).cwiseMin(box.upper);
        }

        if (var < opt.var_tol && sweep > 0) break;
    }
    // the level climbs toward the maximum from below; the best sample seen is
    // a certified point value at least as tight
    res.alpha_star = std::isfinite(alpha) ? alpha : -kInf;
    if (best.value > -kInf) res.alpha_star = std::max(res.alpha_star, best.value);
    res.argbest = best.x.size() ? best.x : Vec::Zero(m);
    return res;
}

// ---------------------------------------------------------------------------
// Dense grid oracle (m <= 3).
// ---------------------------------------------------------------------------

struct GridResult {
    double max_value = -kInf;
    Vec argmax;
};

template <typename F>
inline GridResult grid_certify(const F& f, const BoxDomain& box, double step) {
    const int m = box.dim();
    if (m > 3) throw std::invalid_argument("grid_certify: dimension exceeds the cost guard");
    if (!(step > 0)) throw std::invalid_argument("grid_certify: step must be positive");

    std::vector<std::vector<double>> axes(m);
    for (int d = 0; d < m; ++d) {
        double lo = box.lower[d], hi = box.upper[d];
        int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
        for (int i = 0; i <= count; ++i) axes[d].push_back(lo + i * step);
        if (axes[d].back() < hi - 1e-12 * (1 + std::abs(hi)))
            axes[d].push_back(hi);  // corners always included
        else
            axes[d].back() = hi;
    }
    GridResult res;
    res.argmax = Vec::Zero(m);
    std::vector<std::size_t> idx(m, 0);
    Vec x(m);
    while (true) {
        for (int d = 0; d < m; ++d) x[d] = axes[d][idx[d]];
        double v = f(x);
        if (v > res.max_value) {
            res.max_value = v;
            res.argmax = x;
        }
        int d = 0;
        while (d < m && ++idx[d] == axes[d].size()) idx[d++] = 0;
        if (d == m) break;
    }
    return res;
}

// Two-stage grid: coarse pass, then refinement around the coarse argmax.
template <typename F>
inline GridResult grid_certify_refined(const F& f, const BoxDomain& box, double coarse,
                                       double fine) {
    GridResult g = grid_certify(f, box, coarse);
    BoxDomain local;
    local.lower = (g.argmax.array() - coarse).matrix().cwiseMax(box.lower);
    local.upper = (g.argmax.array() + coarse).matrix().cwiseMin(box.upper);
    GridResult r = grid_certify(f, local, fine);
    return r.max_value >= g.max_value ? r : g;
}

// ---------------------------------------------------------------------------
// Distance-to-instability decision test: evaluate the worst-case spectral
// abscissa on the under- and over-scaled boxes (1 -+ gamma) d* and certify
// when the under box stays stable while the over box does not.
// ---------------------------------------------------------------------------

enum class StabilityDecision { Certified, RefutedUnder, RefutedOver };

inline const char* to_string(StabilityDecision d) {
    switch (d) {
        case StabilityDecision::Certified: return "certified";
        case StabilityDecision::RefutedUnder: return "refuted(under)";
        case StabilityDecision::RefutedOver: return "refuted(over)";
    }
    return "unknown";
}

struct StabilityDecisionResult {
    StabilityDecision decision = StabilityDecision::Certified;
    double alpha_under = 0.0;
    double alpha_over = 0.0;
};

inline StabilityDecisionResult stability_decision(const LftPlant& plant, double d_star,
                                                  double gamma_conf = 0.05,
                                                  ZhengOptions opt = {}) {
    if (!(d_star > 0)) throw std::invalid_argument("stability_decision: d* must be positive");
    auto alpha_of = [&](const Vec& d) { return spectral_abscissa_value(closed_loop_A(plant, d)); };
    int m = plant.m();

    auto run = [&](double scale) {
        BoxDomain box{Vec::Constant(m, -scale), Vec::Constant(m, scale)};
        return zheng_maximize(alpha_of, box, opt).alpha_star;
    };
    StabilityDecisionResult res;
    res.alpha_under = run((1.0 - gamma_conf) * d_star);
    res.alpha_over = run((1.0 + gamma_conf) * d_star);
    if (res.alpha_under >= 0)
        res.decision = StabilityDecision::RefutedUnder;
    else if (res.alpha_over <= 0)
        res.decision = StabilityDecision::RefutedOver;
    else
        res.decision = StabilityDecision::Certified;
    return res;
}

}  // namespace nstr
