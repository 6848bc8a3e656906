#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <thread>
#include <vector>

#include "htype/geometry.hpp"
#include "htype/heatkernel.hpp"

namespace htype::potential {

using geometry::GroupSpec;
using geometry::RadialProfile;

struct PotentialParams {
    double C = 5.0;
    double t = 1.0;
};

enum class WMethod { radial_formula, zone_surrogate };

struct WEval {
    double value = 0.0;
    double abs_err = 0.0;
    WMethod method = WMethod::radial_formula;
};

namespace detail {

// W_{1,C} assembled from the reduced-kernel derivatives; the n/R and
// (m-1)/|z| terms are kept in their cancellation-free form
// (C/2)(R p20 + R p02 + n p10 + (m-1) R p01/|z|) / p00.
inline WEval w_unit_time(const RadialProfile& p, double C, const GroupSpec& spec) {
    const auto d = heatkernel::kernel_derivs_w(p, spec);
    if (!d.p00.converged || d.p00.value <= 0.0 ||
        d.p00.abs_err > 1e-4 * std::abs(d.p00.value)) {
        // deep-tail surrogate from the leading asymptotics
        const double d24 = geometry::sr_distance_sq(p) / 4.0;
        double w = (C - 4.0) * d24 / 4.0;
        if (p.R > 0 && p.zeta <= 3.0 * p.R) w -= spec.m * std::log(2.0 * std::sqrt(p.R));
        return {w, std::abs(w) * 0.5 + 1.0, WMethod::zone_surrogate};
    }
    const double q10 = d.p10.value / d.p00.value;
    const double q01 = d.p01.value / d.p00.value;
    const double q20 = d.p20.value / d.p00.value;
    const double q02 = d.p02.value / d.p00.value;
    const double center_term =
        spec.m > 1 ? (spec.m - 1) * p.R * d.p01_over_zeta.value / d.p00.value : 0.0;
    const double R = p.R;
    const double value = -R * C / 4.0 * (q10 * q10 + q01 * q01) +
                         C / 2.0 * (R * q20 + R * q02 + spec.n * q10 + center_term) +
                         d.p00.log_value();
    const double rel = (d.p00.abs_err + d.p10.abs_err + d.p20.abs_err + d.p02.abs_err) /
                       std::abs(d.p00.value);
    const double err = std::abs(C) * (1.0 + R) * (1.0 + std::abs(q10) + std::abs(q20)) * rel;
    return {value, err, WMethod::radial_formula};
}

}  // namespace detail

// W_{t,C} = (C/4)|grad xi_t|^2 + (C/2) Lap xi_t + xi_t with xi_t = log p_t,
// evaluated at t = 1 and transported by
// W_{t,C}(x,z) = W_{1,C/t}(x/sqrt t, z/t) - (n+m) log t.
inline WEval w_eval(const RadialProfile& p, PotentialParams params, const GroupSpec& spec) {
    if (!(params.C > 0) || !(params.t > 0))
        throw std::invalid_argument("w_eval: C and t must be > 0");
    const double t = params.t;
    if (t == 1.0) return detail::w_unit_time(p, params.C, spec);
    WEval w = detail::w_unit_time({p.R / t, p.zeta / t}, params.C / t, spec);
    w.value -= (spec.n + spec.m) * std::log(t);
    return w;
}

inline double w_potential(const RadialProfile& p, PotentialParams params, const GroupSpec& spec) {
    return w_eval(p, params, spec).value;
}

// --- divergence probe along an asymptotic ray --------------------------------

struct ProbeOptions {
    double R_min = 25.0;
    double R_max = 400.0;
    int points = 12;
    double omega = 0.0;  // ray |z| = omega R; default is the z = 0 ray
};

struct ProbeReport {
    std::vector<double> R;
    std::vector<double> W;
    double quad_coeff = 0.0;  // coefficient of d^2 in the fit (expect (C-4)/16)
    double log_coeff = 0.0;   // coefficient of log|x| (expect -m)
    double offset = 0.0;
    bool diverges = false;
};

// Samples W_{1,C} along the ray and fits W ~ a d^2/16 + b log|x| + c.
// The potential stays bounded below iff a > 0; at C = 4 the -m log|x| term
// still drags W to -infinity.
inline ProbeReport boundedness_probe(double C, const GroupSpec& spec, ProbeOptions opt = {}) {
    if (!(C > 0)) throw std::invalid_argument("boundedness_probe: C must be > 0");
    ProbeReport rep;
    const double ratio = std::pow(opt.R_max / opt.R_min, 1.0 / (opt.points - 1));
    double a11 = 0, a12 = 0, a13 = 0, a22 = 0, a23 = 0, a33 = 0, b1 = 0, b2 = 0, b3 = 0;
    for (int i = 0; i < opt.points; ++i) {
        const double R = opt.R_min * std::pow(ratio, i);
        const RadialProfile p{R, opt.omega * R};
        const double w = w_potential(p, {C, 1.0}, spec);
        rep.R.push_back(R);
        rep.W.push_back(w);
        const double v1 = geometry::sr_distance_sq(p) / 16.0;
        const double v2 = std::log(2.0 * std::sqrt(R));
        a11 += v1 * v1; a12 += v1 * v2; a13 += v1;
        a22 += v2 * v2; a23 += v2; a33 += 1.0;
        b1 += v1 * w; b2 += v2 * w; b3 += w;
    }
    // solve the 3x3 normal equations by Cramer's rule
    const double det = a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
                       a13 * (a12 * a23 - a22 * a13);
    const double lead = (b1 * (a22 * a33 - a23 * a23) - a12 * (b2 * a33 - a23 * b3) +
                         a13 * (b2 * a23 - a22 * b3)) /
                        det;
    const double logc = (a11 * (b2 * a33 - b3 * a23) - b1 * (a12 * a33 - a23 * a13) +
                         a13 * (a12 * b3 - b2 * a13)) /
                        det;
    const double cst = (a11 * (a22 * b3 - a23 * b2) - a12 * (a12 * b3 - b2 * a13) +
                        b1 * (a12 * a23 - a22 * a13)) /
                       det;
    rep.quad_coeff = lead / 16.0;
    rep.log_coeff = logc;
    rep.offset = cst;
    rep.diverges = lead <= 5e-3;
    return rep;
}

// --- global minimization of W_{1,theta} --------------------------------------

struct Box {
    double R_hi = 16.0;
    double zeta_hi = 16.0;
};

struct MinWOptions {
    int grid = 200;
    double refine_tol = 1e-6;
    double margin_target = 1.0;
    int max_grow = 3;
    int workers = 1;
};

struct MinWResult {
    double min_value = 0.0;
    RadialProfile argmin;
    Box box;
    int grid = 0;
    double tail_margin = 0.0;
    bool certified = false;
    double max_linear_part = 0.0;  // max over box of (W - xi)/C, cf. affinity in C
};

namespace detail {

// deterministic 2-D Nelder-Mead on the closed quadrant, reflecting at the axes
template <class F>
std::pair<std::array<double, 2>, double> nelder_mead(F&& f, std::array<double, 2> start,
                                                     double scale, double tol) {
    using P = std::array<double, 2>;
    auto clamp = [](P p) { return P{std::max(p[0], 0.0), std::max(p[1], 0.0)}; };
    std::array<P, 3> xs{clamp(start), clamp({start[0] + scale, start[1]}),
                        clamp({start[0], start[1] + scale})};
    std::array<double, 3> fs;
    for (int i = 0; i < 3; ++i) fs[i] = f(xs[i]);
    for (int it = 0; it < 300; ++it) {
        std::array<int, 3> ord{0, 1, 2};
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        const P &best = xs[ord[0]], &worst = xs[ord[2]];
        const double diam = std::max(std::abs(best[0] - worst[0]) + std::abs(xs[ord[1]][0] - worst[0]),
                                     std::abs(best[1] - worst[1]) + std::abs(xs[ord[1]][1] - worst[1]));
        if (diam < tol) break;
        const P cen{0.5 * (xs[ord[0]][0] + xs[ord[1]][0]), 0.5 * (xs[ord[0]][1] + xs[ord[1]][1])};
        auto along = [&](double c) {
            return clamp({cen[0] + c * (cen[0] - worst[0]), cen[1] + c * (cen[1] - worst[1])});
        };
        P xr = along(1.0);
        double fr = f(xr);
        if (fr < fs[ord[0]]) {
            P xe = along(2.0);
            double fe = f(xe);
            if (fe < fr) { xs[ord[2]] = xe; fs[ord[2]] = fe; }
            else { xs[ord[2]] = xr; fs[ord[2]] = fr; }
        } else if (fr < fs[ord[1]]) {
            xs[ord[2]] = xr; fs[ord[2]] = fr;
        } else {
            P xc = along(fr < fs[ord[2]] ? 0.5 : -0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fs[ord[2]])) { xs[ord[2]] = xc; fs[ord[2]] = fc; }
            else {  // shrink toward best
                for (int i : {ord[1], ord[2]}) {
                    xs[i] = clamp({0.5 * (xs[i][0] + best[0]), 0.5 * (xs[i][1] + best[1])});
                    fs[i] = f(xs[i]);
                }
            }
        }
    }
    int bi = 0;
    for (int i = 1; i < 3; ++i)
        if (fs[i] < fs[bi]) bi = i;
    return {xs[bi], fs[bi]};
}

}  // namespace detail

// Coarse grid over [0,R*]x[0,zeta*] (axes included, so the zeta -> 0 and
// R -> 0 limits participate), Nelder-Mead refinement from the best cells, and
// a heuristic tail certificate: W on the 1.5x and 2x box boundaries must
// exceed the interior minimum by margin_target and grow outward.
inline MinWResult min_w(double theta, const GroupSpec& spec, std::optional<Box> box_opt = {},
                        MinWOptions opt = {}) {
    if (!(theta > 4.0)) throw std::invalid_argument("min_w: theta must be > 4");
    Box box = box_opt.value_or(Box{});
    MinWResult res;
    auto W = [&](double R, double zeta) {
        return w_potential({std::max(R, 0.0), std::max(zeta, 0.0)}, {theta, 1.0}, spec);
    };

    for (int attempt = 0;; ++attempt) {
        const int N = opt.grid;
        std::vector<double> vals(static_cast<std::size_t>(N + 1) * (N + 1));
        auto run_rows = [&](int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                const double R = box.R_hi * i / N;
                for (int j = 0; j <= N; ++j)
                    vals[static_cast<std::size_t>(i) * (N + 1) + j] = W(R, box.zeta_hi * j / N);
            }
        };
        if (opt.workers > 1) {
            std::vector<std::thread> pool;
            const int rows = (N + 1 + opt.workers - 1) / opt.workers;
            for (int w = 0; w < opt.workers; ++w)
                pool.emplace_back(run_rows, w * rows, std::min(N + 1, (w + 1) * rows));
            for (auto& th : pool) th.join();
        } else {
            run_rows(0, N + 1);
        }

        double best = std::numeric_limits<double>::infinity();
        int bi = 0, bj = 0;
        double max_lin = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= N; ++i)
            for (int j = 0; j <= N; ++j) {
                const double v = vals[static_cast<std::size_t>(i) * (N + 1) + j];
                if (v < best) { best = v; bi = i; bj = j; }
            }
        // linear-in-C part (W - xi)/C at the grid scale, for affinity checks
        for (int i = 0; i <= N; i += 8)
            for (int j = 0; j <= N; j += 8) {
                const RadialProfile p{box.R_hi * i / N, box.zeta_hi * j / N};
                const auto ke = heatkernel::kernel_derivs_w(p, spec).p00;
                if (ke.value > 0) {
                    const double g =
                        (vals[static_cast<std::size_t>(i) * (N + 1) + j] - ke.log_value()) / theta;
                    max_lin = std::max(max_lin, g);
                }
            }

        auto [argmin, fmin] = detail::nelder_mead(
            [&](std::array<double, 2> p) { return W(p[0], p[1]); },
            {box.R_hi * bi / N, box.zeta_hi * bj / N}, 1.5 * box.R_hi / N, opt.refine_tol);

        res.min_value = fmin;
        res.argmin = {argmin[0], argmin[1]};
        res.box = box;
        res.grid = N;
        res.max_linear_part = max_lin;

        // ring certificate
        double ring_min = std::numeric_limits<double>::infinity();
        bool monotone = true;
        const int ring_pts = 25;
        for (int k = 0; k <= ring_pts; ++k) {
            const double s = static_cast<double>(k) / ring_pts;
            for (const double f : {1.5, 2.0}) {
                ring_min = std::min(ring_min, W(f * box.R_hi, s * f * box.zeta_hi));
                ring_min = std::min(ring_min, W(s * f * box.R_hi, f * box.zeta_hi));
            }
            monotone = monotone &&
                       W(2.0 * box.R_hi, s * 2.0 * box.zeta_hi) >=
                           W(1.5 * box.R_hi, s * 1.5 * box.zeta_hi) - 1e-9 &&
                       W(s * 2.0 * box.R_hi, 2.0 * box.zeta_hi) >=
                           W(s * 1.5 * box.R_hi, 1.5 * box.zeta_hi) - 1e-9;
        }
        res.tail_margin = ring_min - res.min_value;
        res.certified = res.tail_margin >= opt.margin_target && monotone;
        if (res.certified || attempt >= opt.max_grow) return res;
        box.R_hi *= 1.6;
        box.zeta_hi *= 1.6;
    }
}

}  // namespace htype::potential
