#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "htype/common.hpp"

namespace htype::quad {

// Gauss(7)/Kronrod(15) pair. Nodes/weights are the standard QUADPACK values.
inline constexpr std::array<double, 8> gk_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Options {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

template <class V>
struct Estimate {
    V value{};
    double abs_err = std::numeric_limits<double>::infinity();
    double resabs = 0.0;  // integral of |f|, for cancellation diagnostics
    std::size_t evals = 0;
    bool converged = false;
};

namespace detail {

template <class V, class F>
void gk15(F&& f, double a, double b, V& result, double& err, double& resabs,
          std::size_t& evals) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    V fc = f(c);
    V kron = fc * kronrod_weights[7];
    V gauss = fc * gauss_weights[3];
    double rabs = vnorm(fc) * kronrod_weights[7];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * gk_nodes[i];
        V f1 = f(c - dx), f2 = f(c + dx);
        V s = f1 + f2;
        kron += s * kronrod_weights[i];
        if (i % 2 == 1) gauss += s * gauss_weights[i / 2];
        rabs += (vnorm(f1) + vnorm(f2)) * kronrod_weights[i];
    }
    result = kron * h;
    resabs = rabs * std::abs(h);
    evals += 15;
    const double diff = vnorm(kron - gauss) * std::abs(h);
    // QUADPACK-style sharpening of the raw G-K difference
    err = (diff > 0 && resabs > 0)
              ? std::min(diff, 200.0 * diff * std::sqrt(std::min(1.0, 200.0 * diff / resabs)))
              : diff;
}

}  // namespace detail

// Globally adaptive G7/K15 on [a,b]; splits the worst interval until the
// summed error estimate meets tol or the interval budget runs out.
template <class V, class F>
Estimate<V> integrate(F&& f, double a, double b, const Options& opt = {}) {
    struct Interval {
        double a, b, err, resabs;
        V val;
    };
    Estimate<V> out;
    if (a == b) {
        out.abs_err = 0.0;
        out.converged = true;
        return out;
    }
    std::vector<Interval> heap;
    auto cmp = [](const Interval& x, const Interval& y) { return x.err < y.err; };
    Interval first{a, b, 0, 0, V{}};
    detail::gk15(f, a, b, first.val, first.err, first.resabs, out.evals);
    heap.push_back(first);
    double total_err = first.err;
    V total_val = first.val;
    double total_abs = first.resabs;
    int n_int = 1;
    while (total_err > std::max(opt.abs_tol, opt.rel_tol * vnorm(total_val)) &&
           n_int < opt.max_intervals) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        Interval worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval at machine resolution
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), cmp);
            break;
        }
        Interval left{worst.a, mid, 0, 0, V{}}, right{mid, worst.b, 0, 0, V{}};
        detail::gk15(f, left.a, left.b, left.val, left.err, left.resabs, out.evals);
        detail::gk15(f, right.a, right.b, right.val, right.err, right.resabs, out.evals);
        total_err += left.err + right.err - worst.err;
        total_val += left.val + right.val - worst.val;
        total_abs += left.resabs + right.resabs - worst.resabs;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), cmp);
        ++n_int;
    }
    // recompute sums from the partition to avoid drift
    total_err = 0;
    total_val = V{};
    total_abs = 0;
    for (const auto& iv : heap) {
        total_err += iv.err;
        total_val += iv.val;
        total_abs += iv.resabs;
    }
    out.value = total_val;
    out.resabs = total_abs;
    out.abs_err = total_err + 50.0 * std::numeric_limits<double>::epsilon() * total_abs;
    out.converged =
        total_err <= std::max(opt.abs_tol, opt.rel_tol * vnorm(total_val)) * 1.0001;
    return out;
}

// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration on the
// three-term recurrence.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(pi * (i + 0.75) / (n + 0.5));
        double p1 = 0, dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

// Integrate over [edges[0], inf): fixed panels through the given edges, then
// geometric extension until two consecutive panels are negligible.
template <class V, class F>
Estimate<V> integrate_panels(F&& f, std::vector<double> edges, const Options& opt = {},
                             double growth = 1.6, int max_panels = 4000) {
    Estimate<V> out;
    out.abs_err = 0.0;
    out.converged = true;
    if (edges.size() < 2) edges.push_back(edges.empty() ? 0.0 : edges.back() + 1.0);
    Options panel_opt = opt;
    int quiet = 0;
    double a = edges[0];
    std::size_t next = 1;
    double width = edges.back() - edges[edges.size() - 2];
    for (int p = 0; p < max_panels; ++p) {
        double b = (next < edges.size()) ? edges[next++] : a + (width *= growth);
        panel_opt.abs_tol = std::max(opt.abs_tol, opt.rel_tol * vnorm(out.value)) * 0.05;
        auto est = integrate<V>(f, a, b, panel_opt);
        out.value += est.value;
        out.abs_err += est.abs_err;
        out.resabs += est.resabs;
        out.evals += est.evals;
        out.converged = out.converged && est.converged;
        if (next >= edges.size()) {
            const double sig = std::max(opt.abs_tol, opt.rel_tol * vnorm(out.value));
            quiet = (vnorm(est.value) + est.resabs * 1e-3 < 0.01 * sig) ? quiet + 1 : 0;
            if (quiet >= 2) break;
        }
        a = b;
    }
    out.abs_err += 50.0 * std::numeric_limits<double>::epsilon() * out.resabs;
    return out;
}

}  // namespace htype::quad
