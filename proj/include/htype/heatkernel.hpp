#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include "htype/common.hpp"
#include "htype/geometry.hpp"
#include "htype/quadrature.hpp"
#include "htype/specialfn.hpp"

namespace htype::heatkernel {

using geometry::GroupSpec;
using geometry::RadialProfile;

struct DerivOrder {
    int k1 = 0;
    int k2 = 0;
};

enum class Method { reduced_1d, contour_shift, finite_difference_fallback };

// Kernel (or derivative) value as mantissa * exp(log_scale). Deep-tail values
// fall far below DBL_MIN, so ratios and logs must go through the scale field.
struct KernelEval {
    double value = 0.0;
    double log_scale = 0.0;
    double abs_err = 0.0;  // on the mantissa
    Method method = Method::reduced_1d;
    bool converged = false;

    double scaled_value() const { return value * std::exp(log_scale); }
    double log_value() const { return std::log(value) + log_scale; }
};

inline double eval_ratio(const KernelEval& a, const KernelEval& b) {
    return a.value / b.value * std::exp(a.log_scale - b.log_scale);
}

namespace detail {

inline double front_const(int n, int m) {
    // 2 pi^{m/2} / ((4 pi)^n (2 pi)^m Gamma(m/2))
    return 2.0 * std::pow(pi, 0.5 * m) /
           (std::pow(4.0 * pi, n) * std::pow(2.0 * pi, m) * std::tgamma(0.5 * m));
}

inline double rcoth(double r) {
    if (std::abs(r) < 1e-8) return 1.0 + r * r / 3.0;
    return r / std::tanh(r);
}

// (r / sinh r)^n, = exp(n log(r/sinh r)); 1 at r = 0
inline double rsinh_pow(double r, int n) {
    r = std::abs(r);
    if (r < 1e-8) return 1.0 - n * r * r / 6.0;
    if (r > 30.0) return std::exp(n * (std::log(2.0 * r) - r + std::log1p(-std::exp(-2.0 * r))));
    return std::pow(r / std::sinh(r), n);
}

// d^{k2}/dzeta^{k2} e_nu(r zeta) = sum c * r^{2j} * zeta^a * e_{nu+j}(r zeta)
struct ZTerm {
    double c;
    int a;
    int j;
};

inline std::vector<ZTerm> zderiv_terms(int k2, double nu) {
    std::vector<ZTerm> terms{{1.0, 0, 0}};
    for (int step = 0; step < k2; ++step) {
        std::map<std::pair<int, int>, double> next;
        for (const auto& t : terms) {
            if (t.a > 0) next[{t.a - 1, t.j}] += t.c * t.a;
            next[{t.a + 1, t.j + 1}] -= t.c / (2.0 * (nu + t.j + 1.0));
        }
        terms.clear();
        for (const auto& [key, c] : next)
            if (std::abs(c) > 0) terms.push_back({c, key.first, key.second});
    }
    return terms;
}

// ---------------------------------------------------------------------------
// real-axis path: h_{k1,k2}(R, zeta) scaled by e^{R}; valid for any m, but the
// oscillatory cancellation limits it to moderate d^2/4 - R.

constexpr std::size_t max_comp = 16;

struct OrderSpec {
    int k1;
    int k2;
    bool over_zeta = false;  // evaluate (d/dzeta h)/zeta instead of the derivative itself
};

struct MultiEval {
    std::array<KernelEval, max_comp> comp{};
    std::size_t count = 0;
};

template <class F>
quad::Estimate<Vec<max_comp>> half_line_quad(F&& f, const std::vector<double>& seeds,
                                             double osc_period, double start_tail,
                                             const quad::Options& opt) {
    std::vector<double> edges{0.0};
    for (double s : seeds)
        if (s > 0 && std::isfinite(s)) edges.push_back(s);
    const double step = std::min(0.5, 0.45 * osc_period);
    for (double r = step; r < start_tail; r += step) edges.push_back(r);
    edges.push_back(start_tail);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return quad::integrate_panels<Vec<max_comp>>(f, edges, opt, 1.25);
}

inline MultiEval eval_real_axis(int n, int m, double R, double zeta,
                                const std::vector<OrderSpec>& orders, double abs_tol) {
    const double nu = 0.5 * m - 1.0;
    std::vector<std::vector<ZTerm>> terms;
    terms.reserve(orders.size());
    for (const auto& o : orders) {
        auto t = zderiv_terms(o.k2, nu);
        if (o.over_zeta)
            for (auto& tt : t) {
                if (tt.a < 1) throw std::logic_error("over_zeta: derivative has no zeta factor");
                --tt.a;
            }
        terms.push_back(std::move(t));
    }

    auto integrand = [&](double r) {
        Vec<max_comp> out{};
        const double base = std::exp(-R * (rcoth(r) - 1.0)) * rsinh_pow(r, n) *
                            (m > 1 ? std::pow(r, m - 1) : 1.0);
        if (base == 0.0) return out;
        const double mrc = -rcoth(r);
        for (std::size_t i = 0; i < orders.size(); ++i) {
            double mult = 1.0;
            for (int q = 0; q < orders[i].k1; ++q) mult *= mrc;
            double tsum = 0.0;
            for (const auto& t : terms[i]) {
                double v = t.c * std::pow(r, 2 * t.j) *
                           specialfn::sphere_kernel_ord(nu + t.j, r * zeta);
                for (int q = 0; q < t.a; ++q) v *= zeta;
                tsum += v;
            }
            out[i] = base * mult * tsum;
        }
        return out;
    };

    const double s_peak = 1.0 / std::sqrt(1.0 + R);
    quad::Options opt;
    opt.abs_tol = abs_tol;
    opt.rel_tol = 1e-12;
    auto est = half_line_quad(integrand, {0.25 * s_peak, 0.5 * s_peak, s_peak, 2.0 * s_peak},
                              zeta > 0 ? pi / zeta : 1.0, std::max(4.0, 3.0 * s_peak), opt);

    const double A = front_const(n, m);
    MultiEval out;
    out.count = orders.size();
    for (std::size_t i = 0; i < orders.size(); ++i) {
        out.comp[i].value = A * est.value[i];
        out.comp[i].log_scale = -R;
        out.comp[i].abs_err = A * est.abs_err;
        out.comp[i].method = Method::reduced_1d;
        out.comp[i].converged = est.converged;
    }
    return out;
}

// ---------------------------------------------------------------------------
// contour-shifted path (odd m): shift the line integral to Im w = y through
// the saddle of the phase; the factor e^{-zeta y - R y cot y} (= e^{-d^2/4}
// at y = y_omega) is carried in log_scale, so the quadrature only ever sees
// O(1) mantissas. Requires the trig split of the half-integer-order kernels:
// e_{l+1/2}(u) = (2l+1)!! j_l(u) / u^l with j_l = S(1/u) sin + C(1/u) cos.

struct TrigPiece {
    double coef;
    int inv_pow;  // power of 1/u
    bool is_sin;
};

inline std::vector<TrigPiece> half_kernel_pieces(int l) {
    if (l == -1) return {{1.0, 0, false}};  // cos u
    // j_l via the recurrence on coefficient arrays
    std::vector<double> S{1.0}, C;  // j_0 = (1/u) sin u, arrays indexed by power-1
    std::vector<double> Sm, Cm;     // j_{-1} = (1/u) cos u
    Cm = {1.0};
    auto lift = [](const std::vector<double>& a, int shift, double mul,
                   const std::vector<double>& b, double mulb) {
        std::vector<double> out(std::max(a.size() + shift, b.size()), 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) out[i + shift] += mul * a[i];
        for (std::size_t i = 0; i < b.size(); ++i) out[i] += mulb * b[i];
        return out;
    };
    for (int k = 0; k < l; ++k) {
        auto Sn = lift(S, 1, 2.0 * k + 1.0, Sm, -1.0);
        auto Cn = lift(C, 1, 2.0 * k + 1.0, Cm, -1.0);
        Sm = std::move(S);
        Cm = std::move(C);
        S = std::move(Sn);
        C = std::move(Cn);
    }
    double dfac = 1.0;
    for (int k = 1; k <= 2 * l + 1; k += 2) dfac *= k;
    std::vector<TrigPiece> out;
    for (std::size_t i = 0; i < S.size(); ++i)
        if (S[i] != 0.0) out.push_back({dfac * S[i], static_cast<int>(i + 1 + l), true});
    for (std::size_t i = 0; i < C.size(); ++i)
        if (C[i] != 0.0) out.push_back({dfac * C[i], static_cast<int>(i + 1 + l), false});
    return out;
}

struct ContourComponent {
    int k1;
    int rpow;
    bool is_sin;
};

inline MultiEval eval_contour(int n, int m, double R, double zeta,
                              const std::vector<OrderSpec>& orders, double abs_tol) {
    const double nu = 0.5 * m - 1.0;

    double y, gap;
    if (R > 0) {
        const auto ti = specialfn::theta_inv(zeta / R);
        y = ti.y;
        gap = ti.gap;
    } else {
        gap = std::min(0.5, 3.0 / zeta);
        y = pi - gap;
    }
    const double sin_y = (y < 0.5 * pi) ? std::sin(y) : std::sin(gap);
    const double cos_y = (y < 0.5 * pi) ? std::cos(y) : -std::cos(gap);
    const double ycoty = y * cos_y / sin_y;
    const double log_scale = -zeta * y - R * ycoty;

    // assemble trig pieces per requested order; gather distinct components
    std::vector<ContourComponent> comps;
    std::vector<std::vector<std::pair<double, std::size_t>>> assembly(orders.size());
    auto comp_index = [&](int k1, int rpow, bool is_sin) -> std::size_t {
        for (std::size_t i = 0; i < comps.size(); ++i)
            if (comps[i].k1 == k1 && comps[i].rpow == rpow && comps[i].is_sin == is_sin)
                return i;
        comps.push_back({k1, rpow, is_sin});
        if (comps.size() > max_comp) throw std::logic_error("contour: component capacity");
        return comps.size() - 1;
    };
    for (std::size_t i = 0; i < orders.size(); ++i) {
        auto terms = zderiv_terms(orders[i].k2, nu);
        if (orders[i].over_zeta)
            for (auto& t : terms) --t.a;
        for (const auto& t : terms) {
            const int l = (m - 3) / 2 + t.j;  // e_{nu+j} = e_{l+1/2}
            for (const auto& piece : half_kernel_pieces(l)) {
                const int rpow = (m - 1) + 2 * t.j - piece.inv_pow;
                if (rpow < 0) throw std::logic_error("contour: negative r power");
                double coef = t.c * piece.coef * std::pow(zeta, t.a - piece.inv_pow);
                if (coef == 0.0) continue;
                assembly[i].push_back({0.5 * coef, comp_index(orders[i].k1, rpow, piece.is_sin)});
            }
        }
    }

    using cplx = std::complex<double>;
    const cplx iy(0.0, y);
    auto integrand = [&](double s) {
        Vec<max_comp> out{};
        const cplx w(s, y);
        const cplx sh = std::sinh(w);
        const cplx wcoth = w * std::cosh(w) / sh;
        // exp(-R (w coth w - y cot y) + i zeta s); |.| <= 1 on the contour
        const cplx ex = std::exp(-R * (wcoth - ycoty) + cplx(0.0, zeta * s));
        cplx ws = w / sh;
        cplx wsn = 1.0;
        for (int q = 0; q < n; ++q) wsn *= ws;
        const cplx base = ex * wsn;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            cplx v = base;
            for (int q = 0; q < comps[c].k1; ++q) v *= -wcoth;
            for (int q = 0; q < comps[c].rpow; ++q) v *= w;
            out[c] = 2.0 * (comps[c].is_sin ? v.imag() : v.real());
        }
        return out;
    };

    const double tp = (gap < 0.5) ? 2.0 * (sin_y + (pi - gap) * std::cos(gap)) / (sin_y * sin_y * sin_y)
                                  : specialfn::theta_prime(y);
    const double sigma = 1.0 / std::sqrt(std::max(R * tp, 1.0));
    std::vector<double> seeds;
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        seeds.push_back(f * sigma);
        if (gap < 0.5) seeds.push_back(f * gap);
    }
    quad::Options opt;
    opt.abs_tol = abs_tol;
    opt.rel_tol = 1e-12;
    auto est = half_line_quad(integrand, seeds, zeta > 0 ? 2.0 * pi / zeta : 1.0,
                              std::max(2.0, 8.0 * sigma), opt);

    const double A = front_const(n, m);
    MultiEval out;
    out.count = orders.size();
    for (std::size_t i = 0; i < orders.size(); ++i) {
        double v = 0.0, e = 0.0;
        for (const auto& [coef, ci] : assembly[i]) {
            v += coef * est.value[ci];
            e += std::abs(coef) * est.abs_err;
        }
        out.comp[i].value = A * v;
        out.comp[i].log_scale = log_scale;
        out.comp[i].abs_err = A * e;
        out.comp[i].method = Method::contour_shift;
        out.comp[i].converged = est.converged;
    }
    return out;
}

inline MultiEval eval_orders(int n, int m, double R, double zeta,
                             const std::vector<OrderSpec>& orders, double abs_tol = 1e-14) {
    if (n < 1 || m < 1) throw std::invalid_argument("kernel: n, m must be >= 1");
    if (R < 0 || zeta < 0 || !std::isfinite(R) || !std::isfinite(zeta))
        throw std::invalid_argument("kernel: profile must be finite and nonnegative");
    const double loss = geometry::sr_distance_sq({R, zeta}) / 4.0 - R;  // cancellation exponent
    if (zeta > 0 && m % 2 == 1 && loss > 12.0) return eval_contour(n, m, R, zeta, orders, abs_tol);
    return eval_real_axis(n, m, R, zeta, orders, abs_tol);
}

}  // namespace detail

// p_{1,k1,k2}: partial derivative d_1^{k1} d_2^{k2} h(R, zeta) of the reduced
// kernel at t = 1. Odd k2 vanishes at zeta = 0 by even symmetry.
inline KernelEval kernel_deriv(const RadialProfile& p, DerivOrder order, const GroupSpec& spec,
                               double abs_tol = 1e-14) {
    if (order.k1 < 0 || order.k2 < 0 || order.k1 + order.k2 > 4)
        throw std::invalid_argument("kernel_deriv: order out of range (k1 + k2 <= 4)");
    if (p.zeta == 0.0 && order.k2 % 2 == 1)
        return {0.0, 0.0, 0.0, Method::reduced_1d, true};
    auto me = detail::eval_orders(spec.n, spec.m, p.R, p.zeta, {{order.k1, order.k2, false}}, abs_tol);
    return me.comp[0];
}

// p_t at a profile, routed through the space-time scaling
// p_t(x, z) = t^{-n-m} h(R/t, |z|/t).
inline KernelEval kernel(const RadialProfile& p, double t, const GroupSpec& spec,
                         double abs_tol = 1e-14) {
    if (!(t > 0)) throw std::invalid_argument("kernel: t must be > 0");
    auto me = detail::eval_orders(spec.n, spec.m, p.R / t, p.zeta / t, {{0, 0, false}}, abs_tol);
    me.comp[0].log_scale -= (spec.n + spec.m) * std::log(t);
    return me.comp[0];
}

// Shared-pass evaluation of everything the potential needs at one profile.
// over_zeta carries lim p_{1,0,1}/zeta (= p_{1,0,2} at zeta = 0), used by the
// (m-1)/|z| term of the radial Laplacian.
struct DerivSet {
    KernelEval p00, p10, p01, p20, p02, p01_over_zeta;
};

inline DerivSet kernel_derivs_w(const RadialProfile& p, const GroupSpec& spec) {
    std::vector<detail::OrderSpec> orders = {
        {0, 0, false}, {1, 0, false}, {0, 1, false}, {2, 0, false}, {0, 2, false}};
    const bool need_oz = spec.m > 1;
    if (need_oz) orders.push_back({0, 1, true});
    DerivSet out;
    if (p.zeta == 0.0) {
        // odd derivatives vanish; p01/zeta has the analytic limit p02(R, 0)
        auto me = detail::eval_orders(spec.n, spec.m, p.R, 0.0,
                                      {{0, 0, false}, {1, 0, false}, {2, 0, false}, {0, 2, false}});
        out.p00 = me.comp[0];
        out.p10 = me.comp[1];
        out.p20 = me.comp[2];
        out.p02 = me.comp[3];
        out.p01 = {0.0, out.p00.log_scale, 0.0, out.p00.method, true};
        out.p01_over_zeta = out.p02;
        return out;
    }
    auto me = detail::eval_orders(spec.n, spec.m, p.R, p.zeta, orders);
    out.p00 = me.comp[0];
    out.p10 = me.comp[1];
    out.p01 = me.comp[2];
    out.p20 = me.comp[3];
    out.p02 = me.comp[4];
    out.p01_over_zeta = need_oz ? me.comp[5] : KernelEval{};
    return out;
}

// Central finite differences of h with two-level Richardson extrapolation,
// as an independent cross-check path (truncation ~ h^6).
inline KernelEval kernel_deriv_fd(const RadialProfile& p, DerivOrder order, const GroupSpec& spec,
                                  double step = 0.05) {
    auto diff = [](auto&& f, double at, double h, int k) -> double {
        auto raw = [&](double hh) {
            if (k == 1) return (f(at + hh) - f(at - hh)) / (2.0 * hh);
            return (f(at + hh) - 2.0 * f(at) + f(at - hh)) / (hh * hh);
        };
        if (k == 0) return f(at);
        const double d0 = raw(h), d1 = raw(0.5 * h), d2 = raw(0.25 * h);
        const double r1 = (4.0 * d1 - d0) / 3.0, r2 = (4.0 * d2 - d1) / 3.0;
        return (16.0 * r2 - r1) / 15.0;
    };
    auto h00 = [&](double R, double z) {
        auto me = detail::eval_orders(spec.n, spec.m, R, std::abs(z), {{0, 0, false}});
        return me.comp[0].value * std::exp(me.comp[0].log_scale + p.R);  // rescale near p
    };
    auto hz = [&](double z) {
        return diff([&](double R) { return h00(R, z); }, p.R, step * std::max(1.0, p.R), order.k1);
    };
    KernelEval out;
    out.value = diff(hz, p.zeta, step * std::max(1.0, p.zeta), order.k2);
    out.log_scale = -p.R;
    out.method = Method::finite_difference_fallback;
    out.abs_err = std::abs(out.value) * 1e-8 + 1e-13;
    out.converged = true;
    return out;
}

// --- leading-order forms of the four asymptotic regimes ---------------------

enum class ZoneId { Z1, Z2, Z3, Z4 };

struct ZoneLeading {
    double value = 0.0;      // mantissa (Z1: the full ratio)
    double log_scale = 0.0;  // -d^2/4 for Z2..Z4
    bool is_ratio = false;   // Z1 is exposed as p_{1,k1,k2}/p_{1,0,0}
    bool in_region = true;

    double scaled_value() const { return value * std::exp(log_scale); }
};

inline ZoneLeading zone_leading(ZoneId zone, const RadialProfile& p, DerivOrder order,
                                const GroupSpec& spec) {
    const int n = spec.n, m = spec.m, k1 = order.k1, k2 = order.k2;
    const double d24 = geometry::sr_distance_sq(p) / 4.0;
    ZoneLeading out;
    switch (zone) {
        case ZoneId::Z1: {
            // ratio to p_{1,0,0}; the unprinted amplitude cancels
            const auto ti = specialfn::theta_inv(p.omega());
            const double s = ti.y < 0.5 * pi ? std::sin(ti.y) : std::sin(ti.gap);
            const double c = ti.y < 0.5 * pi ? std::cos(ti.y) : -std::cos(ti.gap);
            double v = (k1 + k2) % 2 == 0 ? 1.0 : -1.0;
            for (int q = 0; q < k1 + k2; ++q) v *= ti.y;
            for (int q = 0; q < k1; ++q) v *= c / s;
            out.value = v;
            out.is_ratio = true;
            out.in_region = p.omega() <= 10.0 && d24 >= 10.0;
            return out;
        }
        case ZoneId::Z2: {
            const double delta = p.delta(), kap = p.kappa();
            out.value = (k2 % 2 == 0 ? 1.0 : -1.0) * std::pow(pi, k1 + k2) /
                        (std::pow(4.0, n) * std::pow(pi * delta, n + k1 - 0.5 * (m + 1)) *
                         std::sqrt(2.0 * pi * std::pow(kap, m)));
            out.log_scale = -d24;
            out.in_region = delta <= 0.3 && kap >= 10.0;
            return out;
        }
        case ZoneId::Z3: {
            const double delta = p.delta(), kap = p.kappa();
            out.value = (k2 % 2 == 0 ? 1.0 : -1.0) * std::pow(pi, k1 + k2) /
                        (std::pow(4.0, n) * std::pow(pi * delta, n + k1 - 0.5 * (m + 1)) *
                         std::pow(kap, 0.5 * (m - 1))) *
                        specialfn::bessel_i_scaled(n + k1 - 1, kap);
            out.log_scale = -d24;
            out.in_region = delta <= 0.3 && kap >= 0.1 && kap <= 10.0;
            return out;
        }
        case ZoneId::Z4: {
            double fact = 1.0;
            for (int q = 2; q <= n + k1 - 1; ++q) fact *= q;
            out.value = (k2 % 2 == 0 ? 1.0 : -1.0) * std::pow(pi, k1 + k2) /
                        (std::pow(2.0, 2 * n + 0.5 * (m - 1)) * fact) *
                        std::pow(p.zeta, n + k1 - 1 - 0.5 * (m - 1));
            out.log_scale = -d24;
            out.in_region = p.kappa() <= 0.5 && p.zeta >= 10.0;
            return out;
        }
    }
    throw std::logic_error("zone_leading: unreachable");
}

}  // namespace htype::heatkernel
