#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "htype/common.hpp"
#include "htype/geometry.hpp"
#include "htype/heatkernel.hpp"
#include "htype/quadrature.hpp"
#include "htype/specialfn.hpp"

namespace htype::anisotropic {

using heatkernel::KernelEval;
using heatkernel::Method;

// Spectrum of a non-isotropic Heisenberg group: strictly increasing
// frequencies alpha_1 < ... < alpha_k with multiplicities n_j summing to n.
struct AnisoSpec {
    std::vector<double> alphas;
    std::vector<int> mults;

    void validate() const {
        if (alphas.empty() || alphas.size() != mults.size())
            throw std::invalid_argument("AnisoSpec: alphas and mults must match and be nonempty");
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            if (!(alphas[j] > 0) || mults[j] < 1)
                throw std::invalid_argument("AnisoSpec: need alpha_j > 0 and n_j >= 1");
            if (j > 0 && !(alphas[j] > alphas[j - 1]))
                throw std::invalid_argument("AnisoSpec: alphas must be strictly increasing");
        }
    }
    int total_n() const {
        int n = 0;
        for (int m : mults) n += m;
        return n;
    }
    double alpha_max() const { return alphas.back(); }
};

// A point described by its block norms |P_j(x)| and center coordinate z;
// every Appendix-style formula depends on the blocks only through these.
struct AnisoPoint {
    std::vector<double> block_norms;
    double z = 0.0;

    // R = sum_j alpha_j |P_j(x)|^2
    double bigR(const AnisoSpec& spec) const {
        double s = 0.0;
        for (std::size_t j = 0; j < block_norms.size(); ++j)
            s += spec.alphas[j] * block_norms[j] * block_norms[j];
        return s;
    }
};

namespace detail {

inline void check(const AnisoPoint& pt, const AnisoSpec& spec) {
    spec.validate();
    if (pt.block_norms.size() != spec.alphas.size())
        throw std::invalid_argument("AnisoPoint: block count mismatch");
    for (double q : pt.block_norms)
        if (!(q >= 0)) throw std::invalid_argument("AnisoPoint: block norms must be >= 0");
}

}  // namespace detail

// The unique y in [0, pi/alpha_k) with
//   sum_j alpha_j |P_j(x)|^2 theta(alpha_j y) = 4 |z|.
// Defined (for z != 0) only when the top block is active: |P_k(x)| > 0.
inline double aniso_y(const AnisoPoint& pt, const AnisoSpec& spec) {
    detail::check(pt, spec);
    const double target = 4.0 * std::abs(pt.z);
    if (target == 0.0) return 0.0;
    if (pt.block_norms.back() == 0.0)
        throw std::domain_error("aniso_y: degenerate block (|P_k(x)| = 0)");
    const double ak = spec.alpha_max();
    auto lhs = [&](double y) {
        double s = 0.0;
        for (std::size_t j = 0; j < spec.alphas.size(); ++j)
            s += spec.alphas[j] * sq(pt.block_norms[j]) * specialfn::theta(spec.alphas[j] * y);
        return s;
    };
    auto dlhs = [&](double y) {
        double s = 0.0;
        for (std::size_t j = 0; j < spec.alphas.size(); ++j)
            s += sq(spec.alphas[j] * pt.block_norms[j]) *
                 specialfn::theta_prime(spec.alphas[j] * y);
        return s;
    };
    double lo = 0.0, hi = (pi / ak) * (1.0 - 1e-15);
    while (lhs(hi) < target) hi = 0.5 * (hi + pi / ak);  // cannot loop: theta diverges at the pole
    while (hi - lo > 1e-8 * (hi - 0.0 + 1.0)) {
        const double mid = 0.5 * (lo + hi);
        (lhs(mid) < target ? lo : hi) = mid;
    }
    double y = 0.5 * (lo + hi);
    for (int it = 0; it < 20; ++it) {
        const double f = lhs(y) - target;
        if (std::abs(f) <= 1e-13 * std::max(1.0, target)) break;
        (f > 0 ? hi : lo) = y;
        double next = y - f / dlhs(y);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        if (next == y) break;
        y = next;
    }
    return y;
}

// d(x,z)^2 / 4 = |z| y + sum_j (alpha_j |P_j(x)|^2 / 4) y cot(alpha_j y)
inline double aniso_distance_sq(const AnisoPoint& pt, const AnisoSpec& spec) {
    const double y = aniso_y(pt, spec);
    double s = std::abs(pt.z) * y;
    for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
        const double u = spec.alphas[j] * y;
        const double ycot = u == 0.0 ? 1.0 / spec.alphas[j] : y * std::cos(u) / std::sin(u);
        s += 0.25 * spec.alphas[j] * sq(pt.block_norms[j]) * ycot;
    }
    return 4.0 * s;
}

inline double aniso_distance(const AnisoPoint& pt, const AnisoSpec& spec) {
    return std::sqrt(aniso_distance_sq(pt, spec));
}

// stationary-phase amplitude
// Psi = sqrt( sum_j alpha_j^2 |P_j|^2 (sin(a_j y) - a_j y cos(a_j y)) / (4 sin^3(a_j y)) )
inline double aniso_psi(const AnisoPoint& pt, const AnisoSpec& spec) {
    const double y = aniso_y(pt, spec);
    double s = 0.0;
    for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
        const double u = spec.alphas[j] * y;
        double summand;
        if (u < 1e-4) {
            summand = 1.0 / 12.0;  // (sin u - u cos u) / (4 sin^3 u) -> 1/12
        } else {
            const double su = std::sin(u);
            summand = specialfn::detail::sin_minus_ucos(u) / (4.0 * su * su * su);
        }
        s += sq(spec.alphas[j] * pt.block_norms[j]) * summand;
    }
    return std::sqrt(s);
}

namespace detail {

using cplx = std::complex<double>;

inline cplx wcoth(cplx w) {
    if (std::abs(w.real()) < 1e-12 && std::abs(w.imag()) < 1e-12) return 1.0;
    return w * std::cosh(w) / std::sinh(w);
}

// amplitude prod_j (alpha_j w / sinh(alpha_j w))^{n_j}
inline cplx amplitude(const AnisoSpec& spec, cplx w) {
    cplx a = 1.0;
    for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
        const cplx v = spec.alphas[j] * w;
        cplx f = (std::abs(v.real()) + std::abs(v.imag()) < 1e-12) ? cplx(1.0) : v / std::sinh(v);
        for (int q = 0; q < spec.mults[j]; ++q) a *= f;
    }
    return a;
}

// complex quadrature over the full line as two half-line passes, so the
// imaginary residual is measured rather than assumed away
struct LineIntegral {
    cplx value;
    double abs_err;
    bool converged;
};

template <class F>
LineIntegral full_line(F&& f, const std::vector<double>& seeds, double osc_period,
                       double start_tail, double abs_tol) {
    quad::Options opt;
    opt.abs_tol = abs_tol;
    opt.rel_tol = 1e-12;
    LineIntegral out{0.0, 0.0, true};
    for (double sign : {1.0, -1.0}) {
        auto half = [&](double s) {
            const cplx v = f(sign * s);
            return Vec<2>{{v.real(), v.imag()}};
        };
        auto est = heatkernel::detail::half_line_quad(
            [&](double s) {
                Vec<heatkernel::detail::max_comp> o{};
                const auto v = half(s);
                o[0] = v[0];
                o[1] = v[1];
                return o;
            },
            seeds, osc_period, start_tail, opt);
        out.value += cplx(est.value[0], est.value[1]);
        out.abs_err += est.abs_err;
        out.converged = out.converged && est.converged;
    }
    return out;
}

}  // namespace detail

// Heat kernel of the non-isotropic group by the one-dimensional integral
//   p_t = 2/(4 pi t)^{n+1} Int_R e^{(1/t)(i z s - sum_j (a_j q_j^2/4) s coth(a_j s))}
//         prod_j (a_j s / sinh(a_j s))^{n_j} ds.
// Deep-tail points route through the contour shifted to the stationary point
// i y_{(x,z)} with e^{-d^2/4} carried in log_scale. The imaginary residual of
// the quadrature is checked against its error estimate, never dropped
// silently.
inline KernelEval aniso_kernel(const AnisoPoint& pt, const AnisoSpec& spec, double t = 1.0) {
    detail::check(pt, spec);
    if (!(t > 0)) throw std::invalid_argument("aniso_kernel: t must be > 0");
    const int n = spec.total_n();
    // Folland scaling: p_t(q, z) = t^{-(n+1)} p_1(q/sqrt t, z/t)
    AnisoPoint p1 = pt;
    for (auto& q : p1.block_norms) q /= std::sqrt(t);
    p1.z = pt.z / t;
    const double log_t_scale = -(n + 1) * std::log(t);

    const double R = p1.bigR(spec);
    const double z = std::abs(p1.z);
    const double d24 = (z > 0 && p1.block_norms.back() > 0) ? 0.25 * aniso_distance_sq(p1, spec)
                                                            : 0.25 * R;
    const double loss = d24 - 0.25 * R;
    const double front = 2.0 / std::pow(4.0 * pi, n + 1);

    KernelEval out;
    if (loss <= 12.0 || z == 0.0 || p1.block_norms.back() == 0.0) {
        auto integrand = [&](double s) -> detail::cplx {
            detail::cplx e(0.0, z * s);
            for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
                const double u = spec.alphas[j] * s;
                const double scoth = s == 0.0 ? 1.0 / spec.alphas[j]
                                              : s * std::cosh(u) / std::sinh(u);
                e -= 0.25 * spec.alphas[j] * sq(p1.block_norms[j]) * scoth;
            }
            return std::exp(e) * detail::amplitude(spec, detail::cplx(s, 0.0));
        };
        const auto li = detail::full_line(integrand, {0.25, 0.5, 1.0, 2.0},
                                          z > 0 ? 2.0 * pi / z : 1.0, 4.0, 1e-14);
        out.value = front * li.value.real();
        out.log_scale = log_t_scale;
        out.abs_err = front * (li.abs_err + std::abs(li.value.imag()));
        out.method = Method::reduced_1d;
        out.converged = li.converged && std::abs(li.value.imag()) <= 10.0 * li.abs_err + 1e-13;
        return out;
    }

    const double y = aniso_y(p1, spec);
    auto ycot = [&](double a) { return y * std::cos(a * y) / std::sin(a * y); };
    auto integrand = [&](double s) -> detail::cplx {
        const detail::cplx w(s, y);
        detail::cplx e(0.0, z * s);
        for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
            const double a = spec.alphas[j];
            e -= 0.25 * a * sq(p1.block_norms[j]) * (detail::wcoth(a * w) / a - ycot(a));
        }
        return std::exp(e) * detail::amplitude(spec, w);
    };
    const double psi2 = 2.0 * sq(aniso_psi(p1, spec));  // curvature of the shifted phase
    const double sigma = 1.0 / std::sqrt(std::max(psi2, 1.0));
    std::vector<double> seeds;
    const double gap = pi / spec.alpha_max() - y;
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        seeds.push_back(f * sigma);
        if (gap < 0.5) seeds.push_back(f * gap);
    }
    const auto li = detail::full_line(integrand, seeds, z > 0 ? 2.0 * pi / z : 1.0,
                                      std::max(2.0, 8.0 * sigma), 1e-14);
    out.value = front * li.value.real();
    out.log_scale = log_t_scale - d24;
    out.abs_err = front * (li.abs_err + std::abs(li.value.imag()));
    out.method = Method::contour_shift;
    out.converged = li.converged && std::abs(li.value.imag()) <= 10.0 * li.abs_err + 1e-13;
    return out;
}

// phase of the shifted integrand: psi(s) = phi(s + i y0) - phi(i y0), with
// phi(s) = (|z|/R) s + i sum_j (a_j q_j^2 / 4R) s coth(a_j s)
inline std::complex<double> psi_phase(const AnisoPoint& pt, const AnisoSpec& spec, double y0,
                                      double s) {
    detail::check(pt, spec);
    const double R = pt.bigR(spec);
    auto phi = [&](detail::cplx w) {
        detail::cplx v = (std::abs(pt.z) / R) * w;
        for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
            const double a = spec.alphas[j];
            v += detail::cplx(0.0, 1.0) * (0.25 * a * sq(pt.block_norms[j]) / R) *
                 (detail::wcoth(a * w) / a);
        }
        return v;
    };
    return phi(detail::cplx(s, y0)) - phi(detail::cplx(0.0, y0));
}

// Cauchy check: the line integral is invariant under shifting the contour to
// Im w = y_shift (below the first pole). Returns the relative residual.
inline double contour_shift_check(const AnisoPoint& pt, const AnisoSpec& spec, double y_shift) {
    detail::check(pt, spec);
    if (y_shift < 0 || y_shift >= pi / spec.alpha_max() - 1e-3)
        throw std::invalid_argument("contour_shift_check: shift too close to the first pole");
    const double z = std::abs(pt.z);
    auto shifted = [&](double y0) {
        auto integrand = [&](double s) -> detail::cplx {
            const detail::cplx w(s, y0);
            detail::cplx e = detail::cplx(0.0, 1.0) * (z * w);
            for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
                const double a = spec.alphas[j];
                e -= 0.25 * a * sq(pt.block_norms[j]) * (detail::wcoth(a * w) / a);
            }
            return std::exp(e) * detail::amplitude(spec, w);
        };
        return detail::full_line(integrand, {0.25, 0.5, 1.0, 2.0}, z > 0 ? 2.0 * pi / z : 1.0,
                                 4.0, 1e-15);
    };
    const auto base = shifted(0.0);
    const auto moved = shifted(y_shift);
    return std::abs(base.value - moved.value) / std::abs(base.value);
}

struct ExpansionRow {
    double R;
    double ratio;  // aniso_kernel / leading-order stationary-phase term
};

// Leading term 2 sqrt(pi) e^{-d^2/4} / ((4 pi)^{n+1} Psi) prod (a_j y / sin(a_j y))^{n_j};
// the admissible ray fixes |z|/R = omega and the block shares of R.
inline std::vector<ExpansionRow> expansion_check(const AnisoSpec& spec,
                                                 std::span<const double> block_fractions,
                                                 double omega, std::span<const double> Rs) {
    spec.validate();
    if (block_fractions.size() != spec.alphas.size())
        throw std::invalid_argument("expansion_check: block fraction count mismatch");
    double norm = 0.0;
    for (std::size_t j = 0; j < block_fractions.size(); ++j) norm += block_fractions[j];
    if (!(norm > 0) || !(block_fractions.back() > 0))
        throw std::invalid_argument("expansion_check: top block must stay active");
    const int n = spec.total_n();
    std::vector<ExpansionRow> out;
    for (double R : Rs) {
        AnisoPoint pt;
        pt.block_norms.resize(spec.alphas.size());
        for (std::size_t j = 0; j < spec.alphas.size(); ++j)
            pt.block_norms[j] =
                std::sqrt(block_fractions[j] / norm * R / spec.alphas[j]);
        pt.z = omega * R;
        const double y = aniso_y(pt, spec);
        const double d24 = 0.25 * aniso_distance_sq(pt, spec);
        double lead = 2.0 * std::sqrt(pi) / (std::pow(4.0 * pi, n + 1) * aniso_psi(pt, spec));
        for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
            const double u = spec.alphas[j] * y;
            const double f = u == 0.0 ? 1.0 : spec.alphas[j] * y / std::sin(u);
            for (int q = 0; q < spec.mults[j]; ++q) lead *= f;
        }
        const auto ke = aniso_kernel(pt, spec, 1.0);
        out.push_back({R, ke.value / lead * std::exp(ke.log_scale + d24)});
    }
    return out;
}

}  // namespace htype::anisotropic
