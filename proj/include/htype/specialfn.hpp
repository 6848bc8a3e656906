#pragma once

#include <cmath>
#include <stdexcept>

#include "htype/common.hpp"

namespace htype::specialfn {

namespace detail {

// u - sin(u), series for small |u| where the direct form cancels
inline double u_minus_sin(double u) {
    if (std::abs(u) < 0.25) {
        const double u2 = u * u;
        // u^3/6 - u^5/120 + u^7/5040 - u^9/362880 + u^11/39916800
        return u * u2 *
               (1.0 / 6 +
                u2 * (-1.0 / 120 +
                      u2 * (1.0 / 5040 + u2 * (-1.0 / 362880 + u2 / 39916800))));
    }
    return u - std::sin(u);
}

// sin(u) - u*cos(u), series for small |u|
inline double sin_minus_ucos(double u) {
    if (std::abs(u) < 0.25) {
        const double u2 = u * u;
        // u^3/3 - u^5/30 + u^7/840 - u^9/45360
        return u * u2 * (1.0 / 3 + u2 * (-1.0 / 30 + u2 * (1.0 / 840 - u2 / 45360)));
    }
    return std::sin(u) - u * std::cos(u);
}

}  // namespace detail

// theta(y) = (2y - sin 2y) / (2 sin^2 y): odd, strictly increasing
// diffeomorphism of (-pi, pi) onto R, with theta(0) = 0.
inline double theta(double y) {
    if (!(std::abs(y) < pi)) throw std::domain_error("theta: |y| must be < pi");
    if (y == 0.0) return 0.0;
    const double s = std::sin(y);
    return detail::u_minus_sin(2.0 * y) / (2.0 * s * s);
}

// theta'(y) = 2 (sin y - y cos y) / sin^3 y; theta'(0) = 2/3.
inline double theta_prime(double y) {
    if (!(std::abs(y) < pi)) throw std::domain_error("theta_prime: |y| must be < pi");
    if (y == 0.0) return 2.0 / 3.0;
    const double s = std::sin(y);
    return 2.0 * detail::sin_minus_ucos(y) / (s * s * s);
}

// Inverse of theta on [0, pi). `gap` = pi - y is carried separately so that
// sin(y) = sin(gap) stays accurate when omega is huge and y hugs pi.
struct ThetaInv {
    double y;
    double gap;
};

inline ThetaInv theta_inv(double omega) {
    if (std::isnan(omega) || omega < 0.0)
        throw std::domain_error("theta_inv: omega must be >= 0");
    if (omega == 0.0) return {0.0, pi};
    if (std::isinf(omega)) return {pi, 0.0};

    if (omega > 50.0) {
        // pole branch: solve theta(pi - eps) = omega in eps, where
        // theta(pi - eps) = (2 pi - (2 eps - sin 2 eps)) / (2 sin^2 eps)
        // and theta'(pi - eps) = 2 (sin eps + (pi - eps) cos eps) / sin^3 eps.
        double eps = std::sqrt(pi / omega);
        for (int it = 0; it < 60; ++it) {
            const double s = std::sin(eps);
            const double f = (2.0 * pi - detail::u_minus_sin(2.0 * eps)) / (2.0 * s * s) - omega;
            const double dtheta = 2.0 * (s + (pi - eps) * std::cos(eps)) / (s * s * s);
            const double step = f / dtheta;  // theta decreases in eps
            if (!std::isfinite(step)) break;
            double next = eps + step;
            if (next <= 0.0) next = 0.5 * eps;
            if (next >= pi) next = 0.5 * (eps + pi);
            eps = next;
            if (std::abs(f) <= 1e-13 * omega && std::abs(step) <= 1e-12 * eps) break;
        }
        return {pi - eps, eps};
    }

    // bracketing bisection to ~1e-8, then Newton polish
    double lo = 0.0, hi = pi * (1.0 - 1e-16);
    double y = std::min(1.5 * omega, 0.5 * pi);  // series guess theta(y) ~ (2/3) y
    if (theta(y) < omega) lo = y; else hi = y;
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        (theta(mid) < omega ? lo : hi) = mid;
    }
    y = 0.5 * (lo + hi);
    for (int it = 0; it < 12; ++it) {
        const double f = theta(y) - omega;
        if (std::abs(f) <= 1e-13 * std::max(1.0, omega)) break;
        (f > 0 ? hi : lo) = y;
        double next = y - f / theta_prime(y);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        if (next == y) break;
        y = next;
    }
    return {y, pi - y};
}

// Modified Bessel function of the first kind, integer order nu >= 0.
// Ascending series up to kappa = 30, large-argument asymptotic beyond; the
// crossover is validated by the three-term recurrence property tests.
namespace detail {

inline double bessel_i_series(int nu, double kappa) {
    const double q = 0.25 * kappa * kappa;
    double term = 1.0;
    for (int j = 1; j <= nu; ++j) term *= 0.5 * kappa / j;  // (kappa/2)^nu / nu!
    double sum = term;
    for (int k = 1; k < 400; ++k) {
        term *= q / (static_cast<double>(k) * (k + nu));
        sum += term;
        if (term <= sum * 1e-18) break;
    }
    return sum;
}

// e^{-kappa} I_nu(kappa) via the asymptotic expansion, kappa large
inline double bessel_i_asym_scaled(int nu, double kappa) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0, best = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double factor = -(mu - sq(2.0 * k - 1.0)) / (8.0 * kappa * k);
        term *= factor;
        if (std::abs(term) > best && k > nu / 2 + 1) break;  // past optimal truncation
        best = std::abs(term);
        sum += term;
        if (std::abs(term) <= std::abs(sum) * 1e-17) break;
    }
    return sum / std::sqrt(2.0 * pi * kappa);
}

}  // namespace detail

inline double bessel_i_scaled(int nu, double kappa) {
    if (nu < 0) throw std::domain_error("bessel_i: order must be >= 0");
    if (kappa < 0) throw std::domain_error("bessel_i: argument must be >= 0");
    if (kappa == 0.0) return nu == 0 ? 1.0 : 0.0;
    if (kappa <= 30.0) return detail::bessel_i_series(nu, kappa) * std::exp(-kappa);
    return detail::bessel_i_asym_scaled(nu, kappa);
}

inline double bessel_i(int nu, double kappa) {
    if (nu < 0) throw std::domain_error("bessel_i: order must be >= 0");
    if (kappa < 0) throw std::domain_error("bessel_i: argument must be >= 0");
    if (kappa == 0.0) return nu == 0 ? 1.0 : 0.0;
    if (kappa <= 30.0) return detail::bessel_i_series(nu, kappa);
    if (kappa > 690.0) throw std::overflow_error("bessel_i: argument beyond exponent range");
    return detail::bessel_i_asym_scaled(nu, kappa) * std::exp(kappa);
}

// J(kappa) = 2 I_{n-1} I_{n+1} - I_n^2 + (4n/kappa) I_{n-1} I_n - I_{n-1}^2,
// evaluated from the defining four-term expression (scaled internally).
// Simplifies to I_{n-1}^2 - I_n^2, which the tests cross-check.
inline double appendix_j(int n, double kappa) {
    if (n < 1) throw std::domain_error("appendix_j: n must be >= 1");
    if (!(kappa > 0)) throw std::domain_error("appendix_j: kappa must be > 0");
    const double im = bessel_i_scaled(n - 1, kappa);
    const double i0 = bessel_i_scaled(n, kappa);
    const double ip = bessel_i_scaled(n + 1, kappa);
    const double bracket = 2.0 * im * ip - i0 * i0 + (4.0 * n / kappa) * im * i0 - im * im;
    if (kappa > 345.0) throw std::overflow_error("appendix_j: result beyond exponent range");
    return bracket * std::exp(2.0 * kappa);
}

// Normalized radial Fourier kernel e_nu(u) = Gamma(nu+1) (2/u)^nu J_nu(u),
// the spherical mean of e^{i<lambda,z>} over |lambda| = 1 in dimension
// m = 2 nu + 2. Even, entire, e_nu(0) = 1, |e_nu| <= 1.
inline double sphere_kernel_ord(double nu, double u) {
    u = std::abs(u);
    if (u < 2.0) {
        const double q = -0.25 * u * u;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 60; ++k) {
            term *= q / (k * (nu + k));
            sum += term;
            if (std::abs(term) <= 1e-18) break;
        }
        return sum;
    }
    const long twice = std::lround(2.0 * nu);
    if (twice % 2 == 0) {  // integer order: route through cyl_bessel_j
        const int inu = static_cast<int>(twice / 2);
        double fac = 1.0;
        for (int j = 1; j <= inu; ++j) fac *= 2.0 * j / u;  // Gamma(nu+1) (2/u)^nu
        return fac * std::cyl_bessel_j(static_cast<double>(inu), u);
    }
    // half-integer order: e_{l+1/2}(u) = (2l+1)!! j_l(u) / u^l via the
    // spherical Bessel recurrence (l here is small, u >= 2: stable)
    const int l = static_cast<int>((twice - 1) / 2);
    if (l < -1) throw std::domain_error("sphere_kernel_ord: order below -1/2");
    if (l == -1) return std::cos(u);
    double jm = std::sin(u) / u;  // j_0
    if (l == 0) return jm;
    double jc = (std::sin(u) / u - std::cos(u)) / u;  // j_1
    double dfac = 3.0, upow = u;
    for (int k = 1; k < l; ++k) {
        const double jn = (2.0 * k + 1.0) / u * jc - jm;
        jm = jc;
        jc = jn;
        dfac *= 2.0 * k + 3.0;
        upow *= u;
    }
    return dfac * jc / upow;
}

// e_{m/2 - 1}: the kernel reducing an m-dimensional Fourier integral of a
// radial function to one dimension. m = 1 gives cos, m = 3 gives sin(u)/u.
inline double sphere_kernel(int m, double u) {
    if (m < 1) throw std::domain_error("sphere_kernel: m must be >= 1");
    if (m == 1) return std::cos(u);
    if (m == 3) {
        const double au = std::abs(u);
        return au < 1e-4 ? 1.0 - u * u / 6.0 : std::sin(au) / au;
    }
    return sphere_kernel_ord(0.5 * m - 1.0, u);
}

// Bessel J of half-integer order  (nu in {-1/2, 1/2, 3/2, ...}).
inline double bessel_j_halfint(double nu, double x) {
    const long twice = std::lround(2.0 * nu);
    if (std::abs(2.0 * nu - twice) > 1e-12 || twice % 2 == 0 || twice < -1)
        throw std::domain_error("bessel_j_halfint: order must be a half-integer >= -1/2");
    if (x < 0) throw std::domain_error("bessel_j_halfint: x must be >= 0");
    if (nu < 0) return std::sqrt(2.0 / (pi * x)) * std::cos(x);
    if (x == 0.0) return 0.0;
    // J_nu(x) = x^nu e_nu(x) / (Gamma(nu+1) 2^nu)
    const double e = sphere_kernel_ord(nu, x);
    return e * std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0));
}

}  // namespace htype::specialfn
