#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "htype/heatkernel.hpp"

using namespace htype;
using namespace htype::heatkernel;
using geometry::GroupSpec;
using geometry::RadialProfile;

namespace {

// Composite-Simpson oracle; deliberately independent of the adaptive
// Gauss-Kronrod path in the library.
template <class F>
double simpson(F&& f, double a, double b, int n /*even*/) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double rcoth(double r) { return r == 0.0 ? 1.0 : r / std::tanh(r); }

// Gauss-Legendre nodes/weights on [-1, 1] by Newton on the Legendre recurrence
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[n - 1 - i] = t;
        x[i] = -t;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

// full line-integral oracle for m = 1:
// p_1 = 1/((4 pi)^n 2 pi) Int_R e^{i lam z - R lam coth lam} (lam/sinh lam)^n dlam
double h_oracle_m1(int n, double R, double z) {
    auto f = [&](double lam) {
        const double rs = lam == 0.0 ? 1.0 : lam / std::sinh(lam);
        return std::exp(-R * rcoth(lam)) * std::pow(rs, n) * std::cos(lam * z);
    };
    const double val = 2.0 * simpson(f, 0.0, 60.0, 60000);
    return val / (std::pow(4.0 * pi, n) * 2.0 * pi);
}

}  // namespace

TEST_CASE("kernel: H1 origin value 1/16") {
    // oracle: Int_0^inf lam/sinh(lam) dlam = pi^2/4, inserted into the
    // explicit formula at the origin gives (1/(8 pi^2)) * 2 * (pi^2/4) = 1/16
    auto f = [](double lam) { return lam == 0.0 ? 1.0 : lam / std::sinh(lam); };
    const double half_line = simpson(f, 0.0, 80.0, 80000);
    CHECK_THAT(half_line, Catch::Matchers::WithinRel(pi * pi / 4.0, 1e-12));
    const double expect = 2.0 * half_line / (std::pow(4.0 * pi, 1) * 2.0 * pi);
    CHECK_THAT(expect, Catch::Matchers::WithinRel(1.0 / 16.0, 1e-12));

    const auto ke = kernel({0.0, 0.0}, 1.0, GroupSpec::heisenberg(1));
    CHECK(ke.converged);
    CHECK_THAT(ke.scaled_value(), Catch::Matchers::WithinAbs(1.0 / 16.0, 1e-12));
    CHECK(ke.abs_err < 1e-10);
}

TEST_CASE("kernel: matches independent line-integral oracle, m = 1") {
    for (int n : {1, 2}) {
        const auto spec = GroupSpec::heisenberg(n);
        for (auto [R, z] : {std::pair{1.0, 0.0}, {0.3, 0.7}, {2.0, 3.0}, {0.0, 1.5}}) {
            const auto ke = kernel({R, z}, 1.0, spec);
            CHECK_THAT(ke.scaled_value(), Catch::Matchers::WithinRel(h_oracle_m1(n, R, z), 1e-9));
        }
    }
}

TEST_CASE("kernel: matches tensor quadrature, m = 3") {
    // direct Cartesian 3-D quadrature of the lambda integral at a spot point
    const int n = 2;
    const double R = 0.5, z = 0.8;
    auto fline = [&](double l1, double l2, double l3) {
        const double lam = std::sqrt(l1 * l1 + l2 * l2 + l3 * l3);
        const double rs = lam == 0.0 ? 1.0 : lam / std::sinh(lam);
        return std::cos(l1 * z) * std::exp(-R * rcoth(lam)) * std::pow(rs, n);
    };
    const double T = 30.0;
    std::vector<double> gx, gw;
    gauss_legendre(140, gx, gw);
    double val = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i) {
        double plane = 0.0;
        for (std::size_t j = 0; j < gx.size(); ++j) {
            double row = 0.0;
            for (std::size_t k = 0; k < gx.size(); ++k)
                row += gw[k] * fline(T * gx[i], T * gx[j], T * gx[k]);
            plane += gw[j] * row;
        }
        val += gw[i] * plane;
    }
    val *= T * T * T;
    const double oracle = val / (std::pow(4.0 * pi, n) * std::pow(2.0 * pi, 3));
    const auto ke = kernel({R, z}, 1.0, GroupSpec::quaternionic(2));
    CHECK_THAT(ke.scaled_value(), Catch::Matchers::WithinRel(oracle, 1e-7));
}

TEST_CASE("kernel: matches tensor quadrature, m = 2") {
    const int n = 1;
    const double R = 0.7, z = 1.1;
    auto fline = [&](double l1, double l2) {
        const double lam = std::sqrt(l1 * l1 + l2 * l2);
        const double rs = lam == 0.0 ? 1.0 : lam / std::sinh(lam);
        return std::cos(l1 * z) * std::exp(-R * rcoth(lam)) * std::pow(rs, n);
    };
    const double T = 34.0;
    auto tensor = [&](int N) {
        double val = 0.0;
        for (int i = 0; i <= N; ++i) {
            const double w1 = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            double row = 0.0;
            for (int j = 0; j <= N; ++j) {
                const double w2 = (j == 0 || j == N) ? 1.0 : (j % 2 ? 4.0 : 2.0);
                row += w2 * fline(-T + 2 * T * i / N, -T + 2 * T * j / N);
            }
            val += w1 * row;
        }
        return val * sq(2.0 * T / N / 3.0);
    };
    const double s1 = tensor(600), s2 = tensor(1200);
    const double oracle =
        (s2 + (s2 - s1) / 15.0) / (std::pow(4.0 * pi, n) * sq(2.0 * pi));
    const auto ke = kernel({R, z}, 1.0, GroupSpec::radial(1, 2));
    CHECK_THAT(ke.scaled_value(), Catch::Matchers::WithinRel(oracle, 1e-7));
}

TEST_CASE("kernel: space-time scaling p_{1/4}(R,z) = 2^{2(m+n)} p_1(4R, 4z)") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (const auto spec : {GroupSpec::heisenberg(1), GroupSpec::quaternionic(2)}) {
        for (int rep = 0; rep < 12; ++rep) {
            const double R = u(rng), z = u(rng);
            const auto lhs = kernel({R, z}, 0.25, spec);  // eps = 2; R scales as |x|^2
            const auto rhs = kernel({4.0 * R, 4.0 * z}, 1.0, spec);
            const double fac = std::pow(2.0, 2 * (spec.n + spec.m));
            CHECK_THAT(lhs.scaled_value(),
                       Catch::Matchers::WithinAbs(
                           rhs.scaled_value() * fac,
                           2.0 * (lhs.abs_err * std::exp(lhs.log_scale) +
                                  rhs.abs_err * std::exp(rhs.log_scale) * fac)));
        }
    }
}

TEST_CASE("kernel_deriv: zeroth order equals kernel; FD cross-check") {
    for (const auto spec : {GroupSpec::heisenberg(1), GroupSpec::quaternionic(2)}) {
        const RadialProfile p{1.0, 1.0};
        const auto k0 = kernel_deriv(p, {0, 0}, spec);
        const auto kt = kernel(p, 1.0, spec);
        CHECK_THAT(k0.scaled_value(), Catch::Matchers::WithinRel(kt.scaled_value(), 1e-12));

        for (auto ord : {DerivOrder{1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}, {2, 2}}) {
            const auto an = kernel_deriv(p, ord, spec);
            const auto fd = kernel_deriv_fd(p, ord, spec);
            CHECK_THAT(an.scaled_value(),
                       Catch::Matchers::WithinAbs(fd.value * std::exp(fd.log_scale),
                                                  std::max(1e-8, 1e3 * an.abs_err)));
        }
    }
}

TEST_CASE("kernel_deriv: (1,0) matches Richardson finite difference at H1 (1,1)") {
    const auto spec = GroupSpec::heisenberg(1);
    auto h = [&](double R) { return kernel({R, 1.0}, 1.0, spec).scaled_value(); };
    const double s = 1e-3;
    const double d1 = (h(1.0 + s) - h(1.0 - s)) / (2.0 * s);
    const double d2 = (h(1.0 + 0.5 * s) - h(1.0 - 0.5 * s)) / s;
    const double rich = (4.0 * d2 - d1) / 3.0;
    CHECK_THAT(kernel_deriv({1.0, 1.0}, {1, 0}, spec).scaled_value(),
               Catch::Matchers::WithinAbs(rich, 1e-8));
}

TEST_CASE("kernel_deriv: odd zeta-derivative vanishes at zeta = 0") {
    const auto k = kernel_deriv({1.0, 0.0}, {0, 1}, GroupSpec::heisenberg(1));
    CHECK(k.value == 0.0);
    // and the even-extension limit: p01/zeta -> p02 as zeta -> 0
    const auto spec = GroupSpec::quaternionic(2);
    const auto ds0 = kernel_derivs_w({1.0, 0.0}, spec);
    const auto ds1 = kernel_derivs_w({1.0, 1e-5}, spec);
    CHECK_THAT(eval_ratio(ds1.p01_over_zeta, ds0.p02), Catch::Matchers::WithinRel(1.0, 1e-4));
}

TEST_CASE("kernel: positivity across grid, specs, times") {
    for (const auto spec :
         {GroupSpec::heisenberg(1), GroupSpec::heisenberg(2), GroupSpec::quaternionic(2)}) {
        for (double t : {0.25, 1.0, 4.0}) {
            for (double R : {0.0, 1.0, 5.0, 20.0}) {
                for (double z : {0.0, 1.0, 5.0, 20.0}) {
                    const auto ke = kernel({R, z}, t, spec);
                    INFO("spec n=" << spec.n << " m=" << spec.m << " t=" << t << " R=" << R
                                   << " z=" << z);
                    CHECK(ke.value > 0.0);
                    CHECK(ke.converged);
                }
            }
        }
    }
}

TEST_CASE("kernel: contour and real-axis paths agree near the crossover") {
    for (const auto spec : {GroupSpec::heisenberg(1), GroupSpec::quaternionic(2)}) {
        for (auto [R, z] : {std::pair{1.0, 3.5}, {0.5, 4.0}, {2.0, 5.0}}) {
            const auto real = detail::eval_real_axis(
                spec.n, spec.m, R, z, {{0, 0, false}, {1, 0, false}, {0, 1, false}}, 1e-14);
            const auto cont = detail::eval_contour(
                spec.n, spec.m, R, z, {{0, 0, false}, {1, 0, false}, {0, 1, false}}, 1e-14);
            for (int c = 0; c < 3; ++c) {
                const double rv = real.comp[c].value * std::exp(real.comp[c].log_scale);
                const double cv = cont.comp[c].value * std::exp(cont.comp[c].log_scale);
                CHECK_THAT(cv, Catch::Matchers::WithinRel(rv, 1e-9));
            }
        }
    }
}

TEST_CASE("zone leading forms: spot values") {
    const auto spec = GroupSpec::heisenberg(1);
    CHECK(zone_leading(ZoneId::Z1, {30.0, 30.0}, {0, 0}, spec).value == 1.0);
    {
        const RadialProfile p{40.0, 40.0};  // omega = 1
        const auto ti = specialfn::theta_inv(1.0);
        const auto zl = zone_leading(ZoneId::Z1, p, {1, 0}, spec);
        CHECK_THAT(zl.value,
                   Catch::Matchers::WithinRel(-ti.y * std::cos(ti.y) / std::sin(ti.y), 1e-12));
    }
    {
        // Z4 at n = m = 1, k = 0, zeta = 100: e^{-d^2/4}/4 with d^2 -> 4 pi zeta
        const RadialProfile p{1e-12, 100.0};
        const auto zl = zone_leading(ZoneId::Z4, p, {0, 0}, spec);
        CHECK_THAT(zl.value, Catch::Matchers::WithinRel(0.25, 1e-6));
        CHECK_THAT(zl.log_scale, Catch::Matchers::WithinRel(-pi * 100.0, 1e-5));
    }
}

TEST_CASE("zone convergence: ratios approach 1 along each zone path") {
    const auto spec = GroupSpec::heisenberg(1);

    SECTION("Z1: fixed omega, R -> inf; remainder O(1/R)") {
        for (auto ord : {DerivOrder{1, 0}, {0, 1}, {2, 0}, {0, 2}}) {
            double prev = std::numeric_limits<double>::infinity();
            for (double R : {25.0, 100.0, 400.0}) {
                const RadialProfile p{R, R};  // omega = 1
                const double num =
                    eval_ratio(kernel_deriv(p, ord, spec), kernel_deriv(p, {0, 0}, spec));
                const double lead = zone_leading(ZoneId::Z1, p, ord, spec).value;
                const double dev = std::abs(num / lead - 1.0);
                CHECK(dev < prev * 1.2);
                CHECK(dev * R < 10.0);
                prev = dev;
            }
        }
    }

    SECTION("Z2: R = 1, zeta -> inf; remainder O(delta + 1/kappa)") {
        for (auto ord : {DerivOrder{0, 0}, {1, 0}, {0, 1}}) {
            double prev = std::numeric_limits<double>::infinity();
            for (double z : {60.0, 240.0, 960.0}) {
                const RadialProfile p{1.0, z};
                const auto kd = kernel_deriv(p, ord, spec);
                const auto zl = zone_leading(ZoneId::Z2, p, ord, spec);
                const double ratio = kd.value / zl.value * std::exp(kd.log_scale - zl.log_scale);
                const double dev = std::abs(ratio - 1.0);
                CHECK(dev < std::max(prev, 3.0 * (p.delta() + 1.0 / p.kappa())));
                prev = dev;
            }
        }
    }

    SECTION("Z3: kappa = 2 fixed, zeta -> inf; remainder O(delta)") {
        double prev = std::numeric_limits<double>::infinity();
        for (double z : {50.0, 200.0, 800.0}) {
            const double R = sq(2.0) / (4.0 * pi * z);
            const RadialProfile p{R, z};
            const auto kd = kernel_deriv(p, {0, 0}, spec);
            const auto zl = zone_leading(ZoneId::Z3, p, {0, 0}, spec);
            const double ratio = kd.value / zl.value * std::exp(kd.log_scale - zl.log_scale);
            const double dev = std::abs(ratio - 1.0);
            CHECK(dev < std::max(prev * 1.2, 3.0 * p.delta()));
            prev = dev;
        }
    }

    SECTION("Z4: R = 1/zeta^2, zeta -> inf; remainder O(kappa + 1/zeta)") {
        double prev = std::numeric_limits<double>::infinity();
        for (double z : {50.0, 200.0, 800.0}) {
            const RadialProfile p{1.0 / (z * z), z};
            const auto kd = kernel_deriv(p, {0, 0}, spec);
            const auto zl = zone_leading(ZoneId::Z4, p, {0, 0}, spec);
            const double ratio = kd.value / zl.value * std::exp(kd.log_scale - zl.log_scale);
            const double dev = std::abs(ratio - 1.0);
            CHECK(dev < std::max(prev * 1.2, 3.0 * (p.kappa() + 1.0 / z)));
            prev = dev;
        }
    }
}

TEST_CASE("kernel: t-routing via scaling keeps one code path") {
    const auto spec = GroupSpec::heisenberg(1);
    const auto a = kernel({2.0, 3.0}, 2.0, spec);
    const auto b = kernel({1.0, 1.5}, 1.0, spec);
    CHECK_THAT(a.scaled_value(),
               Catch::Matchers::WithinRel(b.scaled_value() * std::pow(2.0, -2), 1e-11));
}
