#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "htype/certificates.hpp"

using namespace htype;
using namespace htype::certificates;
using geometry::GroupSpec;

TEST_CASE("sobolev_const: pinned value, exponent relation, positivity") {
    // direct substitution at (1,1): Q = 4
    const double direct = std::sqrt(4.0) / (2.0 * 1 * 2 * std::pow(pi, 3.0 / 4.0)) *
                          std::pow(std::tgamma(3.0) / std::tgamma(1.5), 0.25);
    CHECK_THAT(sobolev_const(1, 1), Catch::Matchers::WithinRel(direct, 1e-14));

    // p/(p-2) = n+m for p = 2Q/(Q-2)
    for (auto [n, m] : {std::pair{1, 1}, {3, 2}}) {
        const double Q = 2.0 * (n + m);
        const double p = 2.0 * Q / (Q - 2.0);
        CHECK_THAT(p / (p - 2.0), Catch::Matchers::WithinRel(double(n + m), 1e-14));
    }
    for (int n = 1; n <= 10; ++n)
        for (int m = 1; m <= 10; ++m) {
            const double c = sobolev_const(n, m);
            CHECK(c > 0.0);
            CHECK(std::isfinite(c));
        }
}

TEST_CASE("elementary_min: pinned minima and brute-force oracle") {
    {
        const auto em = elementary_min(1.0, 2.0, 0.0);
        CHECK_THAT(em.delta0, Catch::Matchers::WithinRel(1.0, 1e-14));
        CHECK_THAT(em.fmin, Catch::Matchers::WithinAbs(1.0, 1e-14));  // equality case f(1)
    }
    {
        const auto em = elementary_min(2.0, 2.0, 5.0);
        CHECK_THAT(em.delta0, Catch::Matchers::WithinRel(1.0 / std::sqrt(2.0), 1e-14));
        CHECK_THAT(em.fmin, Catch::Matchers::WithinRel(6.0 + std::log(2.0), 1e-14));
        CHECK(em.fmin <= 7.0);  // f(delta0) <= alpha + gamma
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 5.0), ug(-3.0, 3.0);
    for (int rep = 0; rep < 25; ++rep) {
        const double a = u(rng), b = u(rng), c = ug(rng);
        const auto em = elementary_min(a, b, c);
        double brute = std::numeric_limits<double>::infinity();
        for (double d = 1e-3; d <= 10.0; d += 1e-4)
            brute = std::min(brute, a * d * d - b * std::log(d) + c);
        CHECK_THAT(em.fmin, Catch::Matchers::WithinAbs(brute, 1e-6));
        CHECK(em.fmin <= a + c + 1e-12);
    }
    CHECK_THROWS_AS(elementary_min(-1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("cor27_constant: zero point, monotonicity, K-summand match") {
    const double tau0 = 2.0 * sobolev_const(1, 1) / std::exp(1.0);
    CHECK_THAT(cor27_constant(tau0, 1, 1), Catch::Matchers::WithinAbs(0.0, 1e-13));
    CHECK(cor27_constant(1.0, 1, 1) > cor27_constant(2.0, 1, 1));
    CHECK(cor27_constant(2.0, 1, 1) > cor27_constant(3.0, 1, 1));
    // at tau = 2 this is the log summand of K_{n,m}
    const double k_summand =
        std::log(std::pow((1 + 1) * sobolev_const(1, 1) / (2.0 * std::exp(1.0)), 2));
    CHECK_THAT(cor27_constant(2.0, 1, 1), Catch::Matchers::WithinRel(k_summand, 1e-13));
}

TEST_CASE("be_lower_bound: values and monotonicity") {
    CHECK_THAT(be_lower_bound(1), Catch::Matchers::WithinRel(std::sqrt(2.0), 1e-15));
    CHECK_THAT(be_lower_bound(5), Catch::Matchers::WithinRel(std::sqrt(1.25), 1e-15));
    for (int n = 1; n < 20; ++n) {
        CHECK(be_lower_bound(n) > 1.0);
        CHECK(be_lower_bound(n) > be_lower_bound(n + 1));
    }
}

TEST_CASE("eta_certificate: invariant assembly and difference identity") {
    const auto spec = GroupSpec::heisenberg(1);
    potential::MinWOptions opt;
    opt.grid = 96;
    const auto cert = eta_certificate(5.0, spec, opt);
    CHECK(cert.certified);
    CHECK(cert.min_w.tail_margin >= 1.0);
    // bit-for-bit assembly from the components
    CHECK(cert.eta ==
          (cert.m + cert.n) * std::log((cert.m + cert.n) * cert.c_nm / (std::exp(1.0) * 5.0)) -
              cert.min_w.min_value);
    CHECK_THAT(cert.min_w.min_value, Catch::Matchers::WithinAbs(-8.299887359, 1e-5));
    CHECK_THAT(cert.eta, Catch::Matchers::WithinAbs(1.770881, 1e-4));

    const auto cert6 = eta_certificate(6.0, spec, opt);
    const double lhs = cert.eta - cert6.eta;
    const double rhs = 2.0 * std::log(6.0 / 5.0) - (cert.min_w.min_value - cert6.min_w.min_value);
    CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-12));
}

TEST_CASE("entropy_and_dirichlet: dilation laws on the Haar measure") {
    const auto spec = GroupSpec::heisenberg(1);
    TestFunction base{TestFunction::Kind::gaussian_bump, 1.0, {}, 1.0, "base"};
    const auto I0 = entropy_and_dirichlet(base, {Measure::Kind::haar, 1.0}, spec);
    const double Q = spec.homogeneous_dim();
    for (double lam : {0.5, 2.0}) {
        TestFunction dil{TestFunction::Kind::dilated, 1.0, {}, lam, "dil"};
        const auto I = entropy_and_dirichlet(dil, {Measure::Kind::haar, 1.0}, spec);
        CHECK_THAT(I.mass, Catch::Matchers::WithinRel(I0.mass, 1e-9));  // mass preserved
        CHECK_THAT(I.entropy, Catch::Matchers::WithinAbs(Q * std::log(lam) * I0.mass + I0.entropy, 1e-5));
        CHECK_THAT(I.dirichlet, Catch::Matchers::WithinRel(lam * lam * I0.dirichlet, 1e-5));
    }
}

TEST_CASE("entropy_and_dirichlet: near-constant function against heat(1)") {
    const auto spec = GroupSpec::heisenberg(1);
    TestFunction flat{TestFunction::Kind::gaussian_bump, 60.0, {}, 1.0, "flat"};
    const auto I = entropy_and_dirichlet(flat, {Measure::Kind::heat, 1.0}, spec);
    const double ent_n = I.entropy / I.mass - std::log(I.mass);
    CHECK(std::abs(ent_n) < 0.02);
    CHECK(I.dirichlet / I.mass < 0.005);
}

TEST_CASE("entropy_and_dirichlet: quadrature agrees with Monte Carlo") {
    const auto spec = GroupSpec::heisenberg(1);
    TestFunction tf{TestFunction::Kind::gaussian_bump, 1.5, {}, 1.0, "bump"};
    const auto IQ = entropy_and_dirichlet(tf, {Measure::Kind::heat, 1.0}, spec);
    sampler::PathConfig cfg;
    cfg.paths = 40000;
    cfg.seed = 99;
    const auto IM = entropy_and_dirichlet_mc(tf, 1.0, spec, cfg);
    CHECK_THAT(IQ.mass, Catch::Matchers::WithinAbs(IM.value.mass, 3.5 * IM.std_error.mass));
    CHECK_THAT(IQ.entropy, Catch::Matchers::WithinAbs(IM.value.entropy, 3.5 * IM.std_error.entropy));
    CHECK_THAT(IQ.dirichlet,
               Catch::Matchers::WithinAbs(IM.value.dirichlet, 3.5 * IM.std_error.dirichlet));
}

TEST_CASE("dls_verify: certified pair gives nonnegative margins") {
    const auto spec = GroupSpec::heisenberg(1);
    potential::MinWOptions mopt;
    mopt.grid = 96;
    const auto cert = eta_certificate(5.0, spec, mopt);
    std::vector<TestFunction> sub;
    const auto fam = standard_family(spec);
    sub.push_back(fam[0]);  // wide
    sub.push_back(fam[1]);  // narrow
    sub.push_back(fam[3]);  // translated-d6
    sub.push_back(fam[7]);  // dilated-4
    const auto rep = dls_verify(5.0, cert.eta, 1.0, sub, spec);
    CHECK(rep.pass);
    CHECK(rep.min_margin >= -1e-6);
    // wide bump margin is approximately eta (entropy ~ 0 for near-constant f)
    CHECK_THAT(rep.rows[0].margin, Catch::Matchers::WithinAbs(cert.eta, 0.6));
}

TEST_CASE("groundstate_margins: theta = 4 divergence witness, theta = 5 bounded") {
    const auto spec = GroupSpec::heisenberg(1);
    const std::vector<double> dists{3.0, 6.0, 9.0, 12.0};
    const auto at4 = groundstate_margins(4.0, 0.0, spec, dists);
    for (std::size_t i = 1; i < at4.size(); ++i) CHECK(at4[i].margin < at4[i - 1].margin - 0.05);
    // the decay tracks -m log d(v)
    const double drop = at4.front().margin - at4.back().margin;
    CHECK_THAT(drop, Catch::Matchers::WithinAbs(std::log(12.0 / 3.0), 0.25));

    const auto at5 = groundstate_margins(5.0, 0.0, spec, dists);
    for (const auto& row : at5) CHECK(row.margin > 0.0);
    CHECK(at5.back().margin > at5.front().margin);  // (theta-4) d^2/16 growth
}

TEST_CASE("groundstate_check: transform identities hold on the family") {
    const auto spec = GroupSpec::heisenberg(1);
    const auto fam = standard_family(spec);
    for (const auto& tf : {fam[0], fam[1], fam[3]}) {
        const auto res = groundstate_check(tf, spec);
        INFO(tf.name);
        CHECK(res.entropy_identity <= 1e-4);
        CHECK(res.dirichlet_identity <= 1e-4);
    }
}

TEST_CASE("log-form inequality on the Haar-normalized family") {
    const auto spec = GroupSpec::heisenberg(1);
    const double C = sobolev_const(1, 1);
    for (const auto& tf : standard_family(spec)) {
        const auto I = entropy_and_dirichlet(tf, {Measure::Kind::haar, 1.0}, spec);
        const double ent = I.entropy / I.mass - std::log(I.mass);
        const double dir = I.dirichlet / I.mass;
        INFO(tf.name);
        CHECK(ent <= 2.0 * std::log(C * dir) + 1e-6);
    }
}

TEST_CASE("gaussian_like_constants: formula, stability, margins") {
    const auto spec = GroupSpec::heisenberg(1);
    const auto gc = gaussian_like_constants(spec);
    CHECK_THAT(gc.K_nm,
               Catch::Matchers::WithinRel(2.0 * std::log(sobolev_const(1, 1) / std::exp(1.0)) + 5.0,
                                          1e-13));
    CHECK(gc.c > 0.0);
    CHECK(std::isfinite(gc.c));
    CHECK(gc.c_err < 1e-8);
    // independent quadrature value (frozen from a fine reference run)
    CHECK_THAT(gc.c, Catch::Matchers::WithinRel(6.60700609900, 1e-8));

    std::vector<TestFunction> sub;
    const auto fam = standard_family(spec);
    sub.push_back(fam[0]);
    sub.push_back(fam[4]);  // translated-d9
    sub.push_back(fam[6]);  // dilated-quarter
    const auto rep = margin_report(2.0, gc.K_nm, {Measure::Kind::gaussian_like, 1.0}, sub, spec);
    CHECK(rep.pass);
    CHECK(rep.min_margin >= -1e-6);
}

TEST_CASE("heat-field interpolation matches direct evaluation") {
    const auto spec = GroupSpec::heisenberg(1);
    const auto hf = HeatFields::build(spec, 50.0, 30.0, 64, true);
    // interior points tight; the outer corner of the fit window is loose, and
    // its users only reach it with exponentially small weights
    for (auto [R, z, tol] : {std::tuple{0.3, 0.1, 1e-5}, {3.0, 2.0, 1e-5}, {20.0, 10.0, 1e-4},
                             {45.0, 28.0, 5e-2}, {0.0, 14.0, 1e-3}, {1.3, 0.0, 1e-6}}) {
        const auto ds = heatkernel::kernel_derivs_w({R, z}, spec);
        CHECK_THAT(hf.log_density(R, z), Catch::Matchers::WithinAbs(ds.p00.log_value(), tol));
        CHECK_THAT(hf.q10(R, z), Catch::Matchers::WithinAbs(ds.p10.value / ds.p00.value, tol));
        const double w_direct = potential::w_potential({R, z}, {5.0, 1.0}, spec);
        CHECK_THAT(hf.w_value(R, z, 5.0, 1),
                   Catch::Matchers::WithinAbs(w_direct, tol * (1.0 + 5.0 * R)));
    }
}

TEST_CASE("herbst_chain: defect-free form, envelope, moment fallback") {
    {
        const auto hb = herbst_chain(0.0, 5.0, 1.0, 0.0);
        CHECK(hb.B == 0.0);
        CHECK(hb.tail_valid(2.5));
        CHECK_THAT(hb.tail(4.0), Catch::Matchers::WithinRel(std::exp(-16.0 / 5.0), 1e-13));
    }
    const double eta = 1.7, K1 = 2.1, theta = 5.0, t = 1.0;
    const auto hb = herbst_chain(eta, theta, t, K1);
    CHECK_THAT(hb.B, Catch::Matchers::WithinRel(K1 + eta, 1e-15));
    for (double lam : {1.0, 2.0, 5.0}) {
        const double exact_exponent = lam * K1 + lam * eta * (1.0 - 1.0 / lam) +
                                      theta * t * lam * (lam - 1.0) / 4.0;
        CHECK(exact_exponent <= std::log(hb.moment_bound(lam)) + 1e-12);
    }
    const auto low = herbst_tail_at(hb, hb.B + theta * t / 4.0);
    CHECK(low.moment_form);
    const auto high = herbst_tail_at(hb, hb.B + theta * t);
    CHECK_FALSE(high.moment_form);
    CHECK_THAT(high.lambda_used, Catch::Matchers::WithinRel(2.0, 1e-13));
}
