#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "htype/chebyshev.hpp"
#include "htype/common.hpp"
#include "htype/geometry.hpp"
#include "htype/heatkernel.hpp"
#include "htype/potential.hpp"
#include "htype/quadrature.hpp"
#include "htype/sampler.hpp"

namespace htype::certificates {

using geometry::GroupSpec;
using geometry::Point;
using geometry::RadialProfile;

// --- closed-form constants ---------------------------------------------------

// Sharp (2, 2*)-Sobolev constant:
// C_{n,m} = 4^{2m/Q} / (2n (Q-2) pi^{(2n+m)/Q}) (Gamma(2n+m)/Gamma((2n+m)/2))^{1/Q}
inline double sobolev_const(int n, int m) {
    if (n < 1 || m < 1) throw std::invalid_argument("sobolev_const: n, m must be >= 1");
    const double Q = 2.0 * (n + m);
    return std::pow(4.0, 2.0 * m / Q) / (2.0 * n * (Q - 2.0) * std::pow(pi, (2.0 * n + m) / Q)) *
           std::exp((std::lgamma(2.0 * n + m) - std::lgamma(0.5 * (2.0 * n + m))) / Q);
}

// Minimum of delta -> alpha delta^2 - beta log(delta) + gamma over (0, inf):
// attained at delta0 = sqrt(beta/(2 alpha)), with minimal value
// (beta/2) log(e^{1 + 2 gamma/beta} 2 alpha / beta) <= alpha + gamma.
struct ElementaryMin {
    double delta0;
    double fmin;
};

inline ElementaryMin elementary_min(double alpha, double beta, double gamma) {
    if (!(alpha > 0) || !(beta > 0))
        throw std::invalid_argument("elementary_min: alpha, beta must be > 0");
    const double delta0 = std::sqrt(beta / (2.0 * alpha));
    const double fmin = 0.5 * beta * (1.0 + 2.0 * gamma / beta + std::log(2.0 * alpha / beta));
    return {delta0, fmin};
}

// (m+n) log((m+n) C_{n,m} / (e tau))
inline double cor27_constant(double tau, int n, int m) {
    if (!(tau > 0)) throw std::invalid_argument("cor27_constant: tau must be > 0");
    return (m + n) * std::log((m + n) * sobolev_const(n, m) / (std::exp(1.0) * tau));
}

// lower bound sqrt((3n+5)/(3n+1)) for the gradient-commutation constant
inline double be_lower_bound(int n) {
    if (n < 1) throw std::invalid_argument("be_lower_bound: n must be >= 1");
    return std::sqrt((3.0 * n + 5.0) / (3.0 * n + 1.0));
}

// --- eta certificate ----------------------------------------------------------

struct EtaCertificate {
    double theta;
    int n, m;
    double c_nm;
    potential::MinWResult min_w;
    double eta;
    bool certified;
};

// eta = (m+n) log((m+n) C_{n,m}/(e theta)) - min W_{1,theta}; independent of t.
inline EtaCertificate eta_certificate(double theta, const GroupSpec& spec,
                                      potential::MinWOptions opt = {}) {
    if (!(theta > 4.0)) throw std::invalid_argument("eta_certificate: theta must be > 4");
    EtaCertificate cert;
    cert.theta = theta;
    cert.n = spec.n;
    cert.m = spec.m;
    cert.c_nm = sobolev_const(spec.n, spec.m);
    cert.min_w = potential::min_w(theta, spec, {}, opt);
    cert.eta = cor27_constant(theta, spec.n, spec.m) - cert.min_w.min_value;
    cert.certified = cert.min_w.certified;
    return cert;
}

// --- test-function family -----------------------------------------------------

inline constexpr const char* family_version = "family-v1";

// Gaussian bump exp(-(|x|^2 + |z|^2)/w^2), optionally group-translated
// (f_v = f(v . g)) or dilated (lambda^{Q/2} f(delta_lambda g)).
struct TestFunction {
    enum class Kind { gaussian_bump, translated_bump, dilated };
    Kind kind = Kind::gaussian_bump;
    double width = 1.0;
    Point shift;         // v for translated_bump
    double lambda = 1.0; // for dilated
    std::string name = "bump";
};

struct TfValues {
    double log_f;
    double grad_ratio;  // |grad f|^2 / f^2
};

namespace detail {

inline double bump_phi(const Point& g, double w) {
    double s = 0.0;
    for (double c : g.x) s += c * c;
    for (double c : g.z) s += c * c;
    return -s / (w * w);
}

// |grad phi|^2 = (4 |x|^2 / w^4)(1 + |z|^2/4) for phi = -(|x|^2+|z|^2)/w^2
inline double bump_grad_phi_sq(const Point& g, double w) {
    double x2 = 0.0, z2 = 0.0;
    for (double c : g.x) x2 += c * c;
    for (double c : g.z) z2 += c * c;
    return 4.0 * x2 / (w * w * w * w) * (1.0 + 0.25 * z2);
}

// frame components of grad phi: X_j phi = -(2/w^2)(x_j + sum_k z_k (J_k x)_j / 2)
inline std::vector<double> bump_grad_phi(const GroupSpec& spec, const Point& g, double w) {
    std::vector<double> out(g.x.size());
    for (std::size_t j = 0; j < g.x.size(); ++j) out[j] = g.x[j];
    for (int k = 0; k < spec.m; ++k) {
        const auto jx = geometry::j_apply(spec, k, g.x);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += 0.5 * g.z[k] * jx[j];
    }
    for (auto& c : out) c *= -2.0 / (w * w);
    return out;
}

}  // namespace detail

inline TfValues tf_values(const TestFunction& tf, const GroupSpec& spec, const Point& g) {
    switch (tf.kind) {
        case TestFunction::Kind::gaussian_bump:
            return {detail::bump_phi(g, tf.width), detail::bump_grad_phi_sq(g, tf.width)};
        case TestFunction::Kind::translated_bump: {
            // left-invariance: |grad (f o L_v)| = |grad f| o L_v
            const Point h = geometry::group_mul(spec, tf.shift, g);
            return {detail::bump_phi(h, tf.width), detail::bump_grad_phi_sq(h, tf.width)};
        }
        case TestFunction::Kind::dilated: {
            const Point h = geometry::dilate(spec, tf.lambda, g);
            const double Q = spec.homogeneous_dim();
            return {0.5 * Q * std::log(tf.lambda) + detail::bump_phi(h, tf.width),
                    tf.lambda * tf.lambda * detail::bump_grad_phi_sq(h, tf.width)};
        }
    }
    throw std::logic_error("tf_values: unreachable");
}

inline double tf_eval(const TestFunction& tf, const GroupSpec& spec, const Point& g) {
    return std::exp(tf_values(tf, spec, g).log_f);
}

// frame components of grad f / f
inline std::vector<double> tf_grad_ratio_vec(const TestFunction& tf, const GroupSpec& spec,
                                             const Point& g) {
    switch (tf.kind) {
        case TestFunction::Kind::gaussian_bump:
            return detail::bump_grad_phi(spec, g, tf.width);
        case TestFunction::Kind::translated_bump:
            return detail::bump_grad_phi(spec, geometry::group_mul(spec, tf.shift, g), tf.width);
        case TestFunction::Kind::dilated: {
            auto v = detail::bump_grad_phi(spec, geometry::dilate(spec, tf.lambda, g), tf.width);
            for (auto& c : v) c *= tf.lambda;
            return v;
        }
    }
    throw std::logic_error("tf_grad_ratio_vec: unreachable");
}

// The fixed, versioned verification family: wide and narrow bumps, a chain of
// group-translated bumps reaching into the tail, and two dilations.
inline std::vector<TestFunction> standard_family(const GroupSpec& spec) {
    std::vector<TestFunction> fam;
    fam.push_back({TestFunction::Kind::gaussian_bump, 3.0, {}, 1.0, "wide-bump"});
    fam.push_back({TestFunction::Kind::gaussian_bump, 1.0, {}, 1.0, "narrow-bump"});
    for (double d : {3.0, 6.0, 9.0, 12.0}) {
        TestFunction tf;
        tf.kind = TestFunction::Kind::translated_bump;
        tf.width = 1.0;
        tf.shift = geometry::identity(spec);
        tf.shift.x[0] = d;  // x-axis translation: d(v) = |x_v|
        tf.name = "translated-d" + std::to_string(static_cast<int>(d));
        fam.push_back(tf);
    }
    for (double lam : {0.25, 4.0}) {
        TestFunction tf;
        tf.kind = TestFunction::Kind::dilated;
        tf.width = 1.0;
        tf.lambda = lam;
        tf.name = lam < 1 ? "dilated-quarter" : "dilated-4";
        fam.push_back(tf);
    }
    return fam;
}

// --- measures and integration -------------------------------------------------

struct Measure {
    enum class Kind { haar, heat, gaussian_like };
    Kind kind = Kind::heat;
    double t = 1.0;
};

struct QuadOptions {
    int nodes = 64;        // per dimension, 3-D boxes
    int nodes_high = 18;   // per dimension above 3 dimensions
    double pad = 7.0;      // support box half-width in bump widths
    int interp_nodes = 64; // Chebyshev degree per axis for the heat density
};

struct CoordBox {
    std::vector<double> lo, hi;
};

// axis-aligned bounding box of the support in group coordinates
inline CoordBox support_box(const TestFunction& tf, const GroupSpec& spec, double pad) {
    const int dim_x = spec.first_layer_dim(), dim_z = spec.center_dim();
    const double r = pad * tf.width;
    CoordBox base{std::vector<double>(dim_x + dim_z, -r), std::vector<double>(dim_x + dim_z, r)};
    if (tf.kind == TestFunction::Kind::gaussian_bump) return base;
    if (tf.kind == TestFunction::Kind::dilated) {
        for (int i = 0; i < dim_x; ++i) {
            base.lo[i] /= tf.lambda;
            base.hi[i] /= tf.lambda;
        }
        for (int i = dim_x; i < dim_x + dim_z; ++i) {
            base.lo[i] /= tf.lambda * tf.lambda;
            base.hi[i] /= tf.lambda * tf.lambda;
        }
        return base;
    }
    // translated: support is v^{-1} . B; the map g' -> v^{-1} g' is affine
    // with z affine in x', so corners of the x-box give the z extremes
    const Point vinv = geometry::group_inv(tf.shift);
    CoordBox out{std::vector<double>(dim_x + dim_z), std::vector<double>(dim_x + dim_z)};
    for (int i = 0; i < dim_x; ++i) {
        out.lo[i] = vinv.x[i] - r;
        out.hi[i] = vinv.x[i] + r;
    }
    for (int k = 0; k < dim_z; ++k) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int corner = 0; corner < (1 << dim_x); ++corner) {
            Point gp = geometry::identity(spec);
            for (int i = 0; i < dim_x; ++i) gp.x[i] = (corner >> i & 1) ? r : -r;
            const auto br = geometry::bracket(spec, vinv.x, gp.x);
            const double zk = vinv.z[k] + 0.5 * br[k];
            lo = std::min(lo, zk);
            hi = std::max(hi, zk);
        }
        out.lo[dim_x + k] = lo - r;
        out.hi[dim_x + k] = hi + r;
    }
    return out;
}

// Chebyshev surrogate of the reduced heat density (and, optionally, of the
// derivative ratios the ground-state identities need) over a profile window.
// Fitted against u = sqrt(R): the distance d^2/4 ~ pi z - 2 sqrt(pi z R)
// near the R = 0 edge, so log p is smooth in (u, z) but not in (R, z).
class HeatFields {
  public:
    static HeatFields build(const GroupSpec& spec, double R_max, double z_max, int nodes,
                            bool with_ratios) {
        HeatFields hf;
        const double u_max = std::sqrt(std::max(R_max, 1e-3));
        z_max = std::max(z_max, 1e-3);
        if (with_ratios) {
            std::vector<heatkernel::DerivSet> cache;
            auto fit_field = [&](auto&& pick) {
                std::size_t idx = 0;
                return interp::Cheb2D::fit(
                    [&](double u, double z) {
                        if (idx < cache.size()) return pick(cache[idx++]);
                        cache.push_back(heatkernel::kernel_derivs_w({u * u, z}, spec));
                        ++idx;
                        return pick(cache.back());
                    },
                    0.0, u_max, 0.0, z_max, nodes, nodes);
            };
            // first pass fills the cache in fit order; later passes replay it
            hf.logp_ = fit_field([](const heatkernel::DerivSet& d) { return d.p00.log_value(); });
            hf.q10_ = fit_field([](const heatkernel::DerivSet& d) { return d.p10.value / d.p00.value; });
            hf.q01_ = fit_field([](const heatkernel::DerivSet& d) { return d.p01.value / d.p00.value; });
            hf.q20_ = fit_field([](const heatkernel::DerivSet& d) { return d.p20.value / d.p00.value; });
            hf.q02_ = fit_field([](const heatkernel::DerivSet& d) { return d.p02.value / d.p00.value; });
            hf.has_ratios_ = true;
        } else {
            hf.logp_ = interp::Cheb2D::fit(
                [&](double u, double z) {
                    return heatkernel::kernel_deriv({u * u, z}, {0, 0}, spec).log_value();
                },
                0.0, u_max, 0.0, z_max, nodes, nodes);
        }
        return hf;
    }

    double log_density(double R, double z) const { return logp_.eval(std::sqrt(R), z); }
    double q10(double R, double z) const { return q10_.eval(std::sqrt(R), z); }
    double q01(double R, double z) const { return q01_.eval(std::sqrt(R), z); }
    double q20(double R, double z) const { return q20_.eval(std::sqrt(R), z); }
    double q02(double R, double z) const { return q02_.eval(std::sqrt(R), z); }
    bool has_ratios() const { return has_ratios_; }

    // W_{1,C} assembled from the interpolated fields (m = 1 form)
    double w_value(double R, double z, double C, int n) const {
        const double a = q10(R, z), b = q01(R, z);
        return -R * C / 4.0 * (a * a + b * b) +
               C / 2.0 * (R * q20(R, z) + R * q02(R, z) + n * a) + log_density(R, z);
    }

  private:
    interp::Cheb2D logp_, q10_, q01_, q20_, q02_;
    bool has_ratios_ = false;
};

struct Integrals {
    double entropy = 0.0;    // Int f^2 log f^2 dnu
    double dirichlet = 0.0;  // Int |grad f|^2 dnu
    double mass = 0.0;       // Int f^2 dnu
};

namespace detail {

template <class F>
void tensor_iterate(const CoordBox& box, const std::vector<double>& gx,
                    const std::vector<double>& gw, F&& body) {
    const int dims = static_cast<int>(box.lo.size());
    std::vector<int> idx(dims, 0);
    std::vector<double> coord(dims);
    const int N = static_cast<int>(gx.size());
    while (true) {
        double w = 1.0;
        for (int d = 0; d < dims; ++d) {
            const double half = 0.5 * (box.hi[d] - box.lo[d]);
            coord[d] = 0.5 * (box.lo[d] + box.hi[d]) + half * gx[idx[d]];
            w *= half * gw[idx[d]];
        }
        body(coord, w);
        int d = 0;
        while (d < dims && ++idx[d] == N) idx[d++] = 0;
        if (d == dims) break;
    }
}

inline double log_weight(const Measure& mu, const GroupSpec& spec,
                         const std::optional<HeatFields>& hf, const Point& g) {
    switch (mu.kind) {
        case Measure::Kind::haar:
            return 0.0;
        case Measure::Kind::heat: {
            const auto prof = geometry::profile_of(g);
            return hf->log_density(prof.R / mu.t, prof.zeta / mu.t) -
                   (spec.n + spec.m) * std::log(mu.t);
        }
        case Measure::Kind::gaussian_like:
            return -0.5 * geometry::sr_distance_sq(geometry::profile_of(g));
    }
    return 0.0;
}

inline std::optional<HeatFields> fields_for(const Measure& mu, const GroupSpec& spec,
                                            const CoordBox& box, const QuadOptions& opt,
                                            bool with_ratios = false) {
    if (mu.kind != Measure::Kind::heat && !with_ratios) return std::nullopt;
    double x2 = 0.0, z2 = 0.0;
    const int dim_x = spec.first_layer_dim();
    for (int i = 0; i < dim_x; ++i) x2 += sq(std::max(std::abs(box.lo[i]), std::abs(box.hi[i])));
    for (int k = 0; k < spec.m; ++k)
        z2 += sq(std::max(std::abs(box.lo[dim_x + k]), std::abs(box.hi[dim_x + k])));
    const double t = mu.kind == Measure::Kind::heat ? mu.t : 1.0;
    return HeatFields::build(spec, 0.26 * x2 / t + 0.5, 1.05 * std::sqrt(z2) / t + 0.5,
                             opt.interp_nodes, with_ratios);
}

}  // namespace detail

namespace detail {

// Quadrature parameterization. Translated bumps integrate over the
// axis-aligned base-bump box mapped by h -> v^{-1} h (unit Jacobian, Haar
// invariance): integrating them directly would put a sheared width-w ridge
// across the z-range. Everything else integrates in plain coordinates.
struct BaseDomain {
    CoordBox box;
    Point map_ref;  // v^{-1} for translated bumps
    double jac = 1.0;
    bool translate = false;
};

// effective support half-widths of the measure itself (beyond these the
// weight is below e^{-45} of its peak); used to clip oversized bump boxes
inline void measure_clip(const Measure& mu, const GroupSpec& spec, CoordBox& box) {
    double x_half = 0.0, z_half = 0.0;
    switch (mu.kind) {
        case Measure::Kind::haar:
            return;
        case Measure::Kind::heat:
            x_half = 14.0 * std::sqrt(mu.t);
            z_half = 15.0 * mu.t;
            break;
        case Measure::Kind::gaussian_like:
            x_half = 14.0;
            z_half = 15.0;
            break;
    }
    for (int i = 0; i < spec.first_layer_dim(); ++i) {
        box.lo[i] = std::max(box.lo[i], -x_half);
        box.hi[i] = std::min(box.hi[i], x_half);
    }
    for (int k = 0; k < spec.m; ++k) {
        auto& lo = box.lo[spec.first_layer_dim() + k];
        auto& hi = box.hi[spec.first_layer_dim() + k];
        lo = std::max(lo, -z_half);
        hi = std::min(hi, z_half);
    }
}

inline BaseDomain base_domain(const TestFunction& tf, const GroupSpec& spec, double pad,
                              const Measure& mu) {
    BaseDomain dom;
    dom.map_ref = geometry::identity(spec);
    if (tf.kind == TestFunction::Kind::translated_bump) {
        // integrate over the axis-aligned base box, mapped by h -> v^{-1} h;
        // clipping would discard the overlap region that carries all the mass
        const int dims = spec.first_layer_dim() + spec.center_dim();
        const double r = pad * tf.width;
        dom.box = {std::vector<double>(dims, -r), std::vector<double>(dims, r)};
        dom.map_ref = geometry::group_inv(tf.shift);
        dom.translate = true;
        return dom;
    }
    // plain and dilated bumps: direct coordinates, box clipped to where the
    // measure lives (a quarter-dilation spreads the bump far beyond it)
    dom.box = support_box(tf, spec, pad);
    measure_clip(mu, spec, dom.box);
    return dom;
}

inline void base_to_group(const BaseDomain& dom, const GroupSpec& spec,
                          const std::vector<double>& coord, Point& g) {
    for (int i = 0; i < spec.first_layer_dim(); ++i) g.x[i] = coord[i];
    for (int k = 0; k < spec.m; ++k) g.z[k] = coord[spec.first_layer_dim() + k];
    if (dom.translate) g = geometry::group_mul(spec, dom.map_ref, g);
}

}  // namespace detail

// The three integrals of the defective inequality, by tensor Gauss-Legendre
// quadrature over the support box (direct quadrature up to 5 dimensions).
inline Integrals entropy_and_dirichlet(const TestFunction& tf, const Measure& mu,
                                       const GroupSpec& spec, const QuadOptions& opt = {}) {
    if (!spec.concrete())
        throw std::invalid_argument("entropy_and_dirichlet: concrete model required");
    const int dims = spec.first_layer_dim() + spec.center_dim();
    if (dims > 5)
        throw std::invalid_argument(
            "entropy_and_dirichlet: direct quadrature limited to 2n+m <= 5; use the Monte Carlo "
            "path");
    const auto hf = detail::fields_for(mu, spec, support_box(tf, spec, opt.pad), opt);
    const auto dom = detail::base_domain(tf, spec, opt.pad, mu);
    std::vector<double> gx, gw;
    quad::gauss_legendre(dims <= 3 ? opt.nodes : opt.nodes_high, gx, gw);

    Integrals out;
    Point g = geometry::identity(spec);
    detail::tensor_iterate(dom.box, gx, gw, [&](const std::vector<double>& coord, double w) {
        detail::base_to_group(dom, spec, coord, g);
        const auto tv = tf_values(tf, spec, g);
        const double lw = detail::log_weight(mu, spec, hf, g);
        const double f2w = std::exp(2.0 * tv.log_f + lw) * dom.jac;
        out.mass += w * f2w;
        out.entropy += w * f2w * 2.0 * tv.log_f;
        out.dirichlet += w * f2w * tv.grad_ratio;
    });
    return out;
}

// Monte Carlo fallback for the heat measure (any concrete model).
struct IntegralsMC {
    Integrals value;
    Integrals std_error;
};

inline IntegralsMC entropy_and_dirichlet_mc(const TestFunction& tf, double t,
                                            const GroupSpec& spec,
                                            const sampler::PathConfig& cfg) {
    sampler::PathConfig c = cfg;
    c.t = t;
    const auto batch = sampler::simulate(spec, c);
    auto acc = [&](auto&& fn) { return sampler::estimate_mean(batch, fn); };
    const auto mass = acc([&](const Point& g) { return std::exp(2.0 * tf_values(tf, spec, g).log_f); });
    const auto ent = acc([&](const Point& g) {
        const auto tv = tf_values(tf, spec, g);
        return std::exp(2.0 * tv.log_f) * 2.0 * tv.log_f;
    });
    const auto dir = acc([&](const Point& g) {
        const auto tv = tf_values(tf, spec, g);
        return std::exp(2.0 * tv.log_f) * tv.grad_ratio;
    });
    return {{ent.value, dir.value, mass.value}, {ent.std_error, dir.std_error, mass.std_error}};
}

// --- margin verification --------------------------------------------------

struct Margin {
    std::string function;
    double entropy;    // normalized: Int f^2 log f^2, with Int f^2 dnu = 1
    double dirichlet;  // normalized
    double mass;       // raw mass before normalization
    double margin;     // offset + grad_coeff * dirichlet - entropy
};

struct MarginReport {
    std::vector<Margin> rows;
    double min_margin = std::numeric_limits<double>::infinity();
    bool pass = false;
};

inline MarginReport margin_report(double grad_coeff, double offset, const Measure& mu,
                                  const std::vector<TestFunction>& family, const GroupSpec& spec,
                                  const QuadOptions& opt = {}, double tol = 1e-6) {
    MarginReport rep;
    for (const auto& tf : family) {
        const auto I = entropy_and_dirichlet(tf, mu, spec, opt);
        Margin m;
        m.function = tf.name;
        m.mass = I.mass;
        m.entropy = I.entropy / I.mass - std::log(I.mass);
        m.dirichlet = I.dirichlet / I.mass;
        m.margin = offset + grad_coeff * m.dirichlet - m.entropy;
        rep.min_margin = std::min(rep.min_margin, m.margin);
        rep.rows.push_back(std::move(m));
    }
    rep.pass = rep.min_margin >= -tol;
    return rep;
}

// margins of Ent_{mu_t}(f^2) <= eta + theta t Int |grad f|^2 dmu_t
inline MarginReport dls_verify(double theta, double eta, double t,
                               const std::vector<TestFunction>& family, const GroupSpec& spec,
                               const QuadOptions& opt = {}, double tol = 1e-6) {
    return margin_report(theta * t, eta, Measure{Measure::Kind::heat, t}, family, spec, opt, tol);
}

// --- ground-state transform residuals ---------------------------------------

struct GroundstateResiduals {
    double entropy_identity;    // relative residual
    double dirichlet_identity;  // relative residual
};

// With rho = p_1 and g = f rho^{1/2}:
//   Int g^2 log g^2 dmu = Int f^2 log f^2 rho dmu + Int g^2 xi dmu
//   Int |grad g|^2 dmu  = Int |grad f|^2 rho dmu - 1/4 Int g^2 |grad xi|^2 dmu
//                         + 1/2 Int <grad(g^2), grad xi> dmu
// (the distributional Lap xi term integrated by parts). The left sides go
// through frame finite differences of g itself; the right sides use the
// interpolated derivative ratios, making the two routes independent.
inline GroundstateResiduals groundstate_check(const TestFunction& tf, const GroupSpec& spec,
                                              const QuadOptions& opt = {48, 18, 7.0, 48}) {
    if (spec.first_layer_dim() + spec.center_dim() > 3)
        throw std::invalid_argument("groundstate_check: implemented for the 3-D model");
    const CoordBox box = support_box(tf, spec, opt.pad);
    const auto hf = detail::fields_for(Measure{Measure::Kind::heat, 1.0}, spec, box, opt, true);

    // scalar closed forms of log f and the H^1 frame shifts; the inner loop
    // runs FD stencils per node, so it must stay allocation-free
    const double w2 = tf.width * tf.width;
    const double vx = tf.kind == TestFunction::Kind::translated_bump ? tf.shift.x[0] : 0.0;
    const double vy = tf.kind == TestFunction::Kind::translated_bump ? tf.shift.x[1] : 0.0;
    const double vz = tf.kind == TestFunction::Kind::translated_bump ? tf.shift.z[0] : 0.0;
    const double lam = tf.kind == TestFunction::Kind::dilated ? tf.lambda : 1.0;
    const double logf_off = tf.kind == TestFunction::Kind::dilated
                                ? 0.5 * spec.homogeneous_dim() * std::log(lam)
                                : 0.0;
    auto log_f = [&](double X, double Y, double Z) {
        const double hx = lam * (vx + X), hy = lam * (vy + Y);
        const double hz = lam * lam * (vz + Z + 0.5 * (vy * X - vx * Y));
        return logf_off - (hx * hx + hy * hy + hz * hz) / w2;
    };
    auto log_g = [&](double X, double Y, double Z) {
        return log_f(X, Y, Z) + 0.5 * hf->log_density(0.25 * (X * X + Y * Y), std::abs(Z));
    };

    std::vector<double> gx, gw;
    quad::gauss_legendre(opt.nodes, gx, gw);
    double lhs1 = 0, rhs1a = 0, rhs1b = 0;
    double lhs2 = 0, rhs2a = 0, rhs2b = 0, rhs2c = 0;
    Point g = geometry::identity(spec);
    const double step = 1e-3 * tf.width;
    const auto dom = detail::base_domain(tf, spec, opt.pad, Measure{Measure::Kind::heat, 1.0});
    detail::tensor_iterate(dom.box, gx, gw, [&](const std::vector<double>& coord, double wq) {
        const double w = wq * dom.jac;
        detail::base_to_group(dom, spec, coord, g);
        const double X = g.x[0], Y = g.x[1], Z = g.z[0];
        const auto tv = tf_values(tf, spec, g);
        const auto prof = geometry::profile_of(g);
        const double xi = hf->log_density(prof.R, prof.zeta);
        const double g2 = std::exp(2.0 * tv.log_f + xi);

        lhs1 += w * g2 * (2.0 * tv.log_f + xi);
        rhs1a += w * g2 * 2.0 * tv.log_f;
        rhs1b += w * g2 * xi;

        // frame derivatives of g and g^2 along X = d_x + (y/2) d_z and
        // Y = d_y - (x/2) d_z, via the one-parameter subgroup shifts
        const double gXp = std::exp(log_g(X + step, Y, Z + 0.5 * step * Y));
        const double gXm = std::exp(log_g(X - step, Y, Z - 0.5 * step * Y));
        const double gYp = std::exp(log_g(X, Y + step, Z - 0.5 * step * X));
        const double gYm = std::exp(log_g(X, Y - step, Z + 0.5 * step * X));
        const double dgX = (gXp - gXm) / (2.0 * step);
        const double dgY = (gYp - gYm) / (2.0 * step);
        lhs2 += w * (dgX * dgX + dgY * dgY);

        rhs2a += w * std::exp(2.0 * tv.log_f + xi) * tv.grad_ratio;  // |grad f|^2 rho

        const double q10 = hf->q10(prof.R, prof.zeta);
        const double q01 = hf->q01(prof.R, prof.zeta);
        rhs2b += w * g2 * prof.R * (q10 * q10 + q01 * q01);  // g^2 |grad xi|^2

        // <grad(g^2), grad xi>: FD on g^2, analytic frame components of
        // grad xi = (x/2) q10 + sgn(z) q01 J x / 2
        const double sgn = Z >= 0 ? 1.0 : -1.0;
        const double xiX = 0.5 * X * q10 + 0.5 * sgn * q01 * Y;
        const double xiY = 0.5 * Y * q10 - 0.5 * sgn * q01 * X;
        const double dg2X = (gXp * gXp - gXm * gXm) / (2.0 * step);
        const double dg2Y = (gYp * gYp - gYm * gYm) / (2.0 * step);
        rhs2c += w * (dg2X * xiX + dg2Y * xiY);
    });

    GroundstateResiduals out;
    out.entropy_identity = std::abs(lhs1 - rhs1a - rhs1b) / std::max(1.0, std::abs(lhs1));
    out.dirichlet_identity =
        std::abs(lhs2 - (rhs2a - 0.25 * rhs2b + 0.5 * rhs2c)) / std::max(1.0, std::abs(lhs2));
    return out;
}

// --- ground-state (Haar-side) stress margins ----------------------------------

struct GroundstateMarginRow {
    double dist;     // d(v) of the translation
    double w_term;   // Int g_v^2 W_{1,theta} dmu
    double margin;   // eta + theta Dir_H(g) + w_term - Ent_H(g)
};

// Margins of the ground-state form of the defective inequality under the
// translated family g_v = g(v .): by Haar invariance only the potential term
// Int g_v^2 W_{1,theta} dmu moves, and it tracks sup W_{1,theta} near v^{-1}.
// At theta = 4 the margins decrease without bound (slowly, like -m log d(v)):
// the numerical witness that no additive constant rescues theta = 4. The
// translation enters on the Haar side; translating the heat-measure test
// function instead does not produce the divergence.
inline std::vector<GroundstateMarginRow> groundstate_margins(double theta, double eta,
                                                             const GroupSpec& spec,
                                                             const std::vector<double>& dists,
                                                             double width = 1.0,
                                                             QuadOptions opt = {48, 18, 7.0, 64}) {
    if (spec.first_layer_dim() + spec.center_dim() > 3)
        throw std::invalid_argument("groundstate_margins: implemented for the 3-D model");
    if (!(theta > 0)) throw std::invalid_argument("groundstate_margins: theta must be > 0");
    // translation-invariant ingredients of the reference bump
    TestFunction g0{TestFunction::Kind::gaussian_bump, width, {}, 1.0, "gs-bump"};
    const auto IH = entropy_and_dirichlet(g0, {Measure::Kind::haar, 1.0}, spec, opt);
    const double ent_h = IH.entropy / IH.mass - std::log(IH.mass);
    const double dir_h = IH.dirichlet / IH.mass;

    double dmax = 0.0;
    for (double d : dists) dmax = std::max(dmax, d);
    const double r = opt.pad * width;
    const double reach = dmax + r;
    const auto hf = HeatFields::build(spec, 0.26 * reach * reach + 0.5,
                                      1.05 * r * (0.5 * dmax + 1.0) + 0.5, opt.interp_nodes, true);

    std::vector<double> gx, gw;
    quad::gauss_legendre(opt.nodes, gx, gw);
    std::vector<GroundstateMarginRow> out;
    for (double d : dists) {
        Point v = geometry::identity(spec);
        v.x[0] = d;
        TestFunction tf;
        tf.kind = TestFunction::Kind::translated_bump;
        tf.width = width;
        tf.shift = v;
        const auto dom = detail::base_domain(tf, spec, opt.pad, {Measure::Kind::haar, 1.0});
        double wsum = 0.0;
        Point g = geometry::identity(spec);
        detail::tensor_iterate(dom.box, gx, gw, [&](const std::vector<double>& coord, double w) {
            detail::base_to_group(dom, spec, coord, g);
            // g_v^2 at g equals bump^2 at the base coordinate
            double b2 = 0.0;
            for (double c : coord) b2 += c * c;
            const auto prof = geometry::profile_of(g);
            wsum += w * std::exp(-2.0 * b2 / (width * width)) *
                    hf.w_value(prof.R, prof.zeta, theta, spec.n);
        });
        const double w_term = wsum / IH.mass;
        out.push_back({d, w_term, eta + theta * dir_h + w_term - ent_h});
    }
    return out;
}

// --- Gaussian-like measure constants -----------------------------------------

struct GaussianLikeConstants {
    double K_nm;
    double c;      // total mass of e^{-d^2/2} dmu
    double c_err;  // box-stability estimate
};

inline GaussianLikeConstants gaussian_like_constants(const GroupSpec& spec) {
    const int n = spec.n, m = spec.m;
    GaussianLikeConstants out;
    out.K_nm = (n + m) * std::log((n + m) * sobolev_const(n, m) / (2.0 * std::exp(1.0))) +
               2.0 * n + 3.0 * m;

    // c = S_{2n-1} S_{m-1} 2 4^{n-1} Int Int e^{-d^2/2} R^{n-1} zeta^{m-1} dR dzeta
    auto sphere = [](int k) { return 2.0 * std::pow(pi, 0.5 * k) / std::tgamma(0.5 * k); };
    auto panels = [](double hi) {
        std::vector<double> e{0.0};
        for (double x = 0.5; x < hi; x *= 2.0) e.push_back(x);
        e.push_back(hi);
        return e;
    };
    // substituted u = sqrt(R): the distance is smooth in (u, z), not in (R, z)
    auto integral = [&](double R_max, double z_max) {
        std::vector<double> gx, gw;
        quad::gauss_legendre(32, gx, gw);
        const auto pu = panels(std::sqrt(R_max)), pz = panels(z_max);
        double s = 0.0;
        for (std::size_t a = 0; a + 1 < pu.size(); ++a)
            for (std::size_t b = 0; b + 1 < pz.size(); ++b) {
                const double cu = 0.5 * (pu[a] + pu[a + 1]), hu = 0.5 * (pu[a + 1] - pu[a]);
                const double cz = 0.5 * (pz[b] + pz[b + 1]), hz = 0.5 * (pz[b + 1] - pz[b]);
                for (std::size_t i = 0; i < gx.size(); ++i)
                    for (std::size_t j = 0; j < gx.size(); ++j) {
                        const double u = cu + hu * gx[i], z = cz + hz * gx[j];
                        s += hu * hz * gw[i] * gw[j] * 2.0 * u *
                             std::exp(-0.5 * geometry::sr_distance_sq({u * u, z})) *
                             std::pow(u * u, n - 1) * std::pow(z, m - 1);
                    }
            }
        return s;
    };
    const double pref = sphere(2 * n) * sphere(m) * 2.0 * std::pow(4.0, n - 1);
    const double c1 = pref * integral(40.0, 16.0);
    const double c2 = pref * integral(80.0, 32.0);
    out.c = c2;
    out.c_err = std::abs(c2 - c1);
    return out;
}

// --- Herbst chain -------------------------------------------------------------

// From the defective inequality, K(lambda) = lambda^{-1} log Int e^{lambda g}
// satisfies K' <= eta/lambda^2 + theta t/4; integrating from 1 gives
// Int e^{lambda g} <= e^{B lambda + theta t lambda^2/4} with B = K(1) + eta,
// and the Chernoff tail exp(-(r-B)^2/(theta t)) for r >= B + theta t/2.
struct HerbstBound {
    double B;
    double theta;
    double t;
    double eta;
    double K1;

    double moment_bound(double lambda) const {
        return std::exp(B * lambda + theta * t * lambda * lambda / 4.0);
    }
    bool tail_valid(double r) const { return r >= B + theta * t / 2.0; }
    double chernoff_lambda(double r) const { return 2.0 * (r - B) / (theta * t); }
    double tail(double r) const { return std::exp(-sq(r - B) / (theta * t)); }
};

inline HerbstBound herbst_chain(double eta, double theta, double t, double K1) {
    if (!(theta > 4.0) || !(t > 0))
        throw std::invalid_argument("herbst_chain: need theta > 4 and t > 0");
    return {K1 + eta, theta, t, eta, K1};
}

struct HerbstEval {
    double r;
    double bound;
    bool moment_form;  // true when r is below the Chernoff validity threshold
    double lambda_used;
};

inline HerbstEval herbst_tail_at(const HerbstBound& hb, double r) {
    if (hb.tail_valid(r)) return {r, hb.tail(r), false, hb.chernoff_lambda(r)};
    // fall back to the lambda = 1 Markov bound
    return {r, std::exp(-r) * hb.moment_bound(1.0), true, 1.0};
}

}  // namespace htype::certificates
