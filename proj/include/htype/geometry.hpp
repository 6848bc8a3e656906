#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "htype/common.hpp"
#include "htype/specialfn.hpp"

namespace htype::geometry {

enum class Model { heisenberg, quaternionic, radial_only };

// (n, m) with a concrete bracket structure. The first layer has dimension 2n,
// the center dimension m, and the homogeneous dimension is Q = 2n + 2m.
struct GroupSpec {
    int n = 1;
    int m = 1;
    Model model = Model::heisenberg;

    static GroupSpec heisenberg(int n) {
        if (n < 1) throw std::invalid_argument("GroupSpec: n must be >= 1");
        return {n, 1, Model::heisenberg};
    }
    static GroupSpec quaternionic(int n) {
        if (n < 2 || n % 2 != 0)
            throw std::invalid_argument("GroupSpec: quaternionic model needs even n >= 2");
        return {n, 3, Model::quaternionic};
    }
    static GroupSpec radial(int n, int m) {
        if (n < 1 || m < 1) throw std::invalid_argument("GroupSpec: n, m must be >= 1");
        return {n, m, Model::radial_only};
    }

    int first_layer_dim() const { return 2 * n; }
    int center_dim() const { return m; }
    int homogeneous_dim() const { return 2 * n + 2 * m; }
    bool concrete() const { return model != Model::radial_only; }
};

struct Point {
    std::vector<double> x;  // first layer, exponential coordinates
    std::vector<double> z;  // center
};

inline Point identity(const GroupSpec& spec) {
    return {std::vector<double>(spec.first_layer_dim(), 0.0),
            std::vector<double>(spec.center_dim(), 0.0)};
}

// J_{u_k} x for the model's k-th center direction.
//  - heisenberg: J(x, y) = (y, -x) in the basis (x_1..x_n, y_1..y_n), the sign
//    convention matching the frame X_i = d_{x_i} + (y_i/2) d_z,
//    Y_i = d_{y_i} - (x_i/2) d_z.
//  - quaternionic: left multiplication by i, j, k per quaternion block.
inline std::vector<double> j_apply(const GroupSpec& spec, int k, std::span<const double> x) {
    if (!spec.concrete()) throw std::invalid_argument("j_apply: radial-only model has no bracket");
    if (k < 0 || k >= spec.m) throw std::invalid_argument("j_apply: center index out of range");
    std::vector<double> out(x.size());
    if (spec.model == Model::heisenberg) {
        const int n = spec.n;
        for (int i = 0; i < n; ++i) {
            out[i] = x[n + i];
            out[n + i] = -x[i];
        }
        return out;
    }
    for (std::size_t off = 0; off + 4 <= x.size(); off += 4) {
        const double q0 = x[off], q1 = x[off + 1], q2 = x[off + 2], q3 = x[off + 3];
        switch (k) {
            case 0:  // i q
                out[off] = -q1; out[off + 1] = q0; out[off + 2] = -q3; out[off + 3] = q2;
                break;
            case 1:  // j q
                out[off] = -q2; out[off + 1] = q3; out[off + 2] = q0; out[off + 3] = -q1;
                break;
            default:  // k q
                out[off] = -q3; out[off + 1] = -q2; out[off + 2] = q1; out[off + 3] = q0;
                break;
        }
    }
    return out;
}

// [x, x']_k = <J_{u_k} x, x'>
inline std::vector<double> bracket(const GroupSpec& spec, std::span<const double> x,
                                   std::span<const double> xp) {
    std::vector<double> out(spec.m);
    for (int k = 0; k < spec.m; ++k) {
        const auto jx = j_apply(spec, k, x);
        double s = 0.0;
        for (std::size_t i = 0; i < jx.size(); ++i) s += jx[i] * xp[i];
        out[k] = s;
    }
    return out;
}

// (x, z) . (x', z') = (x + x', z + z' + [x, x']/2)
inline Point group_mul(const GroupSpec& spec, const Point& g, const Point& h) {
    if (!spec.concrete())
        throw std::invalid_argument("group_mul: radial-only model has no group law");
    Point out = g;
    for (std::size_t i = 0; i < out.x.size(); ++i) out.x[i] += h.x[i];
    const auto br = bracket(spec, g.x, h.x);
    for (int k = 0; k < spec.m; ++k) out.z[k] += h.z[k] + 0.5 * br[k];
    return out;
}

inline Point group_inv(const Point& g) {
    Point out = g;
    for (auto& c : out.x) c = -c;
    for (auto& c : out.z) c = -c;
    return out;
}

inline Point dilate(const GroupSpec& spec, double lambda, const Point& g) {
    (void)spec;
    if (!(lambda > 0)) throw std::invalid_argument("dilate: lambda must be > 0");
    Point out = g;
    for (auto& c : out.x) c *= lambda;
    for (auto& c : out.z) c *= lambda * lambda;
    return out;
}

// Reduced coordinates (R, |z|) with R = |x|^2/4; all kernel and potential
// evaluations factor through these.
struct RadialProfile {
    double R = 0.0;
    double zeta = 0.0;

    double omega() const { return zeta / R; }
    double delta() const { return std::sqrt(R / (pi * zeta)); }
    double kappa() const { return 2.0 * std::sqrt(pi * zeta * R); }
};

inline RadialProfile profile_of(const Point& g) {
    double x2 = 0.0, z2 = 0.0;
    for (double c : g.x) x2 += c * c;
    for (double c : g.z) z2 += c * c;
    return {0.25 * x2, std::sqrt(z2)};
}

// d^2/4 = zeta y + R y cot y  with y = theta_inv(zeta/R); equals
// R y^2 / sin^2 y. Conventions: d = 2 sqrt(R) on the zeta = 0 axis and
// d^2 = 4 pi zeta on the R = 0 axis.
inline double sr_distance_sq(const RadialProfile& p) {
    if (p.R < 0 || p.zeta < 0) throw std::invalid_argument("sr_distance: negative profile");
    if (p.zeta == 0.0) return 4.0 * p.R;
    if (p.R == 0.0) return 4.0 * pi * p.zeta;
    const auto ti = specialfn::theta_inv(p.zeta / p.R);
    const double s = ti.y < 0.5 * pi ? std::sin(ti.y) : std::sin(ti.gap);
    return 4.0 * p.R * sq(ti.y / s);
}

inline double sr_distance(const RadialProfile& p) { return std::sqrt(sr_distance_sq(p)); }

inline double sr_distance(const GroupSpec& spec, const Point& g) {
    (void)spec;
    return sr_distance(profile_of(g));
}

// --- left-invariant frame by finite differences ------------------------------
//
// X_j f(g) = d/ds f(g . exp(s e_j)) at s = 0; since exp(s e_j) = (s e_j, 0),
// central differences along the one-parameter subgroup realize the frame
// X_j = d_{e_j} + A(x, e_j, grad_z)/2 without forming the A tensor.

namespace detail {

inline Point frame_step(const GroupSpec& spec, const Point& g, int j, double s) {
    Point e = identity(spec);
    e.x[j] = s;
    return group_mul(spec, g, e);
}

}  // namespace detail

template <class F>
double frame_deriv(const GroupSpec& spec, F&& f, const Point& g, int j, double step) {
    const double fp = f(detail::frame_step(spec, g, j, step));
    const double fm = f(detail::frame_step(spec, g, j, -step));
    return (fp - fm) / (2.0 * step);
}

template <class F>
std::vector<double> horizontal_grad(const GroupSpec& spec, F&& f, const Point& g, double step,
                                    bool richardson = false) {
    std::vector<double> out(spec.first_layer_dim());
    for (int j = 0; j < spec.first_layer_dim(); ++j) {
        double d = frame_deriv(spec, f, g, j, step);
        if (richardson) d = (4.0 * frame_deriv(spec, f, g, j, 0.5 * step) - d) / 3.0;
        out[j] = d;
    }
    return out;
}

template <class F>
double horizontal_grad_sq(const GroupSpec& spec, F&& f, const Point& g, double step,
                          bool richardson = false) {
    double s = 0.0;
    for (double d : horizontal_grad(spec, f, g, step, richardson)) {
        if (!std::isfinite(d)) throw std::runtime_error("horizontal_grad_sq: non-finite value");
        s += d * d;
    }
    return s;
}

// sum_j X_j^2 f by second differences along the frame subgroups
template <class F>
double sub_laplacian_fd(const GroupSpec& spec, F&& f, const Point& g, double step) {
    const double f0 = f(g);
    double s = 0.0;
    for (int j = 0; j < spec.first_layer_dim(); ++j) {
        const double fp = f(detail::frame_step(spec, g, j, step));
        const double fm = f(detail::frame_step(spec, g, j, -step));
        s += (fp - 2.0 * f0 + fm) / (step * step);
    }
    return s;
}

}  // namespace htype::geometry
