// Command-line surface over the library: every subcommand prints a single
// JSON document (inputs, outputs, manifest) on stdout; tabular commands can
// additionally write CSV. Exit codes: 0 success, 2 validation error,
// 3 numerical-certification failure, 4 verification failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htype/anisotropic.hpp"
#include "htype/certificates.hpp"
#include "htype/common.hpp"
#include "htype/geometry.hpp"
#include "htype/heatkernel.hpp"
#include "htype/jsonio.hpp"
#include "htype/potential.hpp"
#include "htype/sampler.hpp"

namespace {

using namespace htype;
namespace js = htype::jsonio;

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_uncertified = 3;
constexpr int exit_verification = 4;

struct Globals {
    int workers = 1;
    double tol_quad = 1e-12;
    double tol_root = 1e-12;
    uint64_t seed = 1;
};

geometry::GroupSpec make_spec(int n, int m, const std::string& model) {
    if (model == "heisenberg") return geometry::GroupSpec::heisenberg(n);
    if (model == "quaternionic") return geometry::GroupSpec::quaternionic(n);
    if (model == "radial") return geometry::GroupSpec::radial(n, m);
    // auto: concrete model when one exists for (n, m)
    if (m == 1) return geometry::GroupSpec::heisenberg(n);
    if (m == 3 && n >= 2 && n % 2 == 0) return geometry::GroupSpec::quaternionic(n);
    return geometry::GroupSpec::radial(n, m);
}

int emit(const std::string& command, const js::Object& inputs, const js::Object& outputs,
         const Globals& g, double wall_ms, int code) {
    const std::string in = inputs.str(), out = outputs.str();
    js::Object tol;
    tol.put("tol_quad", g.tol_quad).put("tol_root", g.tol_root);
    js::Object manifest;
    manifest.put("command", command)
        .raw("parameters", in)
        .put("version", version_string)
        .put("seed", g.seed)
        .raw("tolerances", tol.str())
        .put("wall_clock_ms", wall_ms)
        .put("result_digest", js::digest_hex(in + out));
    js::Object doc;
    doc.put("schema_version", 1)
        .raw("inputs", in)
        .raw("outputs", out)
        .raw("manifest", manifest.str());
    std::printf("%s\n", doc.str().c_str());
    return code;
}

std::string kernel_method_name(heatkernel::Method m) {
    switch (m) {
        case heatkernel::Method::reduced_1d: return "reduced-1d";
        case heatkernel::Method::contour_shift: return "contour-shift";
        case heatkernel::Method::finite_difference_fallback: return "finite-difference-fallback";
    }
    return "?";
}

std::string kernel_eval_json(const heatkernel::KernelEval& ke) {
    js::Object o;
    o.put("value", ke.scaled_value())
        .put("mantissa", ke.value)
        .put("log_scale", ke.log_scale)
        .put("abs_error_estimate", ke.abs_err * std::exp(ke.log_scale))
        .put("method", kernel_method_name(ke.method))
        .put("converged", ke.converged);
    return o.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerics for heat kernels, potentials and defective log-Sobolev "
                 "certificates on H-type groups"};
    app.require_subcommand(1);
    Globals g;
    if (const char* env = std::getenv("HTYPE_WORKERS")) g.workers = std::atoi(env);
    app.add_option("--workers", g.workers, "worker threads for grid evaluations");
    app.add_option("--tol-quad", g.tol_quad, "absolute quadrature tolerance")
        ->capture_default_str();
    app.add_option("--tol-root", g.tol_root, "root-solve tolerance target")
        ->capture_default_str();

    int n = 1, m = 1;
    std::string model = "auto";
    auto add_spec_opts = [&](CLI::App* cmd) {
        cmd->add_option("--n", n, "half the first-layer dimension")->capture_default_str();
        cmd->add_option("--m", m, "center dimension")->capture_default_str();
        cmd->add_option("--model", model, "heisenberg | quaternionic | radial | auto")
            ->capture_default_str();
    };

    // --- kernel -------------------------------------------------------------
    auto* c_kernel = app.add_subcommand("kernel", "heat kernel p_t (or derivative) at a profile");
    double R = 0.0, z = 0.0, t = 1.0;
    int k1 = 0, k2 = 0;
    add_spec_opts(c_kernel);
    c_kernel->add_option("--R", R, "R = |x|^2/4")->required();
    c_kernel->add_option("--z", z, "|z|")->required();
    c_kernel->add_option("--t", t, "time")->capture_default_str();
    c_kernel->add_option("--k1", k1, "derivative order in R")->capture_default_str();
    c_kernel->add_option("--k2", k2, "derivative order in |z|")->capture_default_str();

    // --- distance -----------------------------------------------------------
    auto* c_dist = app.add_subcommand("distance", "sub-Riemannian distance to the identity");
    add_spec_opts(c_dist);
    c_dist->add_option("--R", R)->required();
    c_dist->add_option("--z", z)->required();

    // --- potential ----------------------------------------------------------
    auto* c_pot = app.add_subcommand("potential", "W_{t,C} at a profile");
    double C = 5.0;
    add_spec_opts(c_pot);
    c_pot->add_option("--R", R)->required();
    c_pot->add_option("--z", z)->required();
    c_pot->add_option("--C", C, "trial constant")->required();
    c_pot->add_option("--t", t)->capture_default_str();

    // --- min-w ----------------------------------------------------------------
    auto* c_minw = app.add_subcommand("min-w", "global minimum of W_{1,theta}");
    double theta = 5.0;
    int grid = 200;
    double boxR = 0.0, boxz = 0.0;
    std::string csv_path;
    add_spec_opts(c_minw);
    c_minw->add_option("--theta", theta)->required();
    c_minw->add_option("--grid", grid, "coarse grid resolution")->capture_default_str();
    c_minw->add_option("--boxR", boxR, "search box R bound (0: default box)");
    c_minw->add_option("--boxz", boxz, "search box |z| bound (0: default box)");
    c_minw->add_option("--csv", csv_path, "write W grid samples to CSV");

    // --- eta ------------------------------------------------------------------
    auto* c_eta = app.add_subcommand("eta", "defective log-Sobolev certificate");
    add_spec_opts(c_eta);
    c_eta->add_option("--theta", theta)->required();
    c_eta->add_option("--grid", grid)->capture_default_str();

    // --- constants --------------------------------------------------------------
    auto* c_const = app.add_subcommand("constants", "closed-form constants for (n, m)");
    double tau = 2.0;
    add_spec_opts(c_const);
    c_const->add_option("--tau", tau, "gradient coefficient in the log-form bound")
        ->capture_default_str();

    // --- herbst ---------------------------------------------------------------
    auto* c_herbst = app.add_subcommand("herbst", "Gaussian tail bound from the certificate");
    double eta_in = 0.0, K1 = 0.0;
    std::vector<double> rs{4.0, 5.0, 6.0};
    c_herbst->add_option("--eta", eta_in)->required();
    c_herbst->add_option("--theta", theta)->required();
    c_herbst->add_option("--t", t)->capture_default_str();
    c_herbst->add_option("--K1", K1, "K(1) = log E[e^g]")->required();
    c_herbst->add_option("--r", rs, "tail radii")->delimiter(',')->capture_default_str();

    // --- verify ------------------------------------------------------------------
    auto* c_verify = app.add_subcommand("verify", "margins of the defective inequality "
                                                  "on the versioned test family");
    std::string measure = "heat";
    double eta_flag = std::numeric_limits<double>::quiet_NaN();
    double tol_margin = 1e-6;
    add_spec_opts(c_verify);
    c_verify->add_option("--theta", theta)->capture_default_str();
    c_verify->add_option("--eta", eta_flag, "additive constant (default: computed certificate)");
    c_verify->add_option("--t", t)->capture_default_str();
    c_verify->add_option("--measure", measure, "heat | gaussian-like")->capture_default_str();
    c_verify->add_option("--tol", tol_margin, "margin tolerance")->capture_default_str();
    c_verify->add_option("--grid", grid)->capture_default_str();
    c_verify->add_option("--csv", csv_path, "write margin rows to CSV");

    // --- sample ------------------------------------------------------------------
    auto* c_sample = app.add_subcommand("sample", "simulate the horizontal diffusion and "
                                                  "summarize Fernique statistics");
    long paths = 100000;
    int steps = 512;
    double alpha = 0.2, cap = 10.0;
    add_spec_opts(c_sample);
    c_sample->add_option("--t", t)->capture_default_str();
    c_sample->add_option("--paths", paths)->capture_default_str();
    c_sample->add_option("--steps", steps)->capture_default_str();
    c_sample->add_option("--seed", g.seed)->capture_default_str();
    c_sample->add_option("--alpha", alpha, "exponent of e^{alpha g^2}")->capture_default_str();
    c_sample->add_option("--cap", cap, "cap of g = min(d, cap)")->capture_default_str();
    c_sample->add_option("--r", rs, "tail radii")->delimiter(',')->capture_default_str();
    c_sample->add_option("--csv", csv_path, "write tail rows to CSV");

    // --- aniso -------------------------------------------------------------------
    auto* c_aniso = app.add_subcommand("aniso", "non-isotropic Heisenberg kernel and "
                                                "stationary-point quantities");
    std::vector<double> alphas{1.0};
    std::vector<int> mults{1};
    std::vector<double> blocks{1.0};
    double shift = -1.0;
    c_aniso->add_option("--alphas", alphas, "spectrum")->delimiter(',')->capture_default_str();
    c_aniso->add_option("--mults", mults, "multiplicities")->delimiter(',')->capture_default_str();
    c_aniso->add_option("--q", blocks, "block norms |P_j x|")->delimiter(',')->capture_default_str();
    c_aniso->add_option("--z", z)->required();
    c_aniso->add_option("--t", t)->capture_default_str();
    c_aniso->add_option("--shift-check", shift,
                        "contour shift height to test (negative: skip)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return exit_validation;
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto wall = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    try {
        if (c_kernel->parsed()) {
            const auto spec = make_spec(n, m, model);
            js::Object in;
            in.put("n", n).put("m", m).put("model", model).put("R", R).put("z", z).put("t", t)
                .put("k1", k1).put("k2", k2);
            heatkernel::KernelEval ke;
            if (k1 == 0 && k2 == 0) {
                ke = heatkernel::kernel({R, z}, t, spec, g.tol_quad);
            } else {
                if (t != 1.0) throw std::invalid_argument("kernel: derivative orders need t = 1");
                ke = heatkernel::kernel_deriv({R, z}, {k1, k2}, spec, g.tol_quad);
            }
            js::Object out;
            out.raw("kernel", kernel_eval_json(ke));
            return emit("kernel", in, out, g, wall(), exit_ok);
        }

        if (c_dist->parsed()) {
            js::Object in;
            in.put("n", n).put("m", m).put("R", R).put("z", z);
            const geometry::RadialProfile p{R, z};
            js::Object out;
            out.put("d", geometry::sr_distance(p)).put("d_squared", geometry::sr_distance_sq(p));
            if (R > 0 && z > 0)
                out.put("omega", p.omega()).put("delta", p.delta()).put("kappa", p.kappa());
            return emit("distance", in, out, g, wall(), exit_ok);
        }

        if (c_pot->parsed()) {
            const auto spec = make_spec(n, m, model);
            js::Object in;
            in.put("n", n).put("m", m).put("model", model).put("R", R).put("z", z).put("C", C)
                .put("t", t);
            const auto we = potential::w_eval({R, z}, {C, t}, spec);
            js::Object out;
            out.put("W", we.value)
                .put("abs_error_estimate", we.abs_err)
                .put("method", we.method == potential::WMethod::radial_formula
                                   ? "radial-formula"
                                   : "zone-surrogate");
            return emit("potential", in, out, g, wall(), exit_ok);
        }

        if (c_minw->parsed()) {
            const auto spec = make_spec(n, m, model);
            js::Object in;
            in.put("n", n).put("m", m).put("model", model).put("theta", theta).put("grid", grid)
                .put("boxR", boxR).put("boxz", boxz);
            potential::MinWOptions opt;
            opt.grid = grid;
            opt.workers = g.workers;
            std::optional<potential::Box> box;
            if (boxR > 0 && boxz > 0) box = potential::Box{boxR, boxz};
            const auto res = potential::min_w(theta, spec, box, opt);
            if (!csv_path.empty()) {
                js::Csv csv({"R", "zeta", "W"});
                const int N = 64;
                for (int i = 0; i <= N; ++i)
                    for (int j = 0; j <= N; ++j) {
                        const double RR = res.box.R_hi * i / N, zz = res.box.zeta_hi * j / N;
                        csv.row_values({RR, zz,
                                        potential::w_potential({RR, zz}, {theta, 1.0}, spec)});
                    }
                if (!csv.write(csv_path)) throw std::runtime_error("cannot write " + csv_path);
            }
            js::Object out;
            out.put("min_value", res.min_value)
                .put("argmin_R", res.argmin.R)
                .put("argmin_zeta", res.argmin.zeta)
                .put("box_R", res.box.R_hi)
                .put("box_zeta", res.box.zeta_hi)
                .put("grid", res.grid)
                .put("tail_margin", res.tail_margin)
                .put("certified", res.certified);
            return emit("min-w", in, out, g, wall(),
                        res.certified ? exit_ok : exit_uncertified);
        }

        if (c_eta->parsed()) {
            const auto spec = make_spec(n, m, model);
            js::Object in;
            in.put("n", n).put("m", m).put("model", model).put("theta", theta).put("grid", grid);
            potential::MinWOptions opt;
            opt.grid = grid;
            opt.workers = g.workers;
            const auto cert = certificates::eta_certificate(theta, spec, opt);
            js::Object mw;
            mw.put("min_value", cert.min_w.min_value)
                .put("argmin_R", cert.min_w.argmin.R)
                .put("argmin_zeta", cert.min_w.argmin.zeta)
                .put("box_R", cert.min_w.box.R_hi)
                .put("box_zeta", cert.min_w.box.zeta_hi)
                .put("tail_margin", cert.min_w.tail_margin)
                .put("certified", cert.min_w.certified);
            js::Object out;
            out.put("theta", cert.theta)
                .put("n", cert.n)
                .put("m", cert.m)
                .put("c_nm", cert.c_nm)
                .raw("min_w", mw.str())
                .put("eta", cert.eta)
                .put("certified", cert.certified);
            return emit("eta", in, out, g, wall(), cert.certified ? exit_ok : exit_uncertified);
        }

        if (c_const->parsed()) {
            const auto spec = make_spec(n, m, model);
            js::Object in;
            in.put("n", n).put("m", m).put("tau", tau);
            const auto gl = certificates::gaussian_like_constants(spec);
            js::Object out;
            out.put("c_nm", certificates::sobolev_const(n, m))
                .put("k_nm", gl.K_nm)
                .put("gaussian_mass_c", gl.c)
                .put("gaussian_mass_c_err", gl.c_err)
                .put("be_lower_bound", certificates::be_lower_bound(n))
                .put("cor27", certificates::cor27_constant(tau, n, m));
            return emit("constants", in, out, g, wall(), exit_ok);
        }

        if (c_herbst->parsed()) {
            js::Object in;
            in.put("eta", eta_in).put("theta", theta).put("t", t).put("K1", K1);
            const auto hb = certificates::herbst_chain(eta_in, theta, t, K1);
            js::Array rows;
            for (double r : rs) {
                const auto ev = certificates::herbst_tail_at(hb, r);
                js::Object row;
                row.put("r", r)
                    .put("bound", ev.bound)
                    .put("moment_form", ev.moment_form)
                    .put("lambda", ev.lambda_used);
                rows.raw(row.str());
            }
            js::Object out;
            out.put("B", hb.B)
                .put("tail_valid_from", hb.B + theta * t / 2.0)
                .raw("tails", rows.str());
            return emit("herbst", in, out, g, wall(), exit_ok);
        }

        if (c_verify->parsed()) {
            const auto spec = make_spec(n, m, model);
            const auto fam = certificates::standard_family(spec);
            double coeff, offset;
            bool certified = true;
            double eta_used;
            certificates::Measure mu;
            if (measure == "gaussian-like") {
                const auto gl = certificates::gaussian_like_constants(spec);
                mu = {certificates::Measure::Kind::gaussian_like, 1.0};
                coeff = 2.0;
                offset = gl.K_nm;
                eta_used = gl.K_nm;
            } else if (measure == "heat") {
                mu = {certificates::Measure::Kind::heat, t};
                coeff = theta * t;
                if (std::isnan(eta_flag)) {
                    potential::MinWOptions opt;
                    opt.grid = grid;
                    opt.workers = g.workers;
                    const auto cert = certificates::eta_certificate(theta, spec, opt);
                    certified = cert.certified;
                    offset = cert.eta;
                } else {
                    offset = eta_flag;
                }
                eta_used = offset;
            } else {
                throw std::invalid_argument("verify: unknown measure " + measure);
            }
            const auto rep = certificates::margin_report(coeff, offset, mu, fam, spec, {},
                                                         tol_margin);
            js::Array rows;
            js::Csv csv({"function", "mass", "entropy", "dirichlet", "margin"});
            for (const auto& r : rep.rows) {
                js::Object row;
                row.put("function", r.function)
                    .put("mass", r.mass)
                    .put("entropy", r.entropy)
                    .put("dirichlet", r.dirichlet)
                    .put("margin", r.margin);
                rows.raw(row.str());
                csv.row({r.function, js::format_double(r.mass), js::format_double(r.entropy),
                         js::format_double(r.dirichlet), js::format_double(r.margin)});
            }
            if (!csv_path.empty() && !csv.write(csv_path))
                throw std::runtime_error("cannot write " + csv_path);
            js::Object in;
            in.put("n", n).put("m", m).put("theta", theta).put("eta", eta_used).put("t", t)
                .put("measure", measure).put("tol", tol_margin)
                .put("family_version", certificates::family_version);
            js::Object out;
            out.raw("margins", rows.str())
                .put("min_margin", rep.min_margin)
                .put("pass", rep.pass)
                .put("certified", certified);
            int code = exit_ok;
            if (!rep.pass) code = exit_verification;
            else if (!certified) code = exit_uncertified;
            return emit("verify", in, out, g, wall(), code);
        }

        if (c_sample->parsed()) {
            const auto spec = make_spec(n, m, model);
            sampler::PathConfig cfg;
            cfg.t = t;
            cfg.paths = paths;
            cfg.steps = steps;
            cfg.seed = g.seed;
            cfg.workers = g.workers;
            const auto batch = sampler::simulate(spec, cfg);
            auto gfun = [&](const geometry::Point& p) {
                return std::min(geometry::sr_distance(geometry::profile_of(p)), cap);
            };
            const auto x2 = sampler::estimate_mean(batch, [](const geometry::Point& p) {
                double s = 0.0;
                for (double c : p.x) s += c * c;
                return s;
            });
            const auto z2 = sampler::estimate_mean(batch, [](const geometry::Point& p) {
                double s = 0.0;
                for (double c : p.z) s += c * c;
                return s;
            });
            const auto k1e = sampler::estimate_K1(batch, gfun);
            const auto fr = sampler::empirical_fernique(batch, gfun, alpha, rs);
            js::Array tails;
            js::Csv csv({"r", "freq", "std_error"});
            for (const auto& row : fr.tail) {
                js::Object o;
                o.put("r", row.r).put("freq", row.freq).put("std_error", row.std_error);
                tails.raw(o.str());
                csv.row_values({row.r, row.freq, row.std_error});
            }
            if (!csv_path.empty() && !csv.write(csv_path))
                throw std::runtime_error("cannot write " + csv_path);
            js::Object in;
            in.put("n", n).put("m", m).put("model", model).put("t", t).put("paths", paths)
                .put("steps", steps).put("seed", g.seed).put("alpha", alpha).put("cap", cap);
            js::Object out;
            out.put("mean_x_sq", x2.value)
                .put("mean_x_sq_err", x2.std_error)
                .put("mean_z_sq", z2.value)
                .put("mean_z_sq_err", z2.std_error)
                .put("K1", k1e.value)
                .put("K1_err", k1e.std_error)
                .put("fernique_estimate", fr.estimate)
                .put("fernique_err", fr.std_error)
                .put("heavy_tail_warning", fr.heavy_tail_warning)
                .raw("tails", tails.str());
            return emit("sample", in, out, g, wall(), exit_ok);
        }

        if (c_aniso->parsed()) {
            anisotropic::AnisoSpec aspec{alphas, mults};
            anisotropic::AnisoPoint pt{blocks, z};
            js::Array alph, mlt, qs;
            for (double a : alphas) alph.add(a);
            for (int mm : mults) mlt.raw(std::to_string(mm));
            for (double q : blocks) qs.add(q);
            js::Object in;
            in.raw("alphas", alph.str()).raw("mults", mlt.str()).raw("q", qs.str())
                .put("z", z).put("t", t);
            const auto ke = anisotropic::aniso_kernel(pt, aspec, t);
            js::Object out;
            out.raw("kernel", kernel_eval_json(ke));
            if (pt.z != 0.0 || pt.block_norms.back() > 0) {
                out.put("y", anisotropic::aniso_y(pt, aspec))
                    .put("d", anisotropic::aniso_distance(pt, aspec))
                    .put("psi", anisotropic::aniso_psi(pt, aspec));
            }
            if (shift >= 0.0)
                out.put("contour_shift_residual",
                        anisotropic::contour_shift_check(pt, aspec, shift));
            return emit("aniso", in, out, g, wall(), exit_ok);
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_uncertified;
    }
    return exit_validation;
}
