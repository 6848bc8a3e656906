#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "htype/common.hpp"
#include "htype/geometry.hpp"

namespace htype::sampler {

using geometry::GroupSpec;
using geometry::Point;

struct PathConfig {
    double t = 1.0;
    int steps = 512;
    long paths = 100000;
    uint64_t seed = 1;
    int workers = 1;
};

struct SampleBatch {
    std::vector<Point> points;
    PathConfig config;
};

namespace detail {

// Per-path counter-based stream: results do not depend on how paths are
// partitioned across workers. The path index is avalanched before seeding so
// that the per-draw increment cannot make neighboring paths' sequences
// overlap.
class PathRng {
  public:
    PathRng(uint64_t seed, uint64_t path) {
        uint64_t h = path + 0x632BE59BD9B4E019ULL;
        state_ = splitmix64(h) ^ (seed * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL);
        (void)splitmix64(state_);
    }

    double uniform() {  // (0, 1]
        return (static_cast<double>(splitmix64(state_) >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * pi * u2);
        have_ = true;
        return r * std::cos(2.0 * pi * u2);
    }

  private:
    uint64_t state_;
    double cached_ = 0.0;
    bool have_ = false;
};

}  // namespace detail

// Euler-Maruyama endpoints of the horizontal diffusion with generator
// sum_i X_i^2 (so each horizontal increment has variance 2 dt), with
// midpoint accumulation of the center component dz_k = <J_k x, dx>/2.
inline SampleBatch simulate(const GroupSpec& spec, const PathConfig& cfg) {
    if (!spec.concrete()) throw std::invalid_argument("simulate: concrete model required");
    if (!(cfg.t > 0) || cfg.steps < 1 || cfg.paths < 1)
        throw std::invalid_argument("simulate: invalid path configuration");
    SampleBatch out;
    out.config = cfg;
    out.points.assign(cfg.paths, geometry::identity(spec));
    const double dt = cfg.t / cfg.steps;
    const double scale = std::sqrt(2.0 * dt);
    const int dim = spec.first_layer_dim();

    auto run = [&](long lo, long hi) {
        std::vector<double> dx(dim), xmid(dim);
        for (long p = lo; p < hi; ++p) {
            detail::PathRng rng(cfg.seed, static_cast<uint64_t>(p));
            Point& g = out.points[static_cast<std::size_t>(p)];
            for (int s = 0; s < cfg.steps; ++s) {
                for (int i = 0; i < dim; ++i) {
                    dx[i] = scale * rng.normal();
                    xmid[i] = g.x[i] + 0.5 * dx[i];
                }
                for (int k = 0; k < spec.m; ++k) {
                    const auto jm = geometry::j_apply(spec, k, xmid);
                    double a = 0.0;
                    for (int i = 0; i < dim; ++i) a += jm[i] * dx[i];
                    g.z[k] += 0.5 * a;
                }
                for (int i = 0; i < dim; ++i) g.x[i] += dx[i];
            }
        }
    };
    if (cfg.workers > 1) {
        std::vector<std::thread> pool;
        const long chunk = (cfg.paths + cfg.workers - 1) / cfg.workers;
        for (int w = 0; w < cfg.workers; ++w)
            pool.emplace_back(run, w * chunk, std::min<long>(cfg.paths, (w + 1) * chunk));
        for (auto& th : pool) th.join();
    } else {
        run(0, cfg.paths);
    }
    return out;
}

struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

template <class G>
MCEstimate estimate_mean(const SampleBatch& batch, G&& g) {
    double s = 0.0, s2 = 0.0;
    for (const auto& pt : batch.points) {
        const double v = g(pt);
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(batch.points.size());
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

// K(1) = log E[e^g] with the delta-method standard error
template <class G>
MCEstimate estimate_K1(const SampleBatch& batch, G&& g) {
    const auto m = estimate_mean(batch, [&](const Point& p) { return std::exp(g(p)); });
    return {std::log(m.value), m.std_error / m.value};
}

struct FerniqueRow {
    double r;
    double freq;
    double std_error;
};

struct FerniqueReport {
    double estimate = 0.0;   // mean of exp(alpha g^2)
    double std_error = 0.0;
    std::vector<FerniqueRow> tail;
    bool heavy_tail_warning = false;
};

// Sample mean of exp(alpha g^2) plus the empirical tail P(g >= r).
template <class G>
FerniqueReport empirical_fernique(const SampleBatch& batch, G&& g, double alpha,
                                  const std::vector<double>& rs) {
    if (!(alpha > 0)) throw std::invalid_argument("empirical_fernique: alpha must be > 0");
    FerniqueReport rep;
    const double n = static_cast<double>(batch.points.size());
    std::vector<double> gv(batch.points.size());
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < batch.points.size(); ++i) {
        gv[i] = g(batch.points[i]);
        const double e = std::exp(alpha * gv[i] * gv[i]);
        s += e;
        s2 += e * e;
    }
    rep.estimate = s / n;
    rep.std_error = std::sqrt(std::max(0.0, s2 / n - rep.estimate * rep.estimate) / n);
    rep.heavy_tail_warning = rep.std_error > 0.5 * rep.estimate;
    for (double r : rs) {
        double cnt = 0.0;
        for (double v : gv)
            if (v >= r) cnt += 1.0;
        const double freq = cnt / n;
        rep.tail.push_back({r, freq, std::sqrt(std::max(freq * (1.0 - freq), 1.0 / n) / n)});
    }
    return rep;
}

}  // namespace htype::sampler
