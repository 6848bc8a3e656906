#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace htype {

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr const char* version_string = "0.1.0";

inline double sq(double x) { return x * x; }

// A positive quantity stored as mantissa * exp(log_scale), so that values far
// below DBL_MIN (deep heat-kernel tails) stay usable in ratios and logs.
struct Scaled {
    double mantissa = 0.0;
    double log_scale = 0.0;

    double value() const { return mantissa * std::exp(log_scale); }
    double log() const { return std::log(mantissa) + log_scale; }
};

// ratio a/b with scale bookkeeping
inline double scaled_ratio(const Scaled& a, const Scaled& b) {
    return a.mantissa / b.mantissa * std::exp(a.log_scale - b.log_scale);
}

// Fixed-size value pack so the quadrature engine can integrate several
// integrands sharing one expensive base factor in a single adaptive pass.
template <std::size_t N>
struct Vec {
    std::array<double, N> v{};

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    Vec& operator+=(const Vec& o) {
        for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) {
        for (std::size_t i = 0; i < N; ++i) a.v[i] -= b.v[i];
        return a;
    }
    friend Vec operator*(Vec a, double s) {
        for (std::size_t i = 0; i < N; ++i) a.v[i] *= s;
        return a;
    }
    friend Vec operator*(double s, Vec a) { return a * s; }
};

inline double vnorm(double x) { return std::abs(x); }

template <std::size_t N>
double vnorm(const Vec<N>& x) {
    double m = 0.0;
    for (double c : x.v) m = std::max(m, std::abs(c));
    return m;
}

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace htype
