#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "htype/common.hpp"

namespace htype::interp {

// Tensor Chebyshev interpolant on [ax,bx] x [ay,by], fitted at first-kind
// Chebyshev points; evaluation by nested Clenshaw recurrence.
class Cheb2D {
  public:
    template <class F>
    static Cheb2D fit(F&& f, double ax, double bx, double ay, double by, int nx, int ny) {
        Cheb2D c;
        c.ax_ = ax; c.bx_ = bx; c.ay_ = ay; c.by_ = by;
        c.nx_ = nx; c.ny_ = ny;
        std::vector<double> tx(nx), ty(ny);
        for (int i = 0; i < nx; ++i) tx[i] = std::cos(pi * (i + 0.5) / nx);
        for (int j = 0; j < ny; ++j) ty[j] = std::cos(pi * (j + 0.5) / ny);
        std::vector<double> vals(static_cast<std::size_t>(nx) * ny);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                vals[static_cast<std::size_t>(i) * ny + j] =
                    f(0.5 * (ax + bx) + 0.5 * (bx - ax) * tx[i],
                      0.5 * (ay + by) + 0.5 * (by - ay) * ty[j]);
        // coefficients by the discrete cosine sums
        c.coef_.assign(static_cast<std::size_t>(nx) * ny, 0.0);
        std::vector<double> cosx(static_cast<std::size_t>(nx) * nx), cosy(static_cast<std::size_t>(ny) * ny);
        for (int k = 0; k < nx; ++k)
            for (int i = 0; i < nx; ++i) cosx[static_cast<std::size_t>(k) * nx + i] = std::cos(pi * k * (i + 0.5) / nx);
        for (int l = 0; l < ny; ++l)
            for (int j = 0; j < ny; ++j) cosy[static_cast<std::size_t>(l) * ny + j] = std::cos(pi * l * (j + 0.5) / ny);
        std::vector<double> tmp(static_cast<std::size_t>(nx) * ny, 0.0);
        for (int i = 0; i < nx; ++i)
            for (int l = 0; l < ny; ++l) {
                double s = 0.0;
                for (int j = 0; j < ny; ++j)
                    s += vals[static_cast<std::size_t>(i) * ny + j] * cosy[static_cast<std::size_t>(l) * ny + j];
                tmp[static_cast<std::size_t>(i) * ny + l] = s * 2.0 / ny;
            }
        for (int k = 0; k < nx; ++k)
            for (int l = 0; l < ny; ++l) {
                double s = 0.0;
                for (int i = 0; i < nx; ++i)
                    s += tmp[static_cast<std::size_t>(i) * ny + l] * cosx[static_cast<std::size_t>(k) * nx + i];
                c.coef_[static_cast<std::size_t>(k) * ny + l] = s * 2.0 / nx;
            }
        return c;
    }

    double eval(double x, double y) const {
        const double u = (2.0 * x - ax_ - bx_) / (bx_ - ax_);
        const double v = (2.0 * y - ay_ - by_) / (by_ - ay_);
        // nested Clenshaw: the inner recurrence along y is evaluated on the
        // fly for each x-order of the outer recurrence (no scratch storage)
        auto inner = [&](int k) {
            const double* c = &coef_[static_cast<std::size_t>(k) * ny_];
            double b1 = 0.0, b2 = 0.0;
            for (int l = ny_ - 1; l >= 1; --l) {
                const double b0 = 2.0 * v * b1 - b2 + c[l];
                b2 = b1;
                b1 = b0;
            }
            return v * b1 - b2 + 0.5 * c[0];
        };
        double b1 = 0.0, b2 = 0.0;
        for (int k = nx_ - 1; k >= 1; --k) {
            const double b0 = 2.0 * u * b1 - b2 + inner(k);
            b2 = b1;
            b1 = b0;
        }
        return u * b1 - b2 + 0.5 * inner(0);
    }

    bool contains(double x, double y) const {
        return x >= ax_ && x <= bx_ && y >= ay_ && y <= by_;
    }

  private:
    double ax_ = 0, bx_ = 1, ay_ = 0, by_ = 1;
    int nx_ = 0, ny_ = 0;
    std::vector<double> coef_;
};

}  // namespace htype::interp
