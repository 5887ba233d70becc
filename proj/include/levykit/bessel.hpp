#pragma once

#include <cmath>
#include <memory>
#include <mutex>

#include "levykit/common.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Fast J0.  Small arguments use the power series; large arguments use a
// spline of the slowly varying amplitude/phase pair extracted once from the
// standard library Bessel functions:
//
//   J0(x) = A(x) cos(x + d(x)),   A = sqrt(J0^2 + Y0^2),  d = atan2(-Y0, J0) - x
//
// A and d vary on O(1/x^2) scales, so a 0.0625-spaced spline reproduces J0 to
// ~1e-9 absolute while costing a few ns per call.  This sits in the innermost
// loops of the radial Fourier inversion for n = 2.
// ---------------------------------------------------------------------------

namespace detail {

inline double j0_series(double x) {
    const double z = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        term *= -z / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

struct J0Table {
    double x_lo = 5.0;
    UniformSpline amp, phase;
    double x_hi = 0.0;
};

class J0Cache {
  public:
    static J0Cache& instance() {
        static J0Cache c;
        return c;
    }

    std::shared_ptr<const J0Table> table_for(double x) {
        {
            std::lock_guard<std::mutex> lk(mtx_);
            if (table_ && table_->x_hi >= x) return table_;
        }
        return grow(x);
    }

  private:
    std::shared_ptr<const J0Table> grow(double x_need) {
        std::lock_guard<std::mutex> lk(mtx_);
        if (table_ && table_->x_hi >= x_need + 2.0) return table_;
        double hi = table_ ? table_->x_hi : 64.0;
        while (hi < x_need + 2.0) hi *= 2.0;
        auto t = std::make_shared<J0Table>();
        const double dx = 0.0625;
        // nodes start below the series/table handoff at 5 so the natural-end
        // region of the spline is never queried
        t->x_lo = 3.5;
        std::size_t n = static_cast<std::size_t>((hi - t->x_lo) / dx) + 2;
        t->x_hi = t->x_lo + dx * static_cast<double>(n - 1);
        std::vector<double> amp(n), ph(n);
        double prev_phase = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double x = t->x_lo + dx * static_cast<double>(i);
            double j0 = std::cyl_bessel_j(0.0, x);
            double y0 = std::cyl_neumann(0.0, x);
            amp[i] = std::sqrt(j0 * j0 + y0 * y0);
            // J0 = A cos(theta), Y0 = A sin(theta); d = theta - x unwrapped.
            double theta = std::atan2(y0, j0);
            double d = theta - std::fmod(x, 2.0 * pi);
            // unwrap to keep d continuous (it hovers near -pi/4)
            while (d - prev_phase > pi) d -= 2.0 * pi;
            while (d - prev_phase < -pi) d += 2.0 * pi;
            if (i == 0) {
                while (d > 0) d -= 2.0 * pi;
                while (d < -2.0 * pi) d += 2.0 * pi;
            }
            prev_phase = d;
            ph[i] = d;
        }
        t->amp.build(t->x_lo, dx, std::move(amp));
        t->phase.build(t->x_lo, dx, std::move(ph));
        table_ = std::move(t);
        return table_;
    }

    std::mutex mtx_;
    std::shared_ptr<const J0Table> table_;
};

}  // namespace detail

inline double bessel_j0(double x) {
    x = std::abs(x);
    if (x < 5.0) return detail::j0_series(x);
    if (x > 5e5) {
        // two-term asymptotic; the absolute error is far below the amplitude
        double a = std::sqrt(2.0 / (pi * x));
        double ph = std::fmod(x, 2.0 * pi) - 0.25 * pi;
        return a * (std::cos(ph) + std::sin(ph) / (8.0 * x));
    }
    auto t = detail::J0Cache::instance().table_for(x + 1.0);
    double a = t->amp(x);
    double d = t->phase(x);
    return a * std::cos(std::fmod(x, 2.0 * pi) + d);
}

// Warm the table up front so hot loops never hit the growth path.
inline void bessel_j0_warm(double x_max) {
    if (x_max > 5.0) (void)detail::J0Cache::instance().table_for(x_max);
}

}  // namespace levykit
