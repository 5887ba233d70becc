#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <span>
#include <vector>

#include "levykit/common.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Gauss-Legendre rules with nodes computed at first use (Newton iteration on
// P_n; no hard-coded coefficient tables).
// ---------------------------------------------------------------------------

struct GLRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

inline const GLRule& gl_rule(int n) {
    static std::map<int, GLRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lk(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GLRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

template <class F>
double gl_panel(const F& f, double a, double b, const GLRule& r) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
    return s * h;
}

// ---------------------------------------------------------------------------
// Adaptive quadrature on a finite interval: per-panel error estimated by
// comparing one GL16 pass against the two-half refinement, worst panel first.
// ---------------------------------------------------------------------------

struct QuadOptions {
    double abs_tol = 0.0;
    double rel_tol = 1e-10;
    std::size_t max_panels = 20000;
    int gl_order = 16;
};

namespace detail {

struct Panel {
    double a, b, integral, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel make_panel(const F& f, double a, double b, const GLRule& r) {
    double whole = gl_panel(f, a, b, r);
    double mid = 0.5 * (a + b);
    double halves = gl_panel(f, a, mid, r) + gl_panel(f, mid, b, r);
    return Panel{a, b, halves, std::abs(whole - halves)};
}

}  // namespace detail

template <class F>
double integrate_adaptive(const F& f, double a, double b, const QuadOptions& opt = {},
                          std::span<const double> breakpoints = {}) {
    if (a == b) return 0.0;
    if (!(a < b)) return -integrate_adaptive(f, b, a, opt, breakpoints);
    const GLRule& rule = gl_rule(opt.gl_order);

    std::vector<double> pts{a};
    for (double p : breakpoints)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    std::priority_queue<detail::Panel> heap;
    double total = 0, err = 0, absum = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto p = detail::make_panel(f, pts[i], pts[i + 1], rule);
        total += p.integral;
        err += p.error;
        absum += std::abs(p.integral);
        heap.push(p);
    }

    // Roundoff floor: when the integral cancels heavily the achievable error
    // is set by the magnitude of the pieces, not of the result.
    auto tolerance = [&] {
        return std::max({opt.abs_tol, opt.rel_tol * std::abs(total), 2e-15 * absum});
    };

    std::size_t n_panels = pts.size() - 1;
    while (err > tolerance()) {
        if (heap.empty()) break;
        if (n_panels >= opt.max_panels)
            throw QuadratureFailure("integrate_adaptive: panel budget exhausted", err);
        detail::Panel worst = heap.top();
        heap.pop();
        total -= worst.integral;
        err -= worst.error;
        absum -= std::abs(worst.integral);
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval at floating point resolution; accept as-is.
            total += worst.integral;
            absum += std::abs(worst.integral);
            continue;
        }
        for (auto [lo, hi] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
            auto p = detail::make_panel(f, lo, hi, rule);
            total += p.integral;
            err += p.error;
            absum += std::abs(p.integral);
            heap.push(p);
        }
        ++n_panels;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Semi-infinite tails handled by dyadic panels [b, 2b], [2b, 4b], ... with a
// relative stopping rule.  Detects divergence instead of looping forever.
// ---------------------------------------------------------------------------

template <class F>
double integrate_to_inf(const F& f, double a, const QuadOptions& opt = {}) {
    if (!(a > 0)) throw InvalidArgument("integrate_to_inf: a must be > 0");
    double acc = 0;
    double lo = a;
    int grew = 0;
    double prev = 0;
    QuadOptions local = opt;
    local.rel_tol = std::max(opt.rel_tol * 0.5, 1e-12);
    for (int j = 0; j < 2000; ++j) {
        double hi = lo * 2.0;
        local.abs_tol = std::max(opt.abs_tol, opt.rel_tol * 0.02 * std::abs(acc));
        double piece = integrate_adaptive(f, lo, hi, local);
        acc += piece;
        double scale = std::max(std::abs(acc), opt.abs_tol);
        if (std::abs(piece) < std::max(opt.rel_tol * 1e-2 * scale, 1e-300)) return acc;
        grew = (j > 0 && std::abs(piece) > std::abs(prev)) ? grew + 1 : 0;
        if (grew > 60)
            throw QuadratureFailure("integrate_to_inf: tail does not decay", std::abs(piece));
        prev = piece;
        lo = hi;
        if (!std::isfinite(acc))
            throw QuadratureFailure("integrate_to_inf: overflow", std::abs(acc));
    }
    throw QuadratureFailure("integrate_to_inf: dyad budget exhausted", std::abs(prev));
}

// Integrate f over (0, b] where f may be singular (but integrable) at 0.
// Dyadic shrink toward zero; non-decaying panel contributions signal a
// non-integrable singularity.
template <class F>
double integrate_from_zero(const F& f, double b, const QuadOptions& opt = {}) {
    if (!(b > 0)) throw InvalidArgument("integrate_from_zero: b must be > 0");
    double acc = 0;
    double hi = b;
    double prev = 0;
    int grew = 0;
    QuadOptions local = opt;
    local.rel_tol = std::max(opt.rel_tol * 0.5, 1e-12);
    for (int j = 0; j < 2000; ++j) {
        double lo = hi * 0.5;
        local.abs_tol = std::max(opt.abs_tol, opt.rel_tol * 0.02 * std::abs(acc));
        double piece = integrate_adaptive(f, lo, hi, local);
        acc += piece;
        double scale = std::max(std::abs(acc), opt.abs_tol);
        if (std::abs(piece) < std::max(opt.rel_tol * 1e-2 * scale, 1e-300)) return acc;
        if (j > 0 && std::abs(piece) >= std::abs(prev) * 0.999) {
            if (++grew > 40)
                throw SingularIntegrand(
                    "integrate_from_zero: integrand not integrable at 0");
        } else {
            grew = 0;
        }
        prev = piece;
        hi = lo;
        if (hi < 1e-300) return acc;
    }
    return acc;
}

}  // namespace levykit
