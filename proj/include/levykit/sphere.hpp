#pragma once

#include <cmath>
#include <vector>

#include "levykit/bessel.hpp"
#include "levykit/common.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Unit-sphere discretisation: {-1,+1} for n=1, equally spaced angles for n=2,
// Fibonacci points for n=3.  Used wherever a sup/inf over directions is
// approximated by a grid max/min.
// ---------------------------------------------------------------------------

struct SphereGrid {
    int dim = 1;
    std::vector<Vec> dirs;
    std::vector<double> weights;  // surface weights, reporting only

    static SphereGrid make(int n, int count = 0) {
        SphereGrid g;
        g.dim = n;
        if (n == 1) {
            g.dirs = {Vec{1.0}, Vec{-1.0}};
            g.weights = {1.0, 1.0};
        } else if (n == 2) {
            if (count <= 0) count = 256;
            g.dirs.reserve(count);
            for (int j = 0; j < count; ++j) {
                double a = 2.0 * pi * j / count;
                double cx = std::cos(a), sy = std::sin(a);
                // snap the axis directions exactly (degenerate-support checks
                // rely on exact zeros of the projections)
                if (std::abs(cx) < 1e-15) cx = 0.0;
                if (std::abs(sy) < 1e-15) sy = 0.0;
                g.dirs.push_back(Vec{cx, sy});
                g.weights.push_back(2.0 * pi / count);
            }
        } else if (n == 3) {
            if (count <= 0) count = 1024;
            const double golden = pi * (3.0 - std::sqrt(5.0));
            for (int j = 0; j < count; ++j) {
                double z = 1.0 - 2.0 * (j + 0.5) / count;
                double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                double a = golden * j;
                g.dirs.push_back(Vec{r * std::cos(a), r * std::sin(a), z});
                g.weights.push_back(4.0 * pi / count);
            }
        } else {
            throw InvalidArgument("SphereGrid: dim must be 1..3");
        }
        return g;
    }
};

// Surface area of S^{n-1} in R^n.
inline double sphere_surface(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return 2.0 * pi;
        case 3: return 4.0 * pi;
        default: throw InvalidArgument("sphere_surface: dim must be 1..3");
    }
}

// ---------------------------------------------------------------------------
// Angular kernels.  For a uniform unit vector w on S^{n-1} and fixed l, the
// scalar s = l.w has density: point masses at +-1 (n=1), 1/(pi sqrt(1-s^2))
// (n=2), uniform on [-1,1] (n=3).  Every mu-integral against a function of
// xi.u over an isotropic measure reduces to a radial integral against one of
// the averages below, evaluated at rho = ||xi|| r:
//
//   ang_cos   E[1 - cos(rho s)]
//   ang_u     E[(rho s)^2 ^ 1]
//   ang_l     E[(rho s)^2 1_{|rho s| <= 1}]
//   ang_cosh  E[cosh(rho s) - 1]
// ---------------------------------------------------------------------------

// Small-argument forms below avoid the 1 - cos style cancellation: the
// kernels multiply weights singular at the origin, so relative accuracy at
// tiny rho matters.
inline double ang_cos(int n, double rho) {
    rho = std::abs(rho);
    switch (n) {
        case 1: {
            double s = std::sin(0.5 * rho);
            return 2.0 * s * s;
        }
        case 2: {
            if (rho < 0.5) {
                // 1 - J0 = sum_{k>=1} (-1)^{k+1} (rho^2/4)^k / (k!)^2
                double z = 0.25 * rho * rho;
                double term = z, sum = z;
                for (int k = 2; k < 20; ++k) {
                    term *= -z / (static_cast<double>(k) * k);
                    sum += term;
                    if (std::abs(term) < 1e-18 * sum) break;
                }
                return sum;
            }
            return 1.0 - bessel_j0(rho);
        }
        case 3: {
            if (rho < 0.5) {
                // 1 - sin(x)/x = sum_{k>=1} (-1)^{k+1} x^{2k} / (2k+1)!
                double z = rho * rho;
                double term = z / 6.0, sum = term;
                for (int k = 2; k < 16; ++k) {
                    term *= -z / static_cast<double>((2 * k) * (2 * k + 1));
                    sum += term;
                    if (std::abs(term) < 1e-18 * sum) break;
                }
                return sum;
            }
            return 1.0 - std::sin(rho) / rho;
        }
        default: throw InvalidArgument("ang_cos: dim");
    }
}

namespace detail {

// x - sin(x) without cancellation
inline double x_minus_sin(double x) {
    if (std::abs(x) >= 1e-2) return x - std::sin(x);
    double z = x * x;
    return x * z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0 * (1.0 - z / 72.0)));
}

}  // namespace detail

inline double ang_u(int n, double rho) {
    rho = std::abs(rho);
    const double r2 = rho * rho;
    switch (n) {
        case 1: return std::min(r2, 1.0);
        case 2: {
            if (rho <= 1.0) return 0.5 * r2;
            // with delta = asin(1/rho):
            //   E[(rho s)^2 ^ 1] = 1 - (2/pi) delta + (2/pi) rho^2 (2 delta - sin 2 delta)/4
            double delta = std::asin(1.0 / rho);
            return 1.0 - (2.0 / pi) * delta +
                   (2.0 / pi) * r2 * 0.25 * detail::x_minus_sin(2.0 * delta);
        }
        case 3:
            if (rho <= 1.0) return r2 / 3.0;
            return 1.0 - 2.0 / (3.0 * rho);
        default: throw InvalidArgument("ang_u: dim");
    }
}

inline double ang_l(int n, double rho) {
    rho = std::abs(rho);
    const double r2 = rho * rho;
    switch (n) {
        case 1: return rho <= 1.0 ? r2 : 0.0;
        case 2: {
            if (rho <= 1.0) return 0.5 * r2;
            double delta = std::asin(1.0 / rho);
            return (2.0 / pi) * r2 * 0.25 * detail::x_minus_sin(2.0 * delta);
        }
        case 3:
            if (rho <= 1.0) return r2 / 3.0;
            return 1.0 / (3.0 * rho);
        default: throw InvalidArgument("ang_l: dim");
    }
}

inline double ang_cosh(int n, double rho) {
    rho = std::abs(rho);
    switch (n) {
        case 1: {
            double s = std::sinh(0.5 * rho);
            return 2.0 * s * s;
        }
        case 2: {
            if (rho < 0.5) {
                // I0 - 1 = sum_{k>=1} (rho^2/4)^k / (k!)^2
                double z = 0.25 * rho * rho;
                double term = z, sum = z;
                for (int k = 2; k < 20; ++k) {
                    term *= z / (static_cast<double>(k) * k);
                    sum += term;
                    if (term < 1e-18 * sum) break;
                }
                return sum;
            }
            return std::cyl_bessel_i(0.0, rho) - 1.0;
        }
        case 3: {
            if (rho < 0.5) {
                // sinh(x)/x - 1 = sum_{k>=1} x^{2k} / (2k+1)!
                double z = rho * rho;
                double term = z / 6.0, sum = term;
                for (int k = 2; k < 16; ++k) {
                    term *= z / static_cast<double>((2 * k) * (2 * k + 1));
                    sum += term;
                    if (term < 1e-18 * sum) break;
                }
                return sum;
            }
            return std::sinh(rho) / rho - 1.0;
        }
        default: throw InvalidArgument("ang_cosh: dim");
    }
}

// E[s^2]: second moment of the projected direction.
inline double ang_s2(int n) {
    switch (n) {
        case 1: return 1.0;
        case 2: return 0.5;
        case 3: return 1.0 / 3.0;
        default: throw InvalidArgument("ang_s2: dim");
    }
}

}  // namespace levykit
