#pragma once

#include "levykit/measure.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Model registry.  Stable presets named "*-cauchy" pin the exponent exactly
// (psi(xi) = ||xi||); the others use the psi*(r) = r^alpha normalisation,
// i.e. c = 1 / U_n(alpha) with U_n the unit-coefficient bounded-second-moment
// integral.  The normalisation constant is documented per preset.
// ---------------------------------------------------------------------------

struct PresetExpectation {
    double alpha = 0;          // effective stability index
    double rho_slope = 0;      // d ln rho / d ln t = -1/alpha
    bool condition_a = true;
    bool symmetric = true;
    bool density_capable = true;  // mu(R^n) = infinity
    bool has_levy_density = true; // power bell bound applicable
    double bell_b = 0;            // exponent b for the bell bound (= alpha)
};

struct ModelPreset {
    std::string name;
    LevyTriplet triplet;
    PresetExpectation expected;
};

// psi^U of the unit isotropic stable in dimension n at r = 1.
inline double stable_u_constant(int n, double alpha) {
    if (n == 1) return 2.0 * (1.0 / (2.0 - alpha) + 1.0 / alpha);
    // int_0^inf ang_u(n, z) z^{-1-alpha} dz * surface
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    double head = integrate_from_zero(
        [&](double z) { return ang_u(n, z) * std::pow(z, -1.0 - alpha); }, 1.0, opt);
    double tail = integrate_to_inf(
        [&](double z) { return ang_u(n, z) * std::pow(z, -1.0 - alpha); }, 1.0, opt);
    return sphere_surface(n) * (head + tail);
}

inline std::vector<std::string> preset_names() {
    return {"stable-1d-cauchy", "stable-1d",          "stable-1d-a07",
            "stable-2d-cauchy", "stable-3d-cauchy",   "discretized-stable-2d",
            "discretized-stable-1d", "onesided-stable-1d", "radial-stable-1d",
            "axis-degenerate-2d"};
}

inline ModelPreset preset(const std::string& name) {
    auto make_stable = [&](int n, double alpha, double c) {
        return LevyTriplet(n, Vec::zero(n), LevyMeasure(n, IsotropicStable{alpha, c}));
    };
    if (name == "stable-1d-cauchy") {
        // c = 1/pi gives psi(xi) = |xi| exactly (Cauchy process)
        ModelPreset p{name, make_stable(1, 1.0, 1.0 / pi), {}};
        p.expected = {1.0, -1.0, true, true, true, true, 1.0};
        return p;
    }
    if (name == "stable-1d") {
        double alpha = 1.5;
        ModelPreset p{name, make_stable(1, alpha, 1.0 / stable_u_constant(1, alpha)), {}};
        p.expected = {alpha, -1.0 / alpha, true, true, true, true, alpha};
        return p;
    }
    if (name == "stable-1d-a07") {
        double alpha = 0.7;
        ModelPreset p{name, make_stable(1, alpha, 1.0 / stable_u_constant(1, alpha)), {}};
        p.expected = {alpha, -1.0 / alpha, true, true, true, true, alpha};
        return p;
    }
    if (name == "stable-2d-cauchy") {
        // c = 1/(2 pi) gives psi(xi) = ||xi|| exactly (isotropic 2-D Cauchy)
        ModelPreset p{name, make_stable(2, 1.0, 1.0 / (2.0 * pi)), {}};
        p.expected = {1.0, -1.0, true, true, true, true, 1.0};
        return p;
    }
    if (name == "stable-3d-cauchy") {
        // c = 1/pi^2 gives psi(xi) = ||xi|| exactly (isotropic 3-D Cauchy)
        ModelPreset p{name, make_stable(3, 1.0, 1.0 / (pi * pi)), {}};
        p.expected = {1.0, -1.0, true, true, true, true, 1.0};
        return p;
    }
    if (name == "discretized-stable-2d" || name == "discretized-stable-1d") {
        int n = name.back() == '2' ? 2 : 1;
        ModelPreset p{name,
                      LevyTriplet(n, Vec::zero(n),
                                  LevyMeasure(n, DiscretizedStable{1.0, 1.0, -64, 64})),
                      {}};
        p.expected = {1.0, -1.0, true, true, true, false, 1.0};
        return p;
    }
    if (name == "onesided-stable-1d") {
        // m(u) = c u^{-3/2} on u > 0; alpha = 1/2; c normalises psi*(r) = r^alpha
        double alpha = 0.5;
        double c = 3.0 / 8.0;
        RadialProfile rp;
        rp.m = [c](double r) { return c * std::pow(r, -1.5); };
        rp.one_sided = true;
        rp.family = "power";
        rp.par_c = c;
        rp.par_p = 1.5;
        ModelPreset p{name, LevyTriplet(1, Vec::zero(1), LevyMeasure(1, rp)), {}};
        p.expected = {alpha, -1.0 / alpha, true, false, true, true, alpha};
        return p;
    }
    if (name == "radial-stable-1d") {
        // two-sided power profile, identical in law to stable-1d
        double alpha = 1.5;
        double c = 1.0 / stable_u_constant(1, alpha);
        RadialProfile rp;
        rp.m = [c](double r) { return c * std::pow(r, -2.5); };
        rp.family = "power";
        rp.par_c = c;
        rp.par_p = 2.5;
        ModelPreset p{name, LevyTriplet(1, Vec::zero(1), LevyMeasure(1, rp)), {}};
        p.expected = {alpha, -1.0 / alpha, true, true, true, true, alpha};
        return p;
    }
    if (name == "axis-degenerate-2d") {
        // dyadic atoms on the x1 axis: psi^L vanishes in the e2 direction
        TabulatedAtoms ta;
        for (int j = -6; j <= 10; ++j) {
            double r = std::exp2(-j);
            double w = std::exp2(j);
            ta.atoms.push_back({Vec{r, 0.0}, w});
            ta.atoms.push_back({Vec{-r, 0.0}, w});
        }
        ModelPreset p{name, LevyTriplet(2, Vec::zero(2), LevyMeasure(2, ta)), {}};
        p.expected = {1.0, -1.0, false, true, false, false, 0.0};
        return p;
    }
    throw InvalidArgument("preset: unknown model name '" + name + "'");
}

}  // namespace levykit
