#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "levykit/common.hpp"
#include "levykit/quadrature.hpp"
#include "levykit/sphere.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Levy measure catalog.
//
//   IsotropicStable   mu(du) = c ||u||^{-n-alpha} du
//   DiscretizedStable mu = sum_k 2^{k gamma} x uniform law on sphere of
//                     radius 2^{-k upsilon}, k in [k_min, k_max]
//   RadialProfile     mu(du) = m(||u||) du, optionally restricted to u > 0
//                     in dimension 1
//   TabulatedAtoms    finite atomic measure; violates mu(R^n) = infinity and
//                     is accepted only for negative tests / plumbing checks
// ---------------------------------------------------------------------------

struct IsotropicStable {
    double alpha = 1.0;
    double c = 1.0;
};

struct DiscretizedStable {
    double gamma = 1.0;
    double upsilon = 1.0;
    int k_min = -64;
    int k_max = 64;
};

struct RadialProfile {
    std::function<double(double)> m;  // r -> m(r) >= 0
    bool one_sided = false;           // n = 1 only: support on u > 0
    // optional descriptor so presets/config can round-trip a named family
    std::string family;               // e.g. "power"
    double par_c = 0, par_p = 0;
};

struct TabulatedAtoms {
    std::vector<std::pair<Vec, double>> atoms;
};

enum class MeasureKind { IsotropicStable, DiscretizedStable, RadialProfile, TabulatedAtoms };

enum class RadialKernel { One, Cos, U, L, CoshM1, SinSigned, FirstMoment };

namespace detail {

// Sum of an (eventually) alternating sequence of panel integrals by repeated
// averaging of partial sums.  Standard Euler-transform acceleration for
// oscillatory tails.
inline double accelerated_alternating_sum(const std::vector<double>& pieces) {
    std::vector<double> s(pieces.size());
    double acc = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        acc += pieces[i];
        s[i] = acc;
    }
    if (s.size() < 4) return s.empty() ? 0.0 : s.back();
    std::size_t take = std::min<std::size_t>(s.size(), 32);
    std::vector<double> v(s.end() - static_cast<long>(take), s.end());
    while (v.size() > 1) {
        for (std::size_t i = 0; i + 1 < v.size(); ++i) v[i] = 0.5 * (v[i] + v[i + 1]);
        v.pop_back();
    }
    return v[0];
}

}  // namespace detail

class LevyMeasure {
  public:
    using Variant = std::variant<IsotropicStable, DiscretizedStable, RadialProfile, TabulatedAtoms>;

    LevyMeasure(int dim, Variant v) : dim_(dim), v_(std::move(v)) { validate(); }

    int dim() const { return dim_; }
    MeasureKind kind() const { return static_cast<MeasureKind>(v_.index()); }
    bool infinite_mass() const { return infinite_mass_; }
    bool symmetric() const { return symmetric_; }
    bool is_radial() const { return kind() != MeasureKind::TabulatedAtoms; }
    bool one_sided() const {
        auto* rp = std::get_if<RadialProfile>(&v_);
        return rp && rp->one_sided;
    }

    const IsotropicStable& stable() const { return std::get<IsotropicStable>(v_); }
    const DiscretizedStable& shells_spec() const { return std::get<DiscretizedStable>(v_); }
    const RadialProfile& radial_profile() const { return std::get<RadialProfile>(v_); }
    const TabulatedAtoms& atoms() const { return std::get<TabulatedAtoms>(v_); }
    const Variant& raw() const { return v_; }

    // ---- mu{ ||u|| > r }, semi-analytic per variant -----------------------
    double tail_mass(double r) const {
        if (!(r > 0)) throw InvalidArgument("tail_mass: r must be > 0");
        switch (kind()) {
            case MeasureKind::IsotropicStable: {
                const auto& s = stable();
                return s.c * sphere_surface(dim_) / s.alpha * std::pow(r, -s.alpha);
            }
            case MeasureKind::DiscretizedStable: {
                double acc = 0;
                for (const auto& [rk, wk] : shells())
                    if (rk > r) acc += wk;
                return acc;
            }
            case MeasureKind::RadialProfile: {
                QuadOptions opt;
                opt.rel_tol = 1e-11;
                return integrate_to_inf([this](double u) { return weight(u); }, r, opt);
            }
            case MeasureKind::TabulatedAtoms: {
                double acc = 0;
                for (const auto& [y, w] : atoms().atoms)
                    if (y.norm() > r) acc += w;
                return acc;
            }
        }
        return 0;
    }

    // ---- radial mass density w(r): mass of mu per unit radius -------------
    double weight(double r) const {
        switch (kind()) {
            case MeasureKind::IsotropicStable: {
                const auto& s = stable();
                return s.c * sphere_surface(dim_) * std::pow(r, -1.0 - s.alpha);
            }
            case MeasureKind::RadialProfile: {
                const auto& p = radial_profile();
                double m = p.m(r);
                if (m < 0) throw InvalidArgument("RadialProfile: m(r) < 0");
                if (p.one_sided) return m;
                return m * sphere_surface(dim_) * std::pow(r, dim_ - 1);
            }
            default:
                throw InvalidArgument("weight: continuous radial variants only");
        }
    }

    // Shells (radius, weight) of the discretized variant restricted to an
    // annulus; boundary membership is controlled by the half-open convention
    // (r_lo excluded, r_hi included) of the caller via strictness flags.
    std::vector<std::pair<double, double>> shells(double r_lo = 0.0,
                                                  double r_hi = std::numeric_limits<double>::infinity(),
                                                  bool lo_strict = true,
                                                  bool hi_strict = false) const {
        const auto& d = shells_spec();
        std::vector<std::pair<double, double>> out;
        for (int k = d.k_min; k <= d.k_max; ++k) {
            double r = std::exp2(-static_cast<double>(k) * d.upsilon);
            bool above = lo_strict ? (r > r_lo) : (r >= r_lo);
            bool below = hi_strict ? (r < r_hi) : (r <= r_hi);
            if (above && below) out.emplace_back(r, std::exp2(static_cast<double>(k) * d.gamma));
        }
        return out;
    }

    // ---- integral of an angular-kernel function over a radial annulus -----
    //
    // Returns  int_{r_lo < ||u|| <= r_hi} K(xi . u) mu(du)  for ||xi|| = s and
    // K one of the kernels in RadialKernel, reduced exactly to 1D through the
    // angular averages in sphere.hpp.  The oscillatory kernels (Cos, Sin) are
    // split at a fixed number of half-periods and the remaining tail is
    // summed with Euler acceleration.
    double kernel_integral(RadialKernel kern, double s, double r_lo, double r_hi,
                           const QuadOptions& opt = {}) const {
        if (kind() == MeasureKind::TabulatedAtoms)
            throw InvalidArgument("kernel_integral: atomic measures are handled directionally");
        if (kind() == MeasureKind::DiscretizedStable) {
            double acc = 0;
            for (const auto& [rk, wk] : shells(r_lo, r_hi))
                acc += wk * kernel_value(kern, s, rk);
            return acc;
        }
        return continuous_kernel_integral(kern, s, r_lo, r_hi, opt);
    }

    // mean of u over the open annulus r_lo < ||u|| < r_hi (vector in R^n)
    Vec annulus_first_moment(double r_lo, double r_hi, const QuadOptions& opt = {}) const {
        Vec out(dim_);
        if (symmetric_) return out;
        if (kind() == MeasureKind::TabulatedAtoms) {
            for (const auto& [y, w] : atoms().atoms) {
                double r = y.norm();
                if (r > r_lo && r < r_hi) out = out + y * w;
            }
            return out;
        }
        // one-sided radial profile on the positive axis (n = 1)
        if (r_hi <= r_lo) return out;
        QuadOptions o = opt;
        o.rel_tol = std::min(opt.rel_tol, 1e-11);
        out[0] = integrate_adaptive([this](double u) { return u * weight(u); }, r_lo, r_hi, o);
        return out;
    }

  private:
    double kernel_value(RadialKernel kern, double s, double r) const {
        const double rho = s * r;
        switch (kern) {
            case RadialKernel::One: return 1.0;
            case RadialKernel::Cos: return ang_cos(dim_, rho);
            case RadialKernel::U: return ang_u(dim_, rho);
            case RadialKernel::L: return ang_l(dim_, rho);
            case RadialKernel::CoshM1: return ang_cosh(dim_, rho);
            case RadialKernel::SinSigned: return std::sin(rho);  // one-sided n=1 only
            case RadialKernel::FirstMoment: return r;
        }
        return 0;
    }

    // Pure oscillatory factor of the kernel at large arguments, and the
    // smooth part it rides on: Cos = 1 - osc, Sin = osc.
    double osc_factor(RadialKernel kern, double rho) const {
        if (kern == RadialKernel::SinSigned) return std::sin(rho);
        switch (dim_) {
            case 1: return std::cos(rho);
            case 2: return bessel_j0(rho);
            case 3: return rho == 0.0 ? 1.0 : std::sin(rho) / rho;
        }
        return 0;
    }

    double continuous_kernel_integral(RadialKernel kern, double s, double r_lo, double r_hi,
                                      const QuadOptions& opt) const {
        auto f = [&](double r) { return weight(r) * kernel_value(kern, s, r); };
        const bool oscillatory =
            (kern == RadialKernel::Cos || kern == RadialKernel::SinSigned) && s > 0;

        // Breakpoints where kernels change character.
        std::vector<double> bps;
        if (s > 0) bps.push_back(1.0 / s);
        bps.push_back(1.0);

        if (!oscillatory) {
            double acc = 0;
            if (r_lo <= 0.0) {
                if (kern == RadialKernel::One || kern == RadialKernel::FirstMoment) {
                    // integrand not O(r^2)-damped near 0; probe integrability
                    acc += integrate_from_zero(f, bp_min(bps, r_hi), opt);
                } else {
                    acc += integrate_from_zero(f, bp_min(bps, r_hi), opt);
                }
                r_lo = bp_min(bps, r_hi);
            }
            if (std::isinf(r_hi)) {
                double mid = std::max(r_lo, bp_max(bps));
                if (mid > r_lo) acc += integrate_adaptive(f, r_lo, mid, opt, bps);
                acc += integrate_to_inf(f, std::max(mid, 1e-300), opt);
                return acc;
            }
            if (r_hi > r_lo) acc += integrate_adaptive(f, r_lo, r_hi, opt, bps);
            return acc;
        }

        // Oscillatory: integrate the first ~64 half-periods directly, then
        // switch to   int w - int w * osc   with an accelerated tail for the
        // oscillating part (Cos) or the accelerated tail alone (Sin).
        const double half_period = pi / s;
        const double z_split = 64.0 * half_period;
        double acc = 0;
        double a = r_lo;
        double b = std::min(r_hi, z_split);
        if (a < b) {
            if (a <= 0.0) {
                acc += integrate_from_zero(f, b, opt);
            } else {
                acc += integrate_adaptive(f, a, b, opt, bps);
            }
        }
        if (r_hi <= z_split) return acc;

        double tail_lo = std::max(a, z_split);
        const bool cos_kernel = (kern == RadialKernel::Cos);
        if (cos_kernel) {
            // smooth part: int_{tail_lo}^{r_hi} w(r) dr
            if (std::isinf(r_hi))
                acc += integrate_to_inf([this](double r) { return weight(r); }, tail_lo, opt);
            else
                acc += integrate_adaptive([this](double r) { return weight(r); }, tail_lo, r_hi, opt);
        }
        // oscillating part, half-period panels + Euler acceleration
        const GLRule& rule = gl_rule(16);
        std::vector<double> pieces;
        pieces.reserve(512);
        double lo = tail_lo;
        double scale = std::abs(acc) + opt.abs_tol;
        auto g = [&](double r) { return weight(r) * osc_factor(kern, s * r); };
        for (int k = 0; k < 20000; ++k) {
            double hi = std::min(lo + half_period, r_hi);
            pieces.push_back(gl_panel(g, lo, hi, rule));
            lo = hi;
            if (lo >= r_hi) break;
            if (pieces.size() >= 48 && std::abs(pieces.back()) < 1e-16 * std::max(scale, 1e-300))
                break;
            if (pieces.size() >= 400) break;  // Euler handles the rest
        }
        double osc = detail::accelerated_alternating_sum(pieces);
        return cos_kernel ? acc - osc : acc + osc;
    }

    static double bp_min(const std::vector<double>& bps, double cap) {
        double m = cap;
        for (double b : bps) m = std::min(m, b);
        return std::min(m, cap);
    }
    static double bp_max(const std::vector<double>& bps) {
        double m = 0;
        for (double b : bps) m = std::max(m, b);
        return m;
    }

    void validate() {
        if (dim_ < 1 || dim_ > 3) throw InvalidArgument("LevyMeasure: dim must be 1..3");
        infinite_mass_ = true;
        symmetric_ = true;
        switch (kind()) {
            case MeasureKind::IsotropicStable: {
                const auto& s = stable();
                if (!(s.alpha > 0.0 && s.alpha < 2.0))
                    throw InvalidArgument("IsotropicStable: alpha must lie in (0,2)");
                if (!(s.c > 0.0)) throw InvalidArgument("IsotropicStable: c must be > 0");
                break;
            }
            case MeasureKind::DiscretizedStable: {
                const auto& d = shells_spec();
                if (!(d.gamma > 0.0) || !(d.upsilon > 0.0) || !(d.gamma < 2.0 * d.upsilon))
                    throw InvalidArgument("DiscretizedStable: need 0 < gamma < 2 upsilon");
                if (d.k_min >= d.k_max)
                    throw InvalidArgument("DiscretizedStable: k_min < k_max required");
                break;
            }
            case MeasureKind::RadialProfile: {
                const auto& p = radial_profile();
                if (!p.m) throw InvalidArgument("RadialProfile: profile function required");
                if (p.one_sided && dim_ != 1)
                    throw InvalidArgument("RadialProfile: one_sided is n=1 only");
                symmetric_ = !p.one_sided;
                // numeric Levy-integrability check: int (1 ^ r^2) w(r) dr < inf
                QuadOptions opt;
                opt.rel_tol = 1e-8;
                double small = integrate_from_zero(
                    [this](double r) { return weight(r) * std::min(r * r, 1.0); }, 1.0, opt);
                double big = integrate_to_inf([this](double r) { return weight(r); }, 1.0, opt);
                if (!std::isfinite(small) || !std::isfinite(big))
                    throw InvalidArgument("RadialProfile: Levy integral diverges");
                // infinite total mass is required of every non-atomic variant
                bool mass_diverges = false;
                try {
                    (void)integrate_from_zero([this](double r) { return weight(r); }, 1.0, opt);
                } catch (const SingularIntegrand&) {
                    mass_diverges = true;
                }
                if (!mass_diverges)
                    throw InvalidArgument(
                        "RadialProfile: total mass is finite; mu(R^n) = infinity required");
                break;
            }
            case MeasureKind::TabulatedAtoms: {
                const auto& a = atoms();
                if (a.atoms.empty()) throw InvalidArgument("TabulatedAtoms: no atoms");
                for (const auto& [y, w] : a.atoms) {
                    if (y.dim() != dim_) throw InvalidArgument("TabulatedAtoms: atom dim mismatch");
                    if (!(w > 0)) throw InvalidArgument("TabulatedAtoms: weights must be > 0");
                    if (y.norm() == 0) throw InvalidArgument("TabulatedAtoms: atom at origin");
                }
                infinite_mass_ = false;  // finite by construction
                symmetric_ = atoms_symmetric(a);
                break;
            }
        }
    }

    static bool atoms_symmetric(const TabulatedAtoms& a) {
        for (const auto& [y, w] : a.atoms) {
            bool found = false;
            for (const auto& [z, v] : a.atoms) {
                if ((y + z).norm() < 1e-12 * std::max(1.0, y.norm()) &&
                    std::abs(w - v) < 1e-12 * std::max(1.0, w)) {
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        return true;
    }

    int dim_;
    Variant v_;
    bool infinite_mass_ = true;
    bool symmetric_ = true;
};

// ---------------------------------------------------------------------------
// Free-function interface used by callers and tests.
// ---------------------------------------------------------------------------

inline double tail_mass(const LevyMeasure& m, double r) { return m.tail_mass(r); }

// Generic integral of f against mu over a radial annulus.  The angular factor
// is averaged on a fixed sphere sample; callers with kernel-type integrands
// should prefer LevyMeasure::kernel_integral which does the angular part
// exactly.
inline double integrate(const LevyMeasure& m, const std::function<double(const Vec&)>& f,
                        double r_lo, double r_hi, const QuadOptions& opt = {},
                        int angular_count = 0) {
    if (r_hi < r_lo) throw InvalidArgument("integrate: r_hi < r_lo");
    if (m.kind() == MeasureKind::TabulatedAtoms) {
        double acc = 0;
        for (const auto& [y, w] : m.atoms().atoms) {
            double r = y.norm();
            if (r > r_lo && r <= r_hi) acc += w * f(y);
        }
        return acc;
    }
    const int n = m.dim();
    SphereGrid sph;
    if (n > 1) sph = SphereGrid::make(n, angular_count > 0 ? angular_count : (n == 2 ? 256 : 512));
    auto avg_f = [&](double r) {
        if (n == 1) {
            if (m.one_sided()) return f(Vec{r});
            return 0.5 * (f(Vec{r}) + f(Vec{-r}));
        }
        double acc = 0;
        for (const auto& d : sph.dirs) acc += f(d * r);
        return acc / static_cast<double>(sph.dirs.size());
    };

    if (m.kind() == MeasureKind::DiscretizedStable) {
        double acc = 0;
        for (const auto& [rk, wk] : m.shells(r_lo, r_hi)) acc += wk * avg_f(rk);
        return acc;
    }

    auto g = [&](double r) { return m.weight(r) * avg_f(r); };
    double acc = 0;
    double lo = r_lo;
    if (lo <= 0.0) {
        double cap = std::min(r_hi, 1.0);
        acc += integrate_from_zero(g, cap, opt);  // SingularIntegrand if not integrable
        lo = cap;
    }
    if (std::isinf(r_hi)) {
        double mid = std::max(lo, 1.0);
        if (mid > lo) acc += integrate_adaptive(g, lo, mid, opt);
        acc += integrate_to_inf(g, mid, opt);
        return acc;
    }
    if (r_hi > lo) acc += integrate_adaptive(g, lo, r_hi, opt);
    return acc;
}

// ---------------------------------------------------------------------------
// The process definition: drift vector a of the Levy-Khinchin representation
// (Gaussian part Q identically zero) plus the jump measure.
// ---------------------------------------------------------------------------

struct LevyTriplet {
    int dim;
    Vec drift;
    LevyMeasure measure;

    LevyTriplet(int n, Vec a, LevyMeasure m) : dim(n), drift(a), measure(std::move(m)) {
        if (drift.dim() != dim) throw InvalidArgument("LevyTriplet: drift dim mismatch");
        if (measure.dim() != dim) throw InvalidArgument("LevyTriplet: measure dim mismatch");
    }
};

}  // namespace levykit
