#pragma once

#include "levykit/decomposition.hpp"

namespace levykit {

enum class InversionMethod { Auto, Fft, RadialDirect };

struct DensityOptions {
    InversionMethod method = InversionMethod::Auto;
    std::array<int, 3> deriv{0, 0, 0};
    double eps_decay = 1e-14;
    bool check_decay = true;
    int threads = 0;
};

struct AutoGridOptions {
    double eps_decay = 1e-14;
    double extent_over_rho = 20.0;  // box half-width in units of 1/rho_t
    std::size_t n_cap = 0;          // 0: per-dim default (2^22, 1024, 128)
    int deriv_total = 0;
};

namespace detail {

inline int total_deriv(const std::array<int, 3>& k) { return k[0] + k[1] + k[2]; }

// smallest frequency with decay exponent >= target (expanding search + bisection)
template <class F>
double frequency_for_decay(const F& re_exponent, double target, double s_seed) {
    double hi = std::max(s_seed, 1e-6);
    int guard = 0;
    while (re_exponent(hi) < target) {
        hi *= 2.0;
        if (++guard > 200)
            throw InsufficientDecay("auto grid: exponent does not reach decay target",
                                    std::exp(-re_exponent(hi)));
    }
    double lo = hi / 2.0;
    for (int i = 0; i < 60 && hi / lo > 1.0 + 1e-12; ++i) {
        double mid = std::sqrt(lo * hi);
        (re_exponent(mid) >= target ? hi : lo) = mid;
    }
    return hi;
}

// j-th positive zero of the radial Fourier kernel (approximate is fine: the
// values only seed panel boundaries)
inline double kernel_zero(int dim, int j) {
    switch (dim) {
        case 1: return (j - 0.5) * pi;          // cos
        case 3: return j * pi;                  // sin
        case 2: {                               // J0, McMahon expansion
            double b = (j - 0.25) * pi;
            return b + 1.0 / (8.0 * b);
        }
        default: throw InvalidArgument("kernel_zero: dim");
    }
}

inline double radial_kernel(int dim, double z) {
    switch (dim) {
        case 1: return std::cos(z);
        case 2: return bessel_j0(z);
        case 3: return z == 0.0 ? 1.0 : std::sin(z) / z;
        default: throw InvalidArgument("radial_kernel: dim");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exponent-to-grid fill shared by the full and small-jump characteristic
// functions.  which = Full uses e^{-t psi}; Bar uses e^{-psi_t}.
// ---------------------------------------------------------------------------

// Checks the tail of the characteristic function against eps_decay at the
// frequency-grid boundary, with the polynomial derivative factor included.
inline void check_decay_precondition(const ModelContext& ctx, double t, const GridSpec& g,
                                     DensityKind kind_hint, const std::array<int, 3>& deriv,
                                     double eps_decay, bool full) {
    double s_corner = g.xi_max() * std::sqrt(static_cast<double>(g.dim));
    double X;
    if (full)
        X = t * ctx.re_psi_jump(s_corner);
    else
        X = ctx.psi_t(t, Vec::unit(g.dim, 0) * s_corner).real();
    int nd = detail::total_deriv(deriv);
    double mag = std::exp(-X + nd * std::log(std::max(s_corner, 2.0)));
    (void)kind_hint;
    if (mag > eps_decay)
        throw InsufficientDecay("density: characteristic function too large at grid boundary",
                                mag);
}

// ---------------------------------------------------------------------------
// density_fourier: transition density p_t (Full) or small-jump density
// pbar_t (Bar) on a centred grid, by FFT inversion of the characteristic
// function, or by direct radial quadrature for symmetric radial models.
// The FFT route returns the box-periodised density (exact mass 1); the
// radial route returns the plain density with a tail-defect estimate.
// ---------------------------------------------------------------------------

DensityGrid density_fourier(const ModelContext& ctx, double t, const GridSpec& g, DensityKind which,
                            const DensityOptions& opt = {});

namespace detail {

inline DensityGrid density_fft(const ModelContext& ctx, double t, const GridSpec& g,
                               DensityKind which, const DensityOptions& opt) {
    const bool full = (which != DensityKind::Bar);
    const int threads = opt.threads > 0 ? opt.threads : default_threads();
    const double s_max = g.xi_max() * std::sqrt(static_cast<double>(g.dim)) * 1.001;
    const bool symmetric = ctx.measure().symmetric();
    const bool shells = ctx.measure().kind() == MeasureKind::DiscretizedStable;

    const auto* psi_re = (full && !shells) ? ctx.psi_re_snapshot(s_max) : nullptr;
    const auto* psi_im = (full && !symmetric) ? ctx.psi_im_snapshot(s_max) : nullptr;
    const auto* pt = (!full && !shells) ? ctx.psi_t_snapshot(t, s_max) : nullptr;
    ModelContext::ShellEvaluator ev;
    if (shells) {
        ev = ctx.shell_evaluator(t);
        if (g.dim == 2) bessel_j0_warm(std::min(s_max * 2.0, 6e5));
    }

    Vec drift_t = full ? ctx.triplet().drift * t : Vec::zero(g.dim);

    std::vector<std::complex<double>> a(g.size());
    const int nd = detail::total_deriv(opt.deriv);
    parallel_for(g.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t f = lo; f < hi; ++f) {
            Vec xi = g.freq_point(f);
            double s = xi.norm();
            std::complex<double> v;
            if (s == 0) {
                v = 1.0;
            } else {
                double re, im;
                if (full) {
                    re = t * (shells ? ev.re_psi(s) : psi_re->eval(s));
                    im = (symmetric ? 0.0 : t * psi_im->eval(xi[0])) + drift_t.dot(xi);
                } else {
                    re = shells ? ev.re_psi_t(s) : pt->psit_re.eval(s);
                    im = symmetric ? 0.0 : pt->psit_im.eval(xi[0]);
                }
                v = std::polar(std::exp(-re), -im);
            }
            if (nd > 0) {
                std::complex<double> mult = 1.0;
                for (int d = 0; d < g.dim; ++d)
                    for (int k = 0; k < opt.deriv[d]; ++k)
                        mult *= std::complex<double>(0.0, -xi[d]);
                v *= mult;
            }
            a[f] = v;
        }
    });
    cf_inverse(a, g, threads);

    DensityGrid out;
    out.grid = g;
    out.t = t;
    out.kind = nd > 0 ? DensityKind::Derivative : which;
    out.deriv = opt.deriv;
    out.periodized = true;
    out.values.resize(g.size());
    const double scale = 1.0 / std::pow(g.h(), g.dim);
    double imax = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.values[i] = a[i].real() * scale;
        imax = std::max(imax, std::abs(a[i].imag()) * scale);
    }
    out.imag_residual = imax;
    return out;
}

// Direct radial inversion profile for symmetric radial models.
//   n=1: p(r) = (1/pi)      int_0^Inf cos(rs)  phi(s)      ds
//   n=2: p(r) = (1/2pi)     int_0^Inf J0(rs)   phi(s) s    ds
//   n=3: p(r) = (1/2pi^2)   int_0^Inf sinc(rs) phi(s) s^2  ds
// Panels split at kernel zeros; the first panel is subdivided geometrically
// to resolve the |s|^alpha cusp of the exponent at 0.
class RadialInverter {
  public:
    RadialInverter(const ModelContext& ctx, double t, DensityKind which, double eps_decay)
        : ctx_(ctx), t_(t), full_(which != DensityKind::Bar) {
        if (!ctx.measure().is_radial() || !ctx.measure().symmetric())
            throw InvalidArgument("radial inversion requires a symmetric radial model");
        dim_ = ctx.dim();
        double target = -std::log(eps_decay) + 6.0;
        if (full_) {
            xi_cut_ = frequency_for_decay(
                [&](double s) { return t_ * ctx_.re_psi_jump(s); }, target, 1.0);
            re_ = [snap = ctx.psi_re_snapshot(xi_cut_ * 1.01), t](double s) {
                return t * snap->eval(s);
            };
        } else {
            xi_cut_ = frequency_for_decay(
                [&](double s) { return ctx_.psi_t(t_, Vec::unit(dim_, 0) * s).real(); }, target,
                1.0);
            re_ = [snap = ctx.psi_t_snapshot(t, xi_cut_ * 1.01)](double s) {
                return snap->psit_re.eval(s);
            };
        }
        if (dim_ == 2) bessel_j0_warm(1.0);
        prefactor_ = dim_ == 1 ? 1.0 / pi : (dim_ == 2 ? 1.0 / (2.0 * pi) : 1.0 / (2.0 * pi * pi));
    }

    double xi_cut() const { return xi_cut_; }

    double value(double r) const {
        const GLRule& rule = gl_rule(16);
        auto f = [&](double s) {
            double z = r * s;
            double k = radial_kernel(dim_, z);
            double w = dim_ == 1 ? 1.0 : (dim_ == 2 ? s : s * s);
            return k * w * std::exp(-re_(s));
        };
        double acc = 0;
        // first panel with geometric refinement toward 0
        double s1 = std::min(xi_cut_, r > 0 ? kernel_zero(dim_, 1) / r : xi_cut_);
        {
            double hi = s1;
            for (int j = 0; j < 60; ++j) {
                double lo = hi * 0.5;
                double piece = gl_panel(f, lo, hi, rule);
                acc += piece;
                hi = lo;
                if (std::abs(piece) < 1e-17 * std::abs(acc) && j > 6) break;
            }
            acc += gl_panel(f, 0.0, hi, rule);
        }
        // kernel-zero panels
        if (s1 < xi_cut_) {
            if (r > 0) bessel_j0_warm(dim_ == 2 ? r * xi_cut_ * 1.01 : 1.0);
            double lo = s1;
            for (int j = 2; j < 40000000; ++j) {
                double hi = std::min(kernel_zero(dim_, j) / r, xi_cut_);
                acc += gl_panel(f, lo, hi, rule);
                lo = hi;
                if (hi >= xi_cut_) break;
            }
        }
        return prefactor_ * acc;
    }

  private:
    const ModelContext& ctx_;
    double t_;
    bool full_;
    int dim_ = 1;
    double xi_cut_ = 0;
    double prefactor_ = 1;
    std::function<double(double)> re_;
};

inline DensityGrid density_radial_direct(const ModelContext& ctx, double t, const GridSpec& g,
                                         DensityKind which, const DensityOptions& opt) {
    RadialInverter inv(ctx, t, which, opt.eps_decay);
    const int threads = opt.threads > 0 ? opt.threads : default_threads();
    const double rho = ctx.rho(t);
    const double corner = g.extent * std::sqrt(static_cast<double>(g.dim)) * 1.02;

    // profile nodes: uniform core at the 1/rho scale, log-spaced tail
    double d_core = (1.0 / rho) / 16.0;
    std::size_t core_count =
        static_cast<std::size_t>(std::ceil(std::min(36.0 / rho, corner) / d_core)) + 1;
    const double r_core = d_core * static_cast<double>(core_count - 1);
    std::vector<double> nodes(core_count);
    for (std::size_t i = 0; i < core_count; ++i) nodes[i] = d_core * static_cast<double>(i);
    std::size_t n_core = nodes.size();
    std::vector<double> tail_nodes;
    if (corner > r_core) {
        double lr0 = std::log(r_core * 0.9), lr1 = std::log(corner);
        int m = std::max(8, static_cast<int>(std::ceil((lr1 - lr0) / std::log(10.0) * 64)));
        for (int i = 0; i <= m; ++i)
            tail_nodes.push_back(std::exp(lr0 + (lr1 - lr0) * i / static_cast<double>(m)));
    }

    std::vector<double> pv(nodes.size()), tv(tail_nodes.size());
    bessel_j0_warm(g.dim == 2 ? corner * inv.xi_cut() * 1.02 : 1.0);
    parallel_for(nodes.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) pv[i] = inv.value(nodes[i]);
    });
    parallel_for(tail_nodes.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) tv[i] = inv.value(tail_nodes[i]);
    });

    // Core spline on values, mirror-extended through r = 0: the profile is
    // even in r, and a natural end exactly at the peak would flatten the
    // curvature there.  Tail spline on ln p vs ln r.
    const std::size_t mirror = std::min<std::size_t>(12, n_core - 1);
    UniformSpline core_sp(-d_core * static_cast<double>(mirror), d_core, [&] {
        std::vector<double> y(n_core + mirror);
        for (std::size_t i = 0; i < mirror; ++i) y[i] = pv[mirror - i];
        for (std::size_t i = 0; i < n_core; ++i) y[mirror + i] = pv[i];
        return y;
    }());
    UniformSpline tail_sp;
    double tail_l0 = 0, tail_dl = 1;
    if (!tail_nodes.empty()) {
        tail_l0 = std::log(tail_nodes.front());
        tail_dl = std::log(tail_nodes[1]) - tail_l0;
        std::vector<double> y(tail_nodes.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(std::max(tv[i], 1e-300));
        tail_sp.build(tail_l0, tail_dl, std::move(y));
    }
    const double stitch = r_core * 0.97;

    DensityGrid out;
    out.grid = g;
    out.t = t;
    out.kind = which;
    out.periodized = false;
    out.values.resize(g.size());
    parallel_for(g.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t f = lo; f < hi; ++f) {
            double r = out.grid.point(f).norm();
            double v;
            if (r <= stitch || tail_nodes.empty())
                v = core_sp(std::min(r, r_core));
            else
                v = std::exp(tail_sp(std::log(r)));
            out.values[f] = v;
        }
    });
    // first-jump tail estimate for the mass bookkeeping
    if (which == DensityKind::Full)
        out.tail_defect = t * ctx.measure().tail_mass(g.extent);
    else
        out.tail_defect = 0.0;
    return out;
}

}  // namespace detail

inline DensityGrid density_fourier(const ModelContext& ctx, double t, const GridSpec& g,
                                   DensityKind which, const DensityOptions& opt) {
    if (!(t > 0)) throw InvalidArgument("density_fourier: t must be > 0");
    if (which == DensityKind::Full && !ctx.measure().infinite_mass())
        throw ModelRejected(
            "density_fourier: model violates mu(R^n) = infinity; no transition density");

    InversionMethod m = opt.method;
    if (m == InversionMethod::Auto) m = InversionMethod::Fft;
    if (m == InversionMethod::RadialDirect) {
        // the direct path integrates to its own decay-chosen cutoff; the grid
        // Nyquist plays no role
        if (detail::total_deriv(opt.deriv) > 0)
            throw InvalidArgument("radial inversion does not produce derivatives");
        return detail::density_radial_direct(ctx, t, g, which, opt);
    }
    if (opt.check_decay)
        check_decay_precondition(ctx, t, g, which, opt.deriv, opt.eps_decay,
                                 which != DensityKind::Bar);
    return detail::density_fft(ctx, t, g, which, opt);
}

// p_t reconstructed through the decomposition: pbar (*) P_t shifted by
// -a_t (frequency-domain phase, exact for off-grid shifts).
inline DensityGrid density_convolution(const DensityGrid& bar, const FiniteMeasure& plaw,
                                       const Vec& a_t, int threads = 0) {
    if (!(bar.grid == plaw.grid))
        throw InvalidArgument("density_convolution: bar and plaw must share the grid");
    const GridSpec& g = bar.grid;
    std::vector<std::complex<double>> fb(g.size()), fp(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        fb[i] = bar.values[i];
        fp[i] = plaw.masses[i];
    }
    cf_forward(fb, g, threads);
    cf_forward(fp, g, threads);
    parallel_for(g.size(), threads > 0 ? threads : default_threads(),
                 [&](std::size_t lo, std::size_t hi) {
                     for (std::size_t f = lo; f < hi; ++f) {
                         Vec xi = g.freq_point(f);
                         fb[f] *= fp[f] * std::polar(1.0, -xi.dot(a_t));
                     }
                 });
    cf_inverse(fb, g, threads);
    DensityGrid out;
    out.grid = g;
    out.t = bar.t;
    out.kind = DensityKind::Full;
    out.periodized = true;
    out.values.resize(g.size());
    double imax = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        out.values[i] = fb[i].real();
        imax = std::max(imax, std::abs(fb[i].imag()));
    }
    out.imag_residual = imax;
    return out;
}

inline DensityGrid density_derivative(const ModelContext& ctx, double t, const GridSpec& g,
                                      DensityKind which, const std::array<int, 3>& orders,
                                      DensityOptions opt = {}) {
    opt.deriv = orders;
    opt.method = InversionMethod::Fft;
    return density_fourier(ctx, t, g, which, opt);
}

// ---------------------------------------------------------------------------
// Grid auto-sizing per the decay target and the 1/rho spatial scale.
// ---------------------------------------------------------------------------

inline GridSpec auto_grid(const ModelContext& ctx, double t, DensityKind which,
                          const AutoGridOptions& opt = {}) {
    const int dim = ctx.dim();
    const double rho = ctx.rho(t);
    const bool full = which != DensityKind::Bar;
    double target = -std::log(opt.eps_decay);
    // derivative margin enters through deriv_total * ln(xi)
    double xi = detail::frequency_for_decay(
        [&](double s) {
            return full ? t * ctx.re_psi_jump(s) : ctx.psi_t(t, Vec::unit(dim, 0) * s).real();
        },
        target, rho);
    if (opt.deriv_total > 0) {
        for (int iter = 0; iter < 3; ++iter) {
            double t2 = target + opt.deriv_total * std::log(std::max(xi, 2.0));
            xi = detail::frequency_for_decay(
                [&](double s) {
                    return full ? t * ctx.re_psi_jump(s)
                                : ctx.psi_t(t, Vec::unit(dim, 0) * s).real();
                },
                t2, xi);
        }
    }
    double R = opt.extent_over_rho / rho;
    std::size_t cap = opt.n_cap;
    if (cap == 0) cap = dim == 1 ? (std::size_t{1} << 22) : (dim == 2 ? 1024 : 128);
    double n_real = 2.0 * R * xi / pi;
    std::size_t n = 8;
    while (static_cast<double>(n) < n_real && n < cap) n <<= 1;
    if (static_cast<double>(n) < n_real) {
        // capped: keep the decay guarantee, shrink the box
        R = pi * static_cast<double>(n) / (2.0 * xi);
        if (R * rho < 8.0)
            throw InsufficientDecay("auto_grid: cannot satisfy decay within the size cap",
                                    std::exp(-target));
    }
    return GridSpec(dim, R, n);
}

}  // namespace levykit
