#pragma once

#include <functional>
#include <map>
#include <string>

#include "levykit/density.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Kernel shapes.  All radial: value depends on ||z|| of the scaled argument.
// ---------------------------------------------------------------------------

enum class ShapeKind { ExpDecay, ExpLogDecay, Indicator, PowerDecay, TailFunction };

struct KernelShape {
    ShapeKind kind = ShapeKind::ExpDecay;
    double b1 = 1, b2 = 1;      // ExpDecay / ExpLogDecay
    double b3 = 1, b4 = 1;      // Indicator
    double c = 1, expnt = 2;    // PowerDecay: c (1+z)^{-expnt}
    std::function<double(double)> tail;  // TailFunction: z -> 1-G(z)

    double operator()(double z) const {
        z = std::abs(z);
        switch (kind) {
            case ShapeKind::ExpDecay: return b1 * std::exp(-b2 * z);
            case ShapeKind::ExpLogDecay: return b1 * std::exp(-b2 * z * std::log1p(z));
            case ShapeKind::Indicator: return z <= b4 ? b3 : 0.0;
            case ShapeKind::PowerDecay: return c * std::pow(1.0 + z, -expnt);
            case ShapeKind::TailFunction: return tail(z);
        }
        return 0;
    }

    double max_value() const {
        switch (kind) {
            case ShapeKind::ExpDecay:
            case ShapeKind::ExpLogDecay: return b1;
            case ShapeKind::Indicator: return b3;
            case ShapeKind::PowerDecay: return c;
            case ShapeKind::TailFunction: return tail(0.0);
        }
        return 0;
    }

    // integral over R^n of the shape in the scaled variable
    double l1_mass(int dim) const {
        QuadOptions opt;
        opt.rel_tol = 1e-10;
        auto radial_fn = [&](double z) {
            return (*this)(z) * sphere_surface(dim) * std::pow(z, dim - 1);
        };
        double head = integrate_adaptive(radial_fn, 0.0, 64.0, opt);
        double tail_part = 0;
        try {
            tail_part = integrate_to_inf(radial_fn, 64.0, opt);
        } catch (const QuadratureFailure&) {
            tail_part = std::numeric_limits<double>::infinity();
        }
        return head + tail_part;
    }
};

// ---------------------------------------------------------------------------
// Compound kernel: sum_m (1/m!) int sigma_t h((x-y) zeta_t) Q_t^{*m}(dy)
// realised on the grid through the spectral series of Q_t.
// ---------------------------------------------------------------------------

struct CompoundKernelParams {
    double sigma_t = 1;
    KernelShape h;
    double zeta_t = 1;
    const CompoundSeries* q = nullptr;  // may be null: Q_t = 0 (only m = 0 term)
};

// Sum_{m<=M} Lambda_hat^m / m! on the frequency grid.
inline std::vector<std::complex<double>> exp_series_cf(const CompoundSeries& cs) {
    std::vector<std::complex<double>> e(cs.grid.size());
    parallel_for(e.size(), default_threads(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            std::complex<double> term = 1.0, sum = 1.0;
            for (int m = 1; m <= cs.order; ++m) {
                term *= cs.lambda_hat[i] / static_cast<double>(m);
                sum += term;
            }
            e[i] = sum;
        }
    });
    return e;
}

// Grid field of the compound kernel bound (values at every cell).
inline std::vector<double> compound_kernel_field(const GridSpec& g, double sigma,
                                                 const KernelShape& h, double zeta,
                                                 const std::vector<std::complex<double>>* e_hat,
                                                 int threads = 0) {
    std::vector<std::complex<double>> k(g.size());
    parallel_for(g.size(), threads > 0 ? threads : default_threads(),
                 [&](std::size_t lo, std::size_t hi) {
                     for (std::size_t f = lo; f < hi; ++f)
                         k[f] = h(zeta * g.point(f).norm());
                 });
    if (e_hat) {
        cf_forward(k, g, threads);
        for (std::size_t i = 0; i < k.size(); ++i) k[i] *= (*e_hat)[i];
        cf_inverse(k, g, threads);
    }
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < k.size(); ++i) out[i] = sigma * k[i].real();
    return out;
}

// Pointwise evaluation with a certified truncation remainder.
struct CompoundKernelValue {
    double value = 0;
    double remainder = 0;
};

inline CompoundKernelValue eval_compound_kernel(const CompoundKernelParams& p, const Vec& x) {
    CompoundKernelValue out;
    if (p.q == nullptr) {
        out.value = p.sigma_t * p.h(p.zeta_t * x.norm());
        out.remainder = 0;
        return out;
    }
    auto e = exp_series_cf(*p.q);
    auto field = compound_kernel_field(p.q->grid, p.sigma_t, p.h, p.zeta_t, &e);
    std::array<std::size_t, 3> ix;
    if (!p.q->grid.nearest_cell(x, ix))
        throw GridCoverageError("eval_compound_kernel: x outside grid", x.norm());
    out.value = field[p.q->grid.flatten(ix)];
    out.remainder = p.sigma_t * p.h.max_value() * p.q->tail_bound;
    return out;
}

// ---------------------------------------------------------------------------
// Density sweep: everything the fits need, per t.
// ---------------------------------------------------------------------------

struct SweepPoint {
    double t = 0, rho = 0, lambda_mass = 0;
    Vec a_t, x_t;
    GridSpec grid;
    DensityGrid p_bar;
    DensityGrid p_rec;  // pbar (*) P_t  =  p_t( . - a_t ), the recentred density
    CompoundSeries series;
    std::vector<std::complex<double>> e_hat;  // sum_{m<=M} Lambda_hat^m/m!
};

struct DensitySweep {
    const ModelContext* ctx = nullptr;
    std::vector<SweepPoint> points;
};

inline DensitySweep build_sweep(const ModelContext& ctx, const std::vector<double>& ts,
                                std::size_t n_override = 0, double extent_over_rho = 20.0,
                                double eps_tail = 1e-10) {
    DensitySweep sw;
    sw.ctx = &ctx;
    for (double t : ts) {
        SweepPoint p;
        p.t = t;
        p.rho = ctx.rho(t);
        AutoGridOptions go;
        go.extent_over_rho = extent_over_rho;
        if (n_override) go.n_cap = n_override;
        p.grid = auto_grid(ctx, t, DensityKind::Bar, go);
        if (n_override && p.grid.n != n_override) {
            // honour the requested resolution exactly (fits compare across sizes)
            p.grid = GridSpec(p.grid.dim, p.grid.extent, n_override);
            check_decay_precondition(ctx, t, p.grid, DensityKind::Bar, {0, 0, 0}, 1e-12, false);
        }
        p.a_t = shift_vector(ctx, t, p.rho);
        p.p_bar = density_fourier(ctx, t, p.grid, DensityKind::Bar);
        FiniteMeasure lam = truncated_intensity(ctx, t, p.rho, p.grid);
        p.lambda_mass = lam.declared_mass;
        p.series = compound_series(lam, eps_tail);
        p.e_hat = exp_series_cf(p.series);
        FiniteMeasure plaw = poisson_law(p.series);
        p.p_rec = density_convolution(p.p_bar, plaw, Vec::zero(ctx.dim()));
        p.x_t = argmax_lex(p.p_bar);
        sw.points.push_back(std::move(p));
    }
    return sw;
}

// ---------------------------------------------------------------------------
// Fit reports.
// ---------------------------------------------------------------------------

struct BoundReport {
    std::string op;
    std::string direction;  // "upper" | "lower" | "two-sided"
    std::string shape;
    bool verdict = false;
    std::map<std::string, double> constants;
    struct Row {
        double t = 0, rho = 0, worst_ratio = 0, margin = 0;
        Vec worst_point;
    };
    std::vector<Row> rows;
    std::string note;
};

struct FitOptions {
    double b2_lo = 0.05, b2_hi = 16.0;
    int coarse = 15;
    int refine_iters = 48;
    double noise_floor = 1e-9;   // exclude p < floor * peak
    double rim_fraction = 0.85;  // exclude ||x|| > rim * extent
    double b1_max = 1e9;
};

namespace detail {

struct FitPoint {
    double t, rho;
    const DensityGrid* density;
    const std::vector<std::complex<double>>* e_hat;
    const GridSpec* grid;
};

inline std::vector<FitPoint> fit_points(const DensitySweep& sw) {
    std::vector<FitPoint> v;
    for (const auto& p : sw.points)
        v.push_back({p.t, p.rho, &p.p_rec, &p.e_hat, &p.grid});
    return v;
}

// required b1 so that density <= b1 * sigma * (base_{b2} (*) E) everywhere
// on the fit mask; +inf if the denominator degenerates.
inline double required_b1(const std::vector<FitPoint>& pts, ShapeKind kind, double b2,
                          int sigma_extra, const FitOptions& o, BoundReport::Row* rows = nullptr) {
    double worst = 0;
    int idx = 0;
    for (const auto& fp : pts) {
        KernelShape base;
        base.kind = kind;
        base.b1 = 1.0;
        base.b2 = b2;
        double sigma = std::pow(fp.rho, fp.grid->dim + sigma_extra);
        auto field = compound_kernel_field(*fp.grid, sigma, base, fp.rho, fp.e_hat);
        double peak = fp.density->peak();
        double rim = o.rim_fraction * fp.grid->extent;
        double local = 0;
        std::size_t local_arg = 0;
        for (std::size_t i = 0; i < field.size(); ++i) {
            double p = fp.density->values[i];
            if (p < o.noise_floor * peak) continue;
            if (fp.grid->point(i).norm() > rim) continue;
            if (!(field[i] > 0)) return std::numeric_limits<double>::infinity();
            double r = p / field[i];
            if (r > local) {
                local = r;
                local_arg = i;
            }
        }
        if (rows) {
            rows[idx].t = fp.t;
            rows[idx].rho = fp.rho;
            rows[idx].worst_ratio = local;
            rows[idx].worst_point = fp.grid->point(local_arg);
        }
        worst = std::max(worst, local);
        ++idx;
    }
    return worst;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// fit_upper: feasible (b1, b2) with the density dominated by the compound
// kernel bound at every masked grid point and every t.  Among feasible pairs
// the fit minimises b1 * ||h||_1: minimising b1 alone is degenerate (the
// kernel only weakens as b2 decreases, so b2 would always ride the box
// floor), while the L1-tight pair is the most informative integrable bound.
// ---------------------------------------------------------------------------

inline BoundReport fit_upper(const DensitySweep& sw, ShapeKind kind, const FitOptions& o = {},
                             int sigma_extra = 0,
                             const std::vector<detail::FitPoint>* custom_pts = nullptr) {
    BoundReport rep;
    rep.op = "fit_upper";
    rep.direction = "upper";
    rep.shape = kind == ShapeKind::ExpDecay ? "expdecay" : "explogdecay";
    auto pts = custom_pts ? *custom_pts : detail::fit_points(sw);
    if (pts.empty()) throw InvalidArgument("fit_upper: empty sweep");

    auto objective = [&](double b2) {
        double b1 = detail::required_b1(pts, kind, b2, sigma_extra, o);
        KernelShape base;
        base.kind = kind;
        base.b1 = 1.0;
        base.b2 = b2;
        return std::pair<double, double>(b1, b1 * base.l1_mass(pts.front().grid->dim));
    };

    double best_b2 = o.b2_lo, best_obj = std::numeric_limits<double>::infinity(), best_b1 = 0;
    for (int i = 0; i < o.coarse; ++i) {
        double b2 = o.b2_lo * std::pow(o.b2_hi / o.b2_lo, i / static_cast<double>(o.coarse - 1));
        auto [b1, obj] = objective(b2);
        if (obj < best_obj) {
            best_obj = obj;
            best_b2 = b2;
            best_b1 = b1;
        }
    }
    // golden-section refinement around the coarse minimiser
    {
        double lo = best_b2 / std::pow(o.b2_hi / o.b2_lo, 1.0 / (o.coarse - 1));
        double hi = best_b2 * std::pow(o.b2_hi / o.b2_lo, 1.0 / (o.coarse - 1));
        lo = std::max(lo, o.b2_lo);
        hi = std::min(hi, o.b2_hi);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = lo, b = hi;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        auto f1 = objective(x1), f2 = objective(x2);
        for (int it = 0; it < o.refine_iters && (b - a) > 1e-4 * best_b2; ++it) {
            if (f1.second < f2.second) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = objective(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = objective(x2);
            }
        }
        double xm = 0.5 * (a + b);
        auto fm = objective(xm);
        if (fm.second < best_obj) {
            best_obj = fm.second;
            best_b2 = xm;
            best_b1 = fm.first;
        }
    }

    rep.rows.resize(pts.size());
    double b1_check = detail::required_b1(pts, kind, best_b2, sigma_extra, o, rep.rows.data());
    best_b1 = b1_check;
    for (auto& r : rep.rows) {
        r.worst_ratio /= best_b1;  // ratio of density to the fitted bound
        r.margin = 1.0 - r.worst_ratio;
    }
    rep.constants["b1"] = best_b1;
    rep.constants["b2"] = best_b2;
    rep.verdict = std::isfinite(best_b1) && best_b1 > 0 && best_b1 <= o.b1_max;
    if (!rep.verdict) rep.note = "no feasible (b1,b2) within the search box";
    return rep;
}

// ---------------------------------------------------------------------------
// fit_lower: (b3, b4) maximising b3 b4^n subject to
//   p_t(x + a_t - x_t) >= b3 rho^n  on  ||x|| <= b4 / rho
// (the m = 0 term of the lower compound kernel estimate; higher terms only
// add nonnegative mass on top of the claim being verified).
// ---------------------------------------------------------------------------

inline BoundReport fit_lower(const DensitySweep& sw, const FitOptions& o = {}) {
    BoundReport rep;
    rep.op = "fit_lower";
    rep.direction = "lower";
    rep.shape = "indicator";
    if (sw.points.empty()) throw InvalidArgument("fit_lower: empty sweep");

    // per t: prefix-min of p_rec(x - x_t)/rho^n over growing scaled radius
    struct Prefix {
        std::vector<double> z;    // sorted scaled radii
        std::vector<double> mmin; // running min of the scaled density
    };
    std::vector<Prefix> pre;
    double z_cap = std::numeric_limits<double>::infinity();
    for (const auto& p : sw.points) {
        const GridSpec& g = p.grid;
        std::array<std::size_t, 3> cix{};
        if (!g.nearest_cell(p.x_t, cix)) throw InvalidArgument("fit_lower: x_t outside grid");
        std::vector<std::pair<double, double>> zs;
        zs.reserve(g.size());
        double rim = o.rim_fraction * g.extent;
        for (std::size_t i = 0; i < g.size(); ++i) {
            Vec x = g.point(i);  // the ball variable
            if (x.norm() > rim) continue;
            // p_rec evaluated at x - x_t: shift by integer cells
            auto ix = g.unflatten(i);
            bool ok = true;
            std::array<std::size_t, 3> jx{};
            for (int d = 0; d < g.dim; ++d) {
                long j = static_cast<long>(ix[d]) - (static_cast<long>(cix[d]) -
                                                     static_cast<long>(g.n / 2));
                if (j < 0 || j >= static_cast<long>(g.n)) {
                    ok = false;
                    break;
                }
                jx[d] = static_cast<std::size_t>(j);
            }
            if (!ok) continue;
            double val = p.p_rec.values[g.flatten(jx)] / std::pow(p.rho, g.dim);
            zs.emplace_back(p.rho * x.norm(), val);
        }
        std::sort(zs.begin(), zs.end());
        Prefix px;
        px.z.reserve(zs.size());
        px.mmin.reserve(zs.size());
        double run = std::numeric_limits<double>::infinity();
        for (auto& [z, v] : zs) {
            run = std::min(run, v);
            px.z.push_back(z);
            px.mmin.push_back(run);
        }
        z_cap = std::min(z_cap, p.rho * rim * 0.99);
        pre.push_back(std::move(px));
    }

    auto b3_for = [&](double b4) {
        double b3 = std::numeric_limits<double>::infinity();
        for (const auto& px : pre) {
            auto it = std::upper_bound(px.z.begin(), px.z.end(), b4);
            if (it == px.z.begin()) return 0.0;  // no grid point inside the ball
            b3 = std::min(b3, px.mmin[static_cast<std::size_t>(it - px.z.begin()) - 1]);
        }
        return std::max(b3, 0.0);
    };

    const int dim = sw.points.front().grid.dim;
    double best = -1, best_b3 = 0, best_b4 = 0;
    for (int i = 0; i < 240; ++i) {
        double b4 = z_cap * std::pow(1e-3, 1.0 - i / 239.0);
        double b3 = b3_for(b4);
        double obj = b3 * std::pow(b4, dim);
        if (obj > best) {
            best = obj;
            best_b3 = b3;
            best_b4 = b4;
        }
    }
    rep.constants["b3"] = best_b3;
    rep.constants["b4"] = best_b4;
    rep.verdict = best_b3 > 0 && best_b4 > 0;
    for (std::size_t k = 0; k < sw.points.size(); ++k) {
        BoundReport::Row r;
        r.t = sw.points[k].t;
        r.rho = sw.points[k].rho;
        // worst (smallest) density-to-bound ratio inside the fitted ball
        double m = std::numeric_limits<double>::infinity();
        auto it = std::upper_bound(pre[k].z.begin(), pre[k].z.end(), best_b4);
        if (it != pre[k].z.begin())
            m = pre[k].mmin[static_cast<std::size_t>(it - pre[k].z.begin()) - 1];
        r.worst_ratio = best_b3 > 0 ? m / best_b3 : 0.0;
        r.margin = r.worst_ratio - 1.0;
        rep.rows.push_back(r);
    }
    if (!rep.verdict) rep.note = "no positive (b3,b4) pair found";
    return rep;
}

}  // namespace levykit

#include "levykit/bounds_bell.hpp"
