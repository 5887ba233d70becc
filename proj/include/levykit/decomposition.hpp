#pragma once

#include "levykit/exponent.hpp"
#include "levykit/grid.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// The small/big-jump decomposition at time t:
//
//   Z_t = Zbar_t + Zhat_t - a_t
//   (a_t)_i   = t ( a_i + int_{1/rho_t < ||u|| < 1} u_i mu(du) )
//   psi_t     = exponent of Zbar_t (small jumps, fully compensated)
//   Lambda_t  = t mu restricted to ||u|| > 1/rho_t   (finite)
//   P_t       = e^{-Lambda(R^n)} sum_m Lambda^{*m}/m!
//
// Boundary convention: mass exactly at ||u|| = 1/rho_t belongs to the
// small-jump side and is excluded from the shift annulus; the
// boundary_to_lambda flag flips all three regions coherently.
// ---------------------------------------------------------------------------

inline Vec shift_vector(const ModelContext& ctx, double t, double rho,
                        bool boundary_to_lambda = false) {
    const auto& tr = ctx.triplet();
    Vec a = tr.drift * t;
    if (rho <= 1.0) return a;  // annulus 1/rho < ||u|| < 1 is empty
    double lo = 1.0 / rho;
    if (tr.measure.kind() == MeasureKind::TabulatedAtoms ||
        tr.measure.kind() == MeasureKind::DiscretizedStable) {
        // atomic radii: honour the boundary flag exactly
        if (tr.measure.kind() == MeasureKind::TabulatedAtoms) {
            for (const auto& [y, w] : tr.measure.atoms().atoms) {
                double r = y.norm();
                bool in = boundary_to_lambda ? (r >= lo && r < 1.0) : (r > lo && r < 1.0);
                if (in) a = a + y * (w * t);
            }
            return a;
        }
        return a;  // discretized shells are symmetric: first moment vanishes
    }
    Vec m1 = tr.measure.annulus_first_moment(lo, 1.0);
    return a + m1 * t;
}

inline std::complex<double> psi_t(const ModelContext& ctx, double t, double rho, const Vec& xi,
                                  bool boundary_to_lambda = false) {
    (void)rho;  // rho is re-derived from t inside the context memo
    return ctx.psi_t(t, xi, boundary_to_lambda);
}

// ---------------------------------------------------------------------------
// truncated_intensity: the big-jump intensity Lambda_t as a grid measure.
//
// Spectral deposition samples the exact characteristic function of Lambda_t
// at the grid frequencies and inverts; the resulting cell masses represent
// the measure folded into the periodic box, conserve the total mass exactly
// and make m-fold grid convolutions spectrally exact.  CellSnap places atoms
// on their nearest cells (exact for test fixtures, errors if support falls
// outside the box).
// ---------------------------------------------------------------------------

inline FiniteMeasure truncated_intensity(const ModelContext& ctx, double t, double rho,
                                         const GridSpec& g, DepositMode mode = DepositMode::Auto,
                                         bool boundary_to_lambda = false) {
    const LevyMeasure& mu = ctx.measure();
    if (mode == DepositMode::Auto)
        mode = mu.kind() == MeasureKind::TabulatedAtoms ? DepositMode::CellSnap
                                                        : DepositMode::Spectral;
    const double cutoff = 1.0 / rho;
    FiniteMeasure fm;
    fm.grid = g;
    fm.mode = mode;

    if (mode == DepositMode::CellSnap) {
        fm.masses.assign(g.size(), 0.0);
        double support = 0;
        if (mu.kind() != MeasureKind::TabulatedAtoms)
            throw InvalidArgument("CellSnap deposition requires an atomic measure");
        for (const auto& [y, w] : mu.atoms().atoms) {
            double r = y.norm();
            bool in = boundary_to_lambda ? (r >= cutoff) : (r > cutoff);
            if (!in) continue;
            std::array<std::size_t, 3> ix;
            if (!g.nearest_cell(y, ix))
                throw GridCoverageError("truncated_intensity: atom outside grid", r);
            fm.masses[g.flatten(ix)] += t * w;
            support = std::max(support, r);
        }
        fm.declared_mass = [&] {
            double s = 0;
            for (double v : fm.masses) s += v;
            return s;
        }();
        fm.support_radius = support;
        fm.folded = false;
        return fm;
    }

    // Spectral deposition.
    double lam = t * mu.tail_mass(cutoff);
    fm.declared_mass = lam;
    fm.folded = true;
    fm.support_radius = std::numeric_limits<double>::infinity();
    std::vector<std::complex<double>> cf(g.size());
    if (lam == 0.0) {
        fm.masses.assign(g.size(), 0.0);
        return fm;
    }
    const double s_max = g.xi_max() * std::sqrt(static_cast<double>(g.dim)) * 1.001;
    const bool shells = mu.kind() == MeasureKind::DiscretizedStable;
    const ModelContext::PerT* pt = shells ? nullptr : ctx.psi_t_snapshot(t, s_max);
    ModelContext::ShellEvaluator ev;
    if (shells) {
        ev = ctx.shell_evaluator(t);
        if (g.dim == 2) bessel_j0_warm(std::min(s_max * 2.0, 6e5));
    }
    bool symmetric = mu.symmetric();
    parallel_for(g.size(), default_threads(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t f = lo; f < hi; ++f) {
            Vec xi = g.freq_point(f);
            double s = xi.norm();
            if (s == 0) {
                cf[f] = lam;
                continue;
            }
            // Lambda_hat(xi) = lam - t int_{>cutoff} (1 - cos) mu + i t int_{>cutoff} sin mu
            double re = lam - t * (shells ? ev.lam_cos(s) : pt->lam_cos.eval(s));
            double im = symmetric ? 0.0 : t * pt->lam_sin.eval(xi[0]);
            cf[f] = {re, im};
        }
    });
    cf_inverse(cf, g);
    fm.masses.resize(g.size());
    for (std::size_t i = 0; i < cf.size(); ++i) fm.masses[i] = cf[i].real();
    return fm;
}

// ---------------------------------------------------------------------------
// Compound Poisson series.  Terms Lambda^{*m} are held spectrally (the CF is
// raised to the m-th power on the grid); real-space terms are materialised on
// demand with their mass renormalised to lambda^m exactly.
// ---------------------------------------------------------------------------

struct CompoundSeries {
    GridSpec grid;
    std::vector<std::complex<double>> lambda_hat;
    double lambda_mass = 0;
    int order = 0;           // M: largest retained term
    double tail_bound = 0;   // sum_{m > M} lambda^m / m!
    double support_radius = 0;
    bool folded = false;

    FiniteMeasure term(int m) const {
        if (m < 0 || m > order) throw InvalidArgument("CompoundSeries::term: m out of range");
        FiniteMeasure fm;
        fm.grid = grid;
        fm.mode = DepositMode::Spectral;
        fm.folded = folded;
        fm.declared_mass = std::pow(lambda_mass, m);
        fm.support_radius = support_radius * m;
        std::vector<std::complex<double>> cf(grid.size());
        for (std::size_t i = 0; i < cf.size(); ++i) {
            std::complex<double> p = 1.0;
            for (int k = 0; k < m; ++k) p *= lambda_hat[i];
            cf[i] = p;
        }
        cf_inverse(cf, grid);
        fm.masses.resize(grid.size());
        double sum = 0;
        for (std::size_t i = 0; i < cf.size(); ++i) {
            fm.masses[i] = cf[i].real();
            sum += fm.masses[i];
        }
        // renormalise to the exact mass lambda^m (conserve through convolution)
        if (sum != 0.0 && fm.declared_mass != 0.0) {
            double fix = fm.declared_mass / sum;
            for (double& v : fm.masses) v *= fix;
        }
        return fm;
    }
};

inline int poisson_truncation_order(double lambda, double eps_tail, int cap = 400) {
    // minimal M with sum_{m>M} lambda^m/m! < eps_tail
    if (lambda <= 0) return 0;
    long double term = 1.0L;  // m = 0
    long double tail = std::exp(static_cast<long double>(lambda));
    for (int m = 0; m <= cap; ++m) {
        tail -= term;  // tail = sum_{k > m} lambda^k / k!
        if (tail < static_cast<long double>(eps_tail)) {
            // recompute the tail bound directly for robustness near cancellation
            long double t2 = 0, tk = term * lambda / (m + 1);
            for (int k = m + 1; k < m + 200; ++k) {
                t2 += tk;
                tk *= lambda / (k + 1);
                if (tk < 1e-30L * std::max<long double>(t2, 1e-300L)) break;
            }
            if (t2 < static_cast<long double>(eps_tail)) return m;
        }
        term *= lambda / (m + 1);
    }
    throw InvalidArgument("poisson_truncation_order: cap exceeded");
}

inline CompoundSeries compound_series(const FiniteMeasure& lambda, double eps_tail = 1e-10) {
    if (!(eps_tail > 0)) throw InvalidArgument("compound_series: eps_tail must be > 0");
    CompoundSeries cs;
    cs.grid = lambda.grid;
    cs.lambda_mass = lambda.declared_mass;
    cs.folded = lambda.folded;
    cs.support_radius = lambda.folded ? lambda.grid.extent : lambda.support_radius;
    cs.order = poisson_truncation_order(cs.lambda_mass, eps_tail);
    {
        // tail bound as actually achieved
        long double term = 1.0L, tail = 0.0L;
        for (int m = 1; m <= cs.order; ++m) term *= cs.lambda_mass / m;
        long double tk = term * cs.lambda_mass / (cs.order + 1);
        for (int k = cs.order + 1; k < cs.order + 300; ++k) {
            tail += tk;
            tk *= cs.lambda_mass / (k + 1);
            if (tk < 1e-32L) break;
        }
        cs.tail_bound = static_cast<double>(tail);
    }
    // support overflow check for honest (non-folded) deposition
    if (!lambda.folded) {
        double needed = lambda.support_radius * std::max(1, cs.order);
        if (needed > lambda.grid.extent)
            throw GridCoverageError("compound_series: convolution support exceeds grid", needed);
    }
    cs.lambda_hat.assign(lambda.masses.begin(), lambda.masses.end());
    cf_forward(cs.lambda_hat, lambda.grid);
    return cs;
}

// P_t = e^{-lambda} sum_{m<=M} Lambda^{*m}/m!, evaluated spectrally in one pass.
inline FiniteMeasure poisson_law(const CompoundSeries& cs) {
    FiniteMeasure fm;
    fm.grid = cs.grid;
    fm.mode = DepositMode::Spectral;
    fm.folded = cs.folded;
    fm.support_radius = cs.support_radius;
    std::vector<std::complex<double>> acc(cs.grid.size());
    parallel_for(cs.grid.size(), default_threads(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            std::complex<double> term = 1.0, sum = 1.0;  // m = 0
            for (int m = 1; m <= cs.order; ++m) {
                term *= cs.lambda_hat[i] / static_cast<double>(m);
                sum += term;
            }
            acc[i] = sum * std::exp(-cs.lambda_mass);
        }
    });
    cf_inverse(acc, cs.grid);
    fm.masses.resize(cs.grid.size());
    for (std::size_t i = 0; i < acc.size(); ++i) fm.masses[i] = acc[i].real();
    fm.declared_mass = fm.total();
    return fm;
}

struct DecompositionAt {
    double t = 0;
    double rho = 0;
    Vec a_t;
    FiniteMeasure lambda;
    double lambda_mass = 0;
    int series_order = 0;
    double series_tail = 0;
};

inline DecompositionAt decompose(const ModelContext& ctx, double t, const GridSpec& g,
                                 double eps_tail = 1e-10, bool boundary_to_lambda = false) {
    DecompositionAt d;
    d.t = t;
    d.rho = ctx.rho(t);
    d.a_t = shift_vector(ctx, t, d.rho, boundary_to_lambda);
    d.lambda = truncated_intensity(ctx, t, d.rho, g, DepositMode::Auto, boundary_to_lambda);
    d.lambda_mass = d.lambda.declared_mass;
    d.series_order = poisson_truncation_order(d.lambda_mass, eps_tail);
    CompoundSeries cs = compound_series(d.lambda, eps_tail);
    d.series_tail = cs.tail_bound;
    return d;
}

}  // namespace levykit
