#include <doctest.h>

#include "levykit/bounds.hpp"
#include "levykit/presets.hpp"

using namespace levykit;

TEST_SUITE_BEGIN("bounds");

static const DensitySweep& stable1d_sweep() {
    static ModelContext ctx(preset("stable-1d").triplet);
    static DensitySweep sw = build_sweep(ctx, {1e-3, 1e-2, 1e-1}, 4096);
    return sw;
}

TEST_CASE("compound kernel: zero intensity reduces to the bare shape") {
    CompoundKernelParams p;
    p.sigma_t = 2.0;
    p.zeta_t = 3.0;
    p.h.kind = ShapeKind::ExpDecay;
    p.h.b1 = 0.5;
    p.h.b2 = 1.25;
    for (double x : {0.0, 0.4, 2.0}) {
        auto v = eval_compound_kernel(p, Vec{x});
        CHECK(v.value == doctest::Approx(2.0 * 0.5 * std::exp(-1.25 * 3.0 * x)).epsilon(1e-13));
        CHECK(v.remainder == 0.0);
    }
}

TEST_CASE("compound kernel: single-atom intensity has the factorial closed form") {
    TabulatedAtoms ta;
    double y0 = 0.5, w = 0.8;
    ta.atoms.push_back({Vec{y0}, w});
    ModelContext ctx(LevyTriplet(1, Vec::zero(1), LevyMeasure(1, ta)));
    GridSpec g(1, 16.0, 256);
    FiniteMeasure lam = truncated_intensity(ctx, 1.0, 100.0, g);
    CompoundSeries cs = compound_series(lam, 1e-14);
    CompoundKernelParams p;
    p.sigma_t = 1.3;
    p.zeta_t = 2.0;
    p.h.kind = ShapeKind::ExpDecay;
    p.h.b1 = 1.0;
    p.h.b2 = 0.7;
    p.q = &cs;
    for (double x : {0.0, 0.25, 1.5}) {
        double want = 0;
        double fact = 1;
        for (int m = 0; m <= cs.order; ++m) {
            if (m > 0) fact *= m;
            want += std::pow(w, m) / fact * p.sigma_t * p.h(p.zeta_t * std::abs(x - m * y0));
        }
        auto v = eval_compound_kernel(p, Vec{x});
        CHECK(v.value == doctest::Approx(want).epsilon(1e-9));
        CHECK(v.remainder <= p.sigma_t * p.h.b1 * 1e-13);
    }
}

TEST_CASE("compound kernel partial sums are nondecreasing in the order") {
    TabulatedAtoms ta;
    ta.atoms.push_back({Vec{0.5}, 0.9});
    ModelContext ctx(LevyTriplet(1, Vec::zero(1), LevyMeasure(1, ta)));
    GridSpec g(1, 16.0, 256);
    FiniteMeasure lam = truncated_intensity(ctx, 1.0, 100.0, g);
    CompoundSeries cs = compound_series(lam, 1e-14);
    KernelShape h;
    h.kind = ShapeKind::ExpDecay;
    h.b1 = 1.0;
    h.b2 = 1.0;
    Vec x{1.0};
    double prev = -1;
    for (int order = 0; order <= std::min(6, cs.order); ++order) {
        CompoundSeries trunc = cs;
        trunc.order = order;
        auto e = exp_series_cf(trunc);
        auto field = compound_kernel_field(g, 1.0, h, 1.0, &e);
        std::array<std::size_t, 3> ix{};
        REQUIRE(g.nearest_cell(x, ix));
        double v = field[g.flatten(ix)];
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("upper fit: feasible for the symmetric stable, both shapes") {
    const DensitySweep& sw = stable1d_sweep();
    for (ShapeKind kind : {ShapeKind::ExpDecay, ShapeKind::ExpLogDecay}) {
        BoundReport rep = fit_upper(sw, kind);
        CHECK(rep.verdict);
        CHECK(rep.constants.at("b1") > 0);
        CHECK(rep.constants.at("b2") > 0);
        // bound dominates: worst ratio of density to fitted bound is <= 1
        for (const auto& row : rep.rows) CHECK(row.worst_ratio <= 1.0 + 1e-9);
    }
    // regression guard: fitted constants frozen from this sweep configuration
    BoundReport rep = fit_upper(sw, ShapeKind::ExpDecay);
    CHECK(rep.constants.at("b1") > 0.40);
    CHECK(rep.constants.at("b1") < 0.95);
    CHECK(rep.constants.at("b2") > 0.85);
    CHECK(rep.constants.at("b2") < 1.90);
}

TEST_CASE("derivative of the density obeys the same kernel bound one power up") {
    // |d p / d x| fitted with sigma = rho^{n+1} instead of rho^n
    ModelContext ctx(preset("stable-1d").triplet);
    DensitySweep sw = build_sweep(ctx, {1e-2, 1e-1}, 4096);
    std::vector<DensityGrid> deriv_abs;
    deriv_abs.reserve(sw.points.size());
    for (const auto& p : sw.points) {
        DensityGrid d = density_derivative(ctx, p.t, p.grid, DensityKind::Full, {1, 0, 0});
        for (double& v : d.values) v = std::abs(v);
        deriv_abs.push_back(std::move(d));
    }
    std::vector<detail::FitPoint> pts;
    for (std::size_t i = 0; i < sw.points.size(); ++i)
        pts.push_back({sw.points[i].t, sw.points[i].rho, &deriv_abs[i], &sw.points[i].e_hat,
                       &sw.points[i].grid});
    BoundReport rep = fit_upper(sw, ShapeKind::ExpDecay, FitOptions{}, /*sigma_extra=*/1, &pts);
    CHECK(rep.verdict);
    CHECK(rep.constants.at("b1") > 0);
}

TEST_CASE("bare kernel term is radially monotone") {
    CompoundKernelParams p;
    p.sigma_t = 1.0;
    p.zeta_t = 2.0;
    p.h.kind = ShapeKind::ExpDecay;
    p.h.b1 = 1.0;
    p.h.b2 = 0.8;
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {0.0, 0.3, 1.0, 2.5, 7.0}) {
        double v = eval_compound_kernel(p, Vec{r}).value;
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("upper fit: infeasible when the b1 box excludes the on-diagonal floor") {
    const DensitySweep& sw = stable1d_sweep();
    FitOptions o;
    o.b1_max = 1e-6;  // far below p(0)/rho^n
    BoundReport rep = fit_upper(sw, ShapeKind::ExpDecay, o);
    CHECK_FALSE(rep.verdict);
    CHECK(!rep.note.empty());
}

TEST_CASE("lower fit: positive pair, on-diagonal floor, claim verified") {
    const DensitySweep& sw = stable1d_sweep();
    BoundReport rep = fit_lower(sw);
    CHECK(rep.verdict);
    double b3 = rep.constants.at("b3"), b4 = rep.constants.at("b4");
    CHECK(b3 > 0);
    CHECK(b4 > 0);
    // regression guard for this sweep configuration
    CHECK(b3 > 0.15);
    CHECK(b3 < 0.34);
    CHECK(b4 > 0.60);
    CHECK(b4 < 1.40);
    for (const auto& p : sw.points) {
        // p_rec(x - x_t) >= b3 rho^n on ||x|| <= b4/rho (direct re-check)
        const GridSpec& g = p.grid;
        double rho = p.rho;
        for (std::size_t i = 0; i < g.size(); ++i) {
            Vec x = g.point(i);
            if (x.norm() > b4 / rho) continue;
            Vec y = x - p.x_t;
            std::array<std::size_t, 3> ix{};
            if (!g.nearest_cell(y, ix)) continue;
            CHECK(p.p_rec.values[g.flatten(ix)] >= b3 * std::pow(rho, g.dim) * (1.0 - 1e-9));
        }
        // near-diagonal value dominates the floor
        std::array<std::size_t, 3> c{};
        REQUIRE(g.nearest_cell(p.x_t, c));
        CHECK(p.p_rec.values[g.flatten(c)] >= b3 * std::pow(rho, g.dim));
    }
}

TEST_CASE("shape comparison: the log-reinforced exponential is eventually sharper") {
    KernelShape e1;
    e1.kind = ShapeKind::ExpDecay;
    e1.b1 = 1.0;
    e1.b2 = 2.0;
    KernelShape e2;
    e2.kind = ShapeKind::ExpLogDecay;
    e2.b1 = 1.0;
    e2.b2 = 1.0;  // smaller rate still wins once log(1+z) exceeds the gap
    // compare in logs: both shapes underflow far out
    double prev = 1e300;
    for (double z : {10.0, 40.0, 160.0, 640.0}) {
        double log_ratio = -e2.b2 * z * std::log1p(z) + e1.b2 * z;
        CHECK(log_ratio < prev);
        prev = log_ratio;
    }
    CHECK(prev < std::log(1e-12));
}

TEST_CASE("power bell bound: two-sided for the stable, broken by a wrong exponent") {
    const DensitySweep& sw = stable1d_sweep();
    BoundReport ok = bell_power_bound(sw, 1.5);
    CHECK(ok.verdict);
    CHECK(ok.constants.at("c1") > 0);
    CHECK(ok.constants.at("c2") > 0);
    CHECK(ok.constants.at("c1_over_c2") < 50.0);
    // regression guard for this sweep configuration
    CHECK(ok.constants.at("c1") > 0.8);
    CHECK(ok.constants.at("c1") < 1.8);
    CHECK(ok.constants.at("c2") > 0.18);
    CHECK(ok.constants.at("c2") < 0.42);

    // claimed tail lighter than the true one: the upper precondition drifts
    BoundReport up_bad = bell_power_bound(sw, 2.5);
    CHECK_FALSE(up_bad.verdict);
    CHECK(up_bad.note.find("upper precondition") != std::string::npos);

    // claimed tail heavier than the true one: the lower direction fails
    BoundReport lo_bad = bell_power_bound(sw, 0.5);
    CHECK_FALSE(lo_bad.verdict);
    CHECK(lo_bad.note.find("lower precondition") != std::string::npos);
}

TEST_CASE("bell bound refuses models without a Levy density") {
    ModelContext ctx(preset("discretized-stable-1d").triplet);
    DensitySweep sw = build_sweep(ctx, {1e-2}, 4096);
    CHECK_THROWS_AS(bell_power_bound(sw, 1.0), ModelRejected);
}

TEST_CASE("sub-exponential tail bound for the discretized stable (n=1)") {
    ModelContext ctx(preset("discretized-stable-1d").triplet);
    DensitySweep sw = build_sweep(ctx, {1e-3, 1e-2, 1e-1}, 4096);
    BoundReport up = fit_upper(sw, ShapeKind::ExpLogDecay);
    REQUIRE(up.verdict);
    KernelShape fup;
    fup.kind = ShapeKind::ExpLogDecay;
    fup.b1 = up.constants.at("b1");
    fup.b2 = up.constants.at("b2");
    auto tail = [](double z) { return std::min(1.0, 1.0 / z); };  // alpha = 1
    BoundReport rep = bell_subexp_bound(sw, tail, fup);
    CHECK(rep.verdict);
    CHECK(rep.constants.at("precond_C") > 0);
    CHECK(std::isfinite(rep.constants.at("C1")));
    // a much lighter claimed tail breaks the domination precondition
    auto bad_tail = [](double z) { return std::min(1.0, std::pow(z, -3.0)); };
    BoundReport bad = bell_subexp_bound(sw, bad_tail, fup);
    CHECK_FALSE(bad.verdict);
}

TEST_CASE("convolution domination constant") {
    DominationResult r11 = convolution_domination_check(1, 1.0, 32, 1e3);
    CHECK(std::isfinite(r11.C));
    CHECK(r11.C > 0);
    // q*2(0) two ways at 1e-6
    CHECK(r11.q2_zero_conv ==
          doctest::Approx(r11.q2_zero_direct).epsilon(1e-6));
    // known asymptote: q*2/q -> 2 ||q||_1 = 4 for (n,b) = (1,1)
    CHECK(r11.C <= 4.0 * 1.01);
    CHECK(r11.C >= 3.0);

    // observed monotonicity: C nonincreasing in b at fixed n
    DominationResult r105 = convolution_domination_check(1, 0.5, 24, 1e3);
    DominationResult r12 = convolution_domination_check(1, 2.0, 24, 1e3);
    CHECK(r105.C >= r11.C);
    CHECK(r11.C >= r12.C);
}

TEST_CASE("compound mass curve: total mass matches the factorial series") {
    // single shell at radius 1, weight lambda: total bound mass is
    // sigma zeta^{-n} ||h||_1 e^{lambda}
    KernelShape h;
    h.kind = ShapeKind::ExpDecay;
    h.b1 = 1.0;
    h.b2 = 2.0;
    std::vector<std::pair<double, double>> shells{{1.0, 0.7}};
    std::vector<double> radii{200.0};
    auto curve = compound_mass_curve(2, h, 1.0, 1.0, shells, 20, radii, 1200);
    double want = h.l1_mass(2) * std::exp(0.7);
    CHECK(curve.back() == doctest::Approx(want).epsilon(1e-3));
}

TEST_SUITE_END();
