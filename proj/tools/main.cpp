#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "levykit/config.hpp"
#include "levykit/report.hpp"

// Batch front end: parse a model (preset name, JSON config, or inline),
// run one of the analysis commands, emit CSV plus machine-readable verdict
// lines.  Exit status 0 iff every verdict passes.

namespace {

using namespace levykit;

struct CliState {
    RunConfig rc;
    std::string command;
    std::string shape = "expdecay";
    std::string direction = "upper";
    std::string law = "pareto:1.5";
    double bell_b = -1;
    bool mass_curve = false;
    std::string cache_name;
    std::string which = "full";
    std::string method = "fft";
    std::string deriv;
    int failures = 0;
};

std::ostream& open_out(CliState& st, const std::string& command, std::ofstream& file) {
    if (st.rc.out_dir.empty()) return std::cout;
    std::filesystem::create_directories(st.rc.out_dir);
    file.open(st.rc.out_dir + "/" + command + ".csv");
    if (!file) throw Error("cannot open output file in " + st.rc.out_dir);
    return file;
}

std::vector<double> default_ts(const CliState& st) {
    if (!st.rc.t_values.empty()) return st.rc.t_values;
    std::vector<double> ts;
    for (int i = 0; i < 5; ++i) ts.push_back(1e-3 * std::pow(100.0, i / 4.0));
    return ts;
}

GridSpec pick_grid(const CliState& st, const ModelContext& ctx, double t, DensityKind which) {
    AutoGridOptions go;
    go.eps_decay = st.rc.eps_decay;
    GridSpec g = auto_grid(ctx, t, which, go);
    if (st.rc.grid_n || st.rc.grid_extent > 0) {
        double ext = st.rc.grid_extent > 0 ? st.rc.grid_extent : g.extent;
        std::size_t n = st.rc.grid_n ? st.rc.grid_n : g.n;
        g = GridSpec(g.dim, ext, n);
    }
    return g;
}

int cmd_list_models(CliState& st) {
    std::ofstream f;
    std::ostream& os = open_out(st, "list-models", f);
    CsvWriter w(os);
    w.header({"name", "dim", "alpha", "condition_a", "symmetric", "density_capable"});
    for (const auto& name : preset_names()) {
        ModelPreset p = preset(name);
        w.mixed_row({name, std::to_string(p.triplet.dim), format_g17(p.expected.alpha),
                     p.expected.condition_a ? "true" : "false",
                     p.expected.symmetric ? "true" : "false",
                     p.expected.density_capable ? "true" : "false"});
    }
    return 0;
}

int cmd_check_a(CliState& st) {
    ModelContext ctx(st.rc.resolve_triplet());
    SphereGrid sph = SphereGrid::make(ctx.dim());
    ConditionAReport rep = ctx.check_condition_A(10.0, 1e6, 50, sph);
    std::ofstream f;
    std::ostream& os = open_out(st, "check-a", f);
    write_condition_a_csv(os, rep);
    return rep.passed ? 0 : 1;
}

int cmd_rho_table(CliState& st) {
    ModelContext ctx(st.rc.resolve_triplet());
    std::ofstream f;
    std::ostream& os = open_out(st, "rho-table", f);
    CsvWriter w(os);
    w.header({"t", "rho", "t_times_psi_star"});
    for (double t : default_ts(st)) {
        double rho = ctx.rho(t, st.rc.tol_scale);
        w.row({t, rho, t * ctx.psi_star(rho)});
    }
    return 0;
}

int cmd_decompose(CliState& st) {
    ModelContext ctx(st.rc.resolve_triplet());
    std::ofstream f;
    std::ostream& os = open_out(st, "decompose", f);
    CsvWriter w(os);
    std::vector<std::string> cols{"t", "rho", "lambda_mass", "series_order", "series_tail"};
    for (int d = 0; d < ctx.dim(); ++d) cols.push_back("a_t_" + std::to_string(d + 1));
    w.header(cols);
    bool ok = true;
    for (double t : default_ts(st)) {
        GridSpec g = pick_grid(st, ctx, t, DensityKind::Bar);
        DecompositionAt dec = decompose(ctx, t, g, st.rc.eps_tail);
        std::vector<double> row{dec.t, dec.rho, dec.lambda_mass,
                                static_cast<double>(dec.series_order), dec.series_tail};
        for (int d = 0; d < ctx.dim(); ++d) row.push_back(dec.a_t[d]);
        w.row(row);
        if (dec.lambda_mass > ctx.dim() + 1 + 1e-9) ok = false;
    }
    CsvWriter(os).verdict("lambda_mass_bound", ok);
    return ok ? 0 : 1;
}

int cmd_density(CliState& st) {
    ModelContext ctx(st.rc.resolve_triplet());
    std::ofstream f;
    std::ostream& os = open_out(st, "density", f);
    CsvWriter w(os);
    DensityKind which = st.which == "bar" ? DensityKind::Bar : DensityKind::Full;
    std::vector<double> ts = default_ts(st);
    std::vector<std::string> cols{"t"};
    for (int d = 0; d < ctx.dim(); ++d) cols.push_back("x" + std::to_string(d + 1));
    cols.push_back(st.which == "bar" ? "p_bar" : "p");
    w.header(cols);
    const char* cache_dir = std::getenv("LEVYKIT_CACHE_DIR");
    for (double t : ts) {
        GridSpec g = pick_grid(st, ctx, t, which);
        DensityOptions opt;
        opt.eps_decay = st.rc.eps_decay;
        opt.threads = st.rc.threads;
        if (st.method == "radial") opt.method = InversionMethod::RadialDirect;
        if (!st.deriv.empty()) {
            std::array<int, 3> k{0, 0, 0};
            std::stringstream ss(st.deriv);
            std::string tok;
            int d = 0;
            while (std::getline(ss, tok, ',') && d < 3) k[d++] = std::stoi(tok);
            opt.deriv = k;
        }
        DensityGrid dg = density_fourier(ctx, t, g, which, opt);
        if (!st.cache_name.empty()) {
            std::string dir = st.rc.out_dir.empty()
                                  ? (cache_dir ? std::string(cache_dir) : std::string("."))
                                  : st.rc.out_dir;
            std::filesystem::create_directories(dir);
            write_grid(dir + "/" + st.cache_name + "_t" + format_g17(t) + ".lvkd", dg);
        }
        for (std::size_t i = 0; i < dg.values.size(); ++i) {
            Vec x = g.point(i);
            std::vector<double> row{t};
            for (int d = 0; d < ctx.dim(); ++d) row.push_back(x[d]);
            row.push_back(dg.values[i]);
            w.row(row);
        }
    }
    return 0;
}

DensitySweep make_sweep(CliState& st, const ModelContext& ctx) {
    std::vector<double> ts = default_ts(st);
    std::size_t n_override = st.rc.grid_n;
    return build_sweep(ctx, ts, n_override);
}

int cmd_bounds(CliState& st) {
    ModelContext ctx(st.rc.resolve_triplet());
    SphereGrid sph = SphereGrid::make(ctx.dim());
    ConditionAReport ca = ctx.check_condition_A(10.0, 1e6, 50, sph);
    if (!ca.passed) {
        std::ofstream f;
        std::ostream& os = open_out(st, "bounds", f);
        CsvWriter(os).verdict("bounds", false, "condition A failed");
        return 1;
    }
    DensitySweep sw = make_sweep(st, ctx);
    BoundReport rep;
    if (st.direction == "lower") {
        rep = fit_lower(sw);
    } else {
        ShapeKind kind = st.shape == "explogdecay" ? ShapeKind::ExpLogDecay : ShapeKind::ExpDecay;
        rep = fit_upper(sw, kind);
    }
    std::ofstream f;
    std::ostream& os = open_out(st, "bounds", f);
    write_bound_report_csv(os, rep);
    return rep.verdict ? 0 : 1;
}

int cmd_bell(CliState& st) {
    ModelContext ctx(st.rc.resolve_triplet());
    DensitySweep sw = make_sweep(st, ctx);
    std::ofstream f;
    std::ostream& os = open_out(st, "bell", f);
    double b = st.bell_b;
    if (b < 0) {
        // default: the preset's stability index
        b = st.rc.model_name.empty() ? 1.0 : preset(st.rc.model_name).expected.alpha;
    }
    int status = 0;
    if (ctx.measure().kind() == MeasureKind::DiscretizedStable) {
        // shell measures have no Levy density: the sub-exponential tail route
        double alpha = ctx.measure().shells_spec().gamma / ctx.measure().shells_spec().upsilon;
        auto tail = [alpha](double z) { return std::min(1.0, std::pow(z, -alpha)); };
        BoundReport up = fit_upper(sw, ShapeKind::ExpLogDecay);
        KernelShape fup;
        fup.kind = ShapeKind::ExpLogDecay;
        fup.b1 = up.constants.at("b1");
        fup.b2 = up.constants.at("b2");
        BoundReport rep = bell_subexp_bound(sw, tail, fup);
        write_bound_report_csv(os, rep);
        status = rep.verdict ? 0 : 1;
        if (st.mass_curve) {
            const auto& p0 = sw.points.front();
            std::vector<double> radii;
            for (int i = 0; i <= 40; ++i)
                radii.push_back(10.0 / p0.rho * std::pow(100.0, i / 40.0));
            auto shells = ctx.measure().shells(1.0 / p0.rho, 2e4 / p0.rho);
            for (auto& [r, wgt] : shells) wgt *= p0.t;
            auto cm = compound_mass_curve(ctx.dim(), fup, std::pow(p0.rho, ctx.dim()), p0.rho,
                                          shells, p0.series.order, radii);
            auto bm = bell_mass_curve(ctx.dim(), fup, tail, p0.rho, radii);
            CsvWriter w(os);
            w.header({"radius", "bell_mass", "compound_mass"});
            for (std::size_t i = 0; i < radii.size(); ++i) w.row({radii[i], bm[i], cm[i]});
        }
    } else {
        BoundReport rep = bell_power_bound(sw, b);
        write_bound_report_csv(os, rep);
        status = rep.verdict ? 0 : 1;
    }
    return status;
}

int cmd_subexp(CliState& st) {
    std::function<double(double)> tail;
    std::vector<double> ts = st.rc.t_values;
    std::string name = st.law;
    auto colon = name.find(':');
    double par = 1.0;
    std::string fam = name.substr(0, colon);
    if (colon != std::string::npos) par = std::stod(name.substr(colon + 1));
    if (fam == "pareto") {
        double a = par;
        tail = [a](double x) { return x <= 1.0 ? 1.0 : std::pow(x, -a); };
        if (ts.empty())
            for (int i = 1; i <= 5; ++i) ts.push_back(std::pow(10.0, i));
    } else if (fam == "exp") {
        double lam = par;
        tail = [lam](double x) { return x <= 0.0 ? 1.0 : std::exp(-lam * x); };
        if (ts.empty())
            for (int i = 0; i < 5; ++i) ts.push_back(2.0 * std::pow(2.0, i));
    } else {
        throw ConfigError("unknown law (use pareto:<alpha> or exp:<rate>)", "law");
    }
    SubexpDiagnostic diag = subexp_diagnostic(tail, ts);
    std::ofstream f;
    std::ostream& os = open_out(st, "subexp-diag", f);
    CsvWriter w(os);
    w.header({"t", "ratio"});
    for (auto& [t, r] : diag.table) w.row({t, r});
    w.verdict("subexp_consistent", diag.consistent,
              diag.negative ? "decisively-not-subexponential" : "");
    return 0;
}

int cmd_report(CliState& st) {
    // aggregate battery; each sub-verdict contributes to the exit status
    int fails = 0;
    ModelContext ctx(st.rc.resolve_triplet());
    std::ofstream f;
    std::ostream& os = open_out(st, "report", f);
    CsvWriter w(os);
    SphereGrid sph = SphereGrid::make(ctx.dim());
    ConditionAReport ca = ctx.check_condition_A(10.0, 1e6, 50, sph);
    w.verdict("condition_a", ca.passed, "beta_hat=" + format_g17(ca.beta_hat));
    if (!ca.passed) return 1;
    for (double t : default_ts(st)) {
        double rho = ctx.rho(t);
        double resid = std::abs(t * ctx.psi_star(rho) - 1.0);
        if (resid > 1e-8) ++fails;
    }
    w.verdict("rho_solve", fails == 0);
    bool lam_ok = true;
    for (double t : default_ts(st)) {
        double lam = t * ctx.measure().tail_mass(1.0 / ctx.rho(t));
        if (lam > ctx.dim() + 1 + 1e-9) lam_ok = false;
    }
    w.verdict("lambda_mass_bound", lam_ok);
    if (!lam_ok) ++fails;
    if (ctx.measure().infinite_mass()) {
        DensitySweep sw = make_sweep(st, ctx);
        BoundReport up = fit_upper(sw, ShapeKind::ExpDecay);
        w.verdict("upper_compound_kernel", up.verdict,
                  "b1=" + format_g17(up.constants.at("b1")) +
                      ";b2=" + format_g17(up.constants.at("b2")));
        if (!up.verdict) ++fails;
        BoundReport lo = fit_lower(sw);
        w.verdict("lower_compound_kernel", lo.verdict,
                  "b3=" + format_g17(lo.constants.at("b3")) +
                      ";b4=" + format_g17(lo.constants.at("b4")));
        if (!lo.verdict) ++fails;
        // route equivalence on the sweep grids
        double worst = 0;
        for (const auto& p : sw.points) {
            DensityGrid full = density_fourier(ctx, p.t, p.grid, DensityKind::Full);
            FiniteMeasure plaw = poisson_law(p.series);
            DensityGrid conv = density_convolution(p.p_bar, plaw, p.a_t);
            double peak = full.peak(), diff = 0;
            for (std::size_t i = 0; i < full.values.size(); ++i)
                diff = std::max(diff, std::abs(full.values[i] - conv.values[i]));
            worst = std::max(worst, diff / peak);
        }
        w.verdict("route_equivalence", worst <= 1e-4, "sup_diff_over_peak=" + format_g17(worst));
        if (worst > 1e-4) ++fails;
    } else {
        w.verdict("density", false, "model rejected: mu(R^n) finite");
        ++fails;
    }
    return fails == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "levykit: scale functions, small/big-jump decompositions, Fourier-inverted transition "
        "densities and compound kernel / bell density bounds for Levy processes in R^n"};
    app.fallthrough(true);  // global options may follow a subcommand
    CliState st;

    std::string config_path, model, t_list, t_range;
    app.add_option("--config", config_path, "JSON run configuration file");
    app.add_option("--model", model, "preset model name (see list-models)");
    app.add_option("--t", t_list, "comma-separated t values");
    app.add_option("--t-range", t_range, "geometric t range lo:hi:count");
    app.add_option("--out", st.rc.out_dir, "output directory (default: stdout)");
    app.add_option("--grid-n", st.rc.grid_n, "grid points per axis (power of two)");
    app.add_option("--grid-extent", st.rc.grid_extent, "grid half-width");
    app.add_option("--threads", st.rc.threads, "worker threads (default: cores)");
    app.add_option("--tol-quad", st.rc.tol_quad, "quadrature relative tolerance");
    app.add_option("--tol-scale", st.rc.tol_scale, "rho solver tolerance");
    app.add_option("--tol-decay", st.rc.eps_decay, "CF decay threshold at the grid boundary");
    app.add_option("--tol-poisson-tail", st.rc.eps_tail, "compound series tail bound");
    app.add_option("--cmd", st.command, "command name (alternative to subcommands)");

    auto add_cmd = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->callback([&st, name] { st.command = name; });
        return sub;
    };
    add_cmd("list-models", "enumerate preset models");
    add_cmd("check-a", "evaluate the exponent comparability condition");
    add_cmd("rho-table", "emit (t, rho_t, t psi*(rho_t)) rows");
    add_cmd("decompose", "emit shift vector, big-jump mass and series order per t");
    CLI::App* dens = add_cmd("density", "emit the transition density grid as CSV");
    dens->add_option("--which", st.which, "full|bar");
    dens->add_option("--method", st.method, "fft|radial (radial: symmetric isotropic only)");
    dens->add_option("--deriv", st.deriv, "partial derivative orders k1[,k2[,k3]]");
    dens->add_option("--cache", st.cache_name, "also write binary grid cache files");
    CLI::App* bnd = add_cmd("bounds", "fit compound kernel bound constants");
    bnd->add_option("--direction", st.direction, "upper|lower");
    bnd->add_option("--shape", st.shape, "expdecay|explogdecay");
    CLI::App* bell = add_cmd("bell", "fit bell-like density bounds");
    bell->add_option("--b", st.bell_b, "power-tail exponent b");
    bell->add_flag("--mass-curve", st.mass_curve, "emit ball-mass curves of both bounds");
    CLI::App* sx = add_cmd("subexp-diag", "sub-exponential tail diagnostic");
    sx->add_option("--law", st.law, "pareto:<alpha> | exp:<rate>");
    add_cmd("report", "run the full battery and aggregate verdicts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw levykit::ConfigError("cannot open config file", config_path);
            levykit::json j = levykit::json::parse(f, nullptr, true, true);
            st.rc = levykit::run_config_from_json(j);
        }
        if (!model.empty()) st.rc.model_name = model;
        if (!t_list.empty()) {
            st.rc.t_values.clear();
            std::stringstream ss(t_list);
            std::string tok;
            while (std::getline(ss, tok, ',')) st.rc.t_values.push_back(std::stod(tok));
        }
        if (!t_range.empty()) {
            st.rc.t_values.clear();
            std::stringstream ss(t_range);
            std::string lo_s, hi_s, n_s;
            std::getline(ss, lo_s, ':');
            std::getline(ss, hi_s, ':');
            std::getline(ss, n_s, ':');
            double lo = std::stod(lo_s), hi = std::stod(hi_s);
            int count = std::stoi(n_s);
            for (int i = 0; i < count; ++i)
                st.rc.t_values.push_back(
                    count == 1 ? lo : lo * std::pow(hi / lo, i / static_cast<double>(count - 1)));
        }
        st.rc.validate();

        if (st.command.empty()) {
            std::cerr << "no command given (see --help)\n";
            return 2;
        }
        if (st.command == "list-models") return cmd_list_models(st);
        if (st.command == "check-a") return cmd_check_a(st);
        if (st.command == "rho-table") return cmd_rho_table(st);
        if (st.command == "decompose") return cmd_decompose(st);
        if (st.command == "density") return cmd_density(st);
        if (st.command == "bounds") return cmd_bounds(st);
        if (st.command == "bell") return cmd_bell(st);
        if (st.command == "subexp-diag") return cmd_subexp(st);
        if (st.command == "report") return cmd_report(st);
        std::cerr << "unknown command: " << st.command << "\n";
        return 2;
    } catch (const levykit::ConfigError& e) {
        std::cerr << "FAIL,config," << e.what() << "\n";
        return 2;
    } catch (const levykit::Error& e) {
        std::cerr << "FAIL,runtime," << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "FAIL,unexpected," << e.what() << "\n";
        return 1;
    }
}
