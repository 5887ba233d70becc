#pragma once

#include <complex>
#include <cstring>
#include <fstream>
#include <vector>

#include "levykit/common.hpp"
#include "levykit/fft.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Uniform centred grid on [-R, R)^n with N points per axis (N a power of two,
// divisible by 4 so the centred transform phases are exact).  Spatial points
// x_j = (j - N/2) h with h = 2R/N; frequency points xi_k = (k - N/2) dxi with
// dxi = pi/R.  The Nyquist pairing is xi_max = pi/h.
// ---------------------------------------------------------------------------

struct GridSpec {
    int dim = 1;
    double extent = 1.0;  // R
    std::size_t n = 4096; // points per axis

    GridSpec() = default;
    GridSpec(int d, double R, std::size_t N) : dim(d), extent(R), n(N) { check(); }

    void check() const {
        if (dim < 1 || dim > 3) throw InvalidArgument("GridSpec: dim must be 1..3");
        if (!(extent > 0)) throw InvalidArgument("GridSpec: extent must be > 0");
        if (n < 4 || (n & (n - 1)) != 0 || n % 4 != 0)
            throw InvalidArgument("GridSpec: N must be a power of two, N >= 4");
    }

    double h() const { return 2.0 * extent / static_cast<double>(n); }
    double dxi() const { return pi / extent; }
    double xi_max() const { return pi / h(); }
    std::size_t size() const {
        std::size_t s = 1;
        for (int d = 0; d < dim; ++d) s *= n;
        return s;
    }
    double coord(std::size_t idx_along_axis) const {
        return (static_cast<double>(idx_along_axis) - static_cast<double>(n) / 2.0) * h();
    }
    double freq(std::size_t idx_along_axis) const {
        return (static_cast<double>(idx_along_axis) - static_cast<double>(n) / 2.0) * dxi();
    }
    // decompose a flat row-major index (last axis fastest) into per-axis indices
    std::array<std::size_t, 3> unflatten(std::size_t flat) const {
        std::array<std::size_t, 3> ix{0, 0, 0};
        for (int d = dim - 1; d >= 0; --d) {
            ix[d] = flat % n;
            flat /= n;
        }
        return ix;
    }
    std::size_t flatten(const std::array<std::size_t, 3>& ix) const {
        std::size_t f = 0;
        for (int d = 0; d < dim; ++d) f = f * n + ix[d];
        return f;
    }
    Vec point(std::size_t flat) const {
        auto ix = unflatten(flat);
        Vec x(dim);
        for (int d = 0; d < dim; ++d) x[d] = coord(ix[d]);
        return x;
    }
    Vec freq_point(std::size_t flat) const {
        auto ix = unflatten(flat);
        Vec x(dim);
        for (int d = 0; d < dim; ++d) x[d] = freq(ix[d]);
        return x;
    }
    // nearest grid cell to a point; false if outside the box
    bool nearest_cell(const Vec& x, std::array<std::size_t, 3>& ix) const {
        for (int d = 0; d < dim; ++d) {
            double u = x[d] / h() + static_cast<double>(n) / 2.0;
            long j = std::lround(u);
            if (j < 0 || j >= static_cast<long>(n)) return false;
            ix[d] = static_cast<std::size_t>(j);
        }
        return true;
    }
    bool operator==(const GridSpec& o) const {
        return dim == o.dim && extent == o.extent && n == o.n;
    }
};

// ---------------------------------------------------------------------------
// Centred transforms in the characteristic-function convention:
//   forward: F_k = sum_j f_j e^{+i xi_k . x_j}
//   inverse: f_j = N^{-n} sum_k F_k e^{-i xi_k . x_j}
// With x_j, xi_k as in GridSpec these reduce to sign-flipped radix-2 FFTs.
// ---------------------------------------------------------------------------

namespace detail {

inline void checker_sign(std::vector<std::complex<double>>& a, const GridSpec& g) {
    // multiply entry j by (-1)^{sum of axis indices}
    parallel_for(a.size(), default_threads(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t f = lo; f < hi; ++f) {
            auto ix = g.unflatten(f);
            std::size_t s = 0;
            for (int d = 0; d < g.dim; ++d) s += ix[d];
            if (s & 1) a[f] = -a[f];
        }
    });
}

}  // namespace detail

inline void cf_forward(std::vector<std::complex<double>>& a, const GridSpec& g, int threads = 0) {
    detail::checker_sign(a, g);
    fft_nd(a, g.dim, g.n, +1, threads);
    detail::checker_sign(a, g);
}

inline void cf_inverse(std::vector<std::complex<double>>& a, const GridSpec& g, int threads = 0) {
    detail::checker_sign(a, g);
    fft_nd(a, g.dim, g.n, -1, threads);
    detail::checker_sign(a, g);
    const double scale = 1.0 / static_cast<double>(g.size());
    parallel_for(a.size(), threads <= 0 ? default_threads() : threads,
                 [&](std::size_t lo, std::size_t hi) {
                     for (std::size_t f = lo; f < hi; ++f) a[f] *= scale;
                 });
}

// ---------------------------------------------------------------------------
// DensityGrid: sampled density values (per unit volume).  FiniteMeasure:
// per-cell masses.  Keeping the unit conventions distinct makes convolution
// normalisation trivial: density (*) measure -> density, with no h^n factor.
// ---------------------------------------------------------------------------

enum class DensityKind { Full, Bar, Derivative };
enum class DepositMode { Auto, CellSnap, Spectral };

struct DensityGrid {
    GridSpec grid;
    std::vector<double> values;
    double t = 0;
    DensityKind kind = DensityKind::Full;
    std::array<int, 3> deriv{0, 0, 0};
    // diagnostics
    double imag_residual = 0;     // max |Im| left after inversion
    double tail_defect = 0;       // estimated probability mass beyond the box
    bool periodized = true;       // FFT route: values are the periodised density

    double riemann_mass() const {
        double s = 0;
        for (double v : values) s += v;
        return s * std::pow(grid.h(), grid.dim);
    }
    double peak() const {
        double m = 0;
        for (double v : values) m = std::max(m, v);
        return m;
    }
    double min_value() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
};

struct FiniteMeasure {
    GridSpec grid;
    std::vector<double> masses;
    double declared_mass = 0;     // exact mass of the represented measure
    double support_radius = 0;    // radius of the true support (pre-folding)
    bool folded = false;          // spectral deposition wraps mod the box
    DepositMode mode = DepositMode::CellSnap;

    double total() const {
        double s = 0;
        for (double v : masses) s += v;
        return s;
    }
};

// Lexicographically first argmax (coordinate order, smallest first).  The
// row-major layout scans axis 0 slowest, which is exactly the lexicographic
// order on (x_1, ..., x_n).
inline Vec argmax_lex(const DensityGrid& d) {
    std::size_t best = 0;
    double bv = d.values.empty() ? 0.0 : d.values[0];
    for (std::size_t i = 1; i < d.values.size(); ++i)
        if (d.values[i] > bv) {
            bv = d.values[i];
            best = i;
        }
    return d.grid.point(best);
}

// ---------------------------------------------------------------------------
// Binary grid cache.  Layout (little-endian):
//   magic "LVKD" | u32 version | u32 dim | u32 kind | u32 deriv[3]
//   f64 t | per axis: u64 N, f64 extent | row-major f64 values
// ---------------------------------------------------------------------------

inline void write_grid(const std::string& path, const DensityGrid& d) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("write_grid: cannot open " + path);
    const char magic[4] = {'L', 'V', 'K', 'D'};
    os.write(magic, 4);
    auto w32 = [&](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    auto w64 = [&](std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    auto wd = [&](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    w32(1u);
    w32(static_cast<std::uint32_t>(d.grid.dim));
    w32(static_cast<std::uint32_t>(d.kind));
    for (int i = 0; i < 3; ++i) w32(static_cast<std::uint32_t>(d.deriv[i]));
    wd(d.t);
    for (int i = 0; i < d.grid.dim; ++i) {
        w64(d.grid.n);
        wd(d.grid.extent);
    }
    os.write(reinterpret_cast<const char*>(d.values.data()),
             static_cast<std::streamsize>(d.values.size() * sizeof(double)));
    if (!os) throw Error("write_grid: short write to " + path);
}

inline DensityGrid read_grid(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("read_grid: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, "LVKD", 4) != 0) throw Error("read_grid: bad magic in " + path);
    auto r32 = [&] {
        std::uint32_t v;
        is.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto r64 = [&] {
        std::uint64_t v;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    auto rd = [&] {
        double v;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    std::uint32_t version = r32();
    if (version != 1) throw Error("read_grid: unsupported version");
    DensityGrid d;
    int dim = static_cast<int>(r32());
    d.kind = static_cast<DensityKind>(r32());
    for (int i = 0; i < 3; ++i) d.deriv[i] = static_cast<int>(r32());
    d.t = rd();
    std::size_t n = 0;
    double extent = 0;
    for (int i = 0; i < dim; ++i) {
        n = r64();
        extent = rd();
    }
    d.grid = GridSpec(dim, extent, n);
    d.values.resize(d.grid.size());
    is.read(reinterpret_cast<char*>(d.values.data()),
            static_cast<std::streamsize>(d.values.size() * sizeof(double)));
    if (!is) throw Error("read_grid: truncated file " + path);
    return d;
}

}  // namespace levykit
