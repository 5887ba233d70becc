#include <doctest.h>

#include <filesystem>
#include <random>

#include "levykit/grid.hpp"

using namespace levykit;

TEST_SUITE_BEGIN("fft_grid");

static std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& a,
                                                   int dir) {
    std::size_t n = a.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> s = 0;
        for (std::size_t j = 0; j < n; ++j)
            s += a[j] * std::polar(1.0, dir * 2.0 * pi * static_cast<double>(j * k % n) /
                                            static_cast<double>(n));
        out[k] = s;
    }
    return out;
}

TEST_CASE("radix-2 fft matches the naive dft") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (std::size_t n : {4ul, 16ul, 64ul}) {
        std::vector<std::complex<double>> a(n);
        for (auto& v : a) v = {uni(rng), uni(rng)};
        auto want = naive_dft(a, +1);
        auto got = a;
        fft_pow2(got.data(), n, +1);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(got[i] - want[i]) < 1e-11);
    }
}

TEST_CASE("centred transforms invert each other and hit the CF convention") {
    GridSpec g(1, 3.0, 16);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<std::complex<double>> a(g.size());
    for (auto& v : a) v = {uni(rng), uni(rng)};
    auto b = a;
    cf_forward(b, g);
    // forward convention: F(k) = sum_j f_j e^{+i xi_k x_j}
    for (std::size_t k : {0ul, 5ul, 8ul, 15ul}) {
        std::complex<double> want = 0;
        for (std::size_t j = 0; j < g.size(); ++j)
            want += a[j] * std::polar(1.0, g.freq(k) * g.coord(j));
        CHECK(std::abs(b[k] - want) < 1e-12);
    }
    cf_inverse(b, g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(b[i] - a[i]) < 1e-13);
}

TEST_CASE("2-d centred transform matches the tensor definition on a delta") {
    GridSpec g(2, 2.0, 8);
    std::vector<std::complex<double>> a(g.size(), 0.0);
    std::array<std::size_t, 3> ix{};
    REQUIRE(g.nearest_cell(Vec{0.5, -1.0}, ix));
    a[g.flatten(ix)] = 1.0;
    auto b = a;
    cf_forward(b, g);
    Vec x0 = g.point(g.flatten(ix));
    for (std::size_t f = 0; f < g.size(); f += 7) {
        Vec xi = g.freq_point(f);
        std::complex<double> want = std::polar(1.0, xi.dot(x0));
        CHECK(std::abs(b[f] - want) < 1e-12);
    }
}

TEST_CASE("grid spec invariants") {
    CHECK_THROWS_AS(GridSpec(1, 1.0, 100), InvalidArgument);  // not a power of two
    CHECK_THROWS_AS(GridSpec(1, -1.0, 16), InvalidArgument);
    GridSpec g(2, 5.0, 32);
    CHECK(g.h() == doctest::Approx(10.0 / 32));
    CHECK(g.xi_max() == doctest::Approx(pi / g.h()));
    CHECK(g.size() == 1024);
    // centre cell maps to the origin
    std::array<std::size_t, 3> ix{};
    CHECK(g.nearest_cell(Vec{0.0, 0.0}, ix));
    CHECK(g.point(g.flatten(ix)).norm() == 0.0);
    CHECK_FALSE(g.nearest_cell(Vec{100.0, 0.0}, ix));
}

TEST_CASE("argmax_lex breaks ties toward the lexicographically smallest point") {
    GridSpec g(2, 1.0, 8);
    DensityGrid d;
    d.grid = g;
    d.values.assign(g.size(), 0.0);
    // two equal maxima; the one with smaller x1 must win
    std::array<std::size_t, 3> i1{}, i2{};
    REQUIRE(g.nearest_cell(Vec{-0.5, 0.25}, i1));
    REQUIRE(g.nearest_cell(Vec{0.5, -0.75}, i2));
    d.values[g.flatten(i1)] = 7.0;
    d.values[g.flatten(i2)] = 7.0;
    Vec m = argmax_lex(d);
    CHECK(m[0] == doctest::Approx(-0.5));
    CHECK(m[1] == doctest::Approx(0.25));
}

TEST_CASE("binary grid cache round-trips") {
    GridSpec g(2, 1.5, 16);
    DensityGrid d;
    d.grid = g;
    d.t = 0.25;
    d.kind = DensityKind::Bar;
    d.values.resize(g.size());
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto& v : d.values) v = uni(rng);
    std::string path = (std::filesystem::temp_directory_path() / "lvk_cache_test.lvkd").string();
    write_grid(path, d);
    DensityGrid r = read_grid(path);
    CHECK(r.grid == d.grid);
    CHECK(r.t == d.t);
    CHECK(r.kind == d.kind);
    REQUIRE(r.values.size() == d.values.size());
    for (std::size_t i = 0; i < r.values.size(); ++i) CHECK(r.values[i] == d.values[i]);
    std::filesystem::remove(path);
}

TEST_SUITE_END();
