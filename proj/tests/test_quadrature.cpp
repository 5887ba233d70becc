#include <doctest.h>

#include <random>

#include "levykit/quadrature.hpp"

using namespace levykit;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
    const GLRule& r = gl_rule(16);
    // degree-31 monomials are exact for a 16-point rule
    for (int deg : {0, 2, 10, 30}) {
        double got = gl_panel([deg](double x) { return std::pow(x, deg); }, -1.0, 1.0, r);
        double want = 2.0 / (deg + 1);
        CHECK(got == doctest::Approx(want).epsilon(1e-13));
    }
    double odd = gl_panel([](double x) { return x * x * x; }, -1.0, 1.0, r);
    CHECK(std::abs(odd) < 1e-15);
}

TEST_CASE("adaptive integration reaches requested tolerance") {
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    double got = integrate_adaptive([](double x) { return std::exp(-x * x); }, -8.0, 8.0, opt);
    CHECK(got == doctest::Approx(std::sqrt(pi)).epsilon(1e-12));

    // kinked integrand with a declared breakpoint
    double kink = integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, opt,
                                     std::vector<double>{0.3});
    CHECK(kink == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-12));
}

TEST_CASE("semi-infinite tail integration") {
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    double got = integrate_to_inf([](double x) { return std::exp(-x); }, 1.0, opt);
    CHECK(got == doctest::Approx(std::exp(-1.0)).epsilon(1e-11));
    double power = integrate_to_inf([](double x) { return std::pow(x, -2.5); }, 2.0, opt);
    CHECK(power == doctest::Approx(std::pow(2.0, -1.5) / 1.5).epsilon(1e-11));
}

TEST_CASE("integrable singularity at zero") {
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    double got = integrate_from_zero([](double x) { return 1.0 / std::sqrt(x); }, 1.0, opt);
    CHECK(got == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("non-integrable singularity is detected") {
    QuadOptions opt;
    CHECK_THROWS_AS(integrate_from_zero([](double x) { return 1.0 / x; }, 1.0, opt),
                    SingularIntegrand);
}

TEST_CASE("additivity over random split points") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> uni(0.1, 0.9);
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    auto f = [](double x) { return std::sin(3.0 * x) * std::exp(-x); };
    double whole = integrate_adaptive(f, 0.0, 1.0, opt);
    for (int k = 0; k < 20; ++k) {
        double m = uni(rng);
        double split = integrate_adaptive(f, 0.0, m, opt) + integrate_adaptive(f, m, 1.0, opt);
        CHECK(split == doctest::Approx(whole).epsilon(1e-11));
    }
}

TEST_SUITE_END();
