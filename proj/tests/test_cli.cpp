#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

TEST_SUITE_BEGIN("cli");

namespace {

struct RunResult {
    int status = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(LEVYKIT_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
    int rc = pclose(p);
    r.status = WEXITSTATUS(rc);
    return r;
}

}  // namespace

TEST_CASE("list-models enumerates the registry") {
    RunResult r = run_cli("list-models");
    CHECK(r.status == 0);
    CHECK(r.out.find("stable-1d-cauchy") != std::string::npos);
    CHECK(r.out.find("axis-degenerate-2d") != std::string::npos);
}

TEST_CASE("check-a: pass for the cauchy model, fail with witness for the degenerate one") {
    RunResult ok = run_cli("check-a --model stable-1d-cauchy");
    CHECK(ok.status == 0);
    CHECK(ok.out.find("VERDICT,condition_a,pass") != std::string::npos);
    CHECK(ok.out.find("beta_hat=") != std::string::npos);

    RunResult fail = run_cli("check-a --model axis-degenerate-2d");
    CHECK(fail.status != 0);
    CHECK(fail.out.find("VERDICT,condition_a,fail") != std::string::npos);
    CHECK(fail.out.find("witness_dir=") != std::string::npos);
}

TEST_CASE("rho-table: log-log slope -1 for the cauchy model") {
    RunResult r = run_cli("rho-table --model stable-1d-cauchy --t 1e-3,1e-2,1e-1");
    CHECK(r.status == 0);
    // parse rho column
    std::vector<double> ts, rhos;
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.rfind("VERDICT", 0) == 0) continue;
        double t, rho, resid;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &rho, &resid) == 3) {
            ts.push_back(t);
            rhos.push_back(rho);
            CHECK(std::abs(resid - 1.0) < 1e-9);
        }
    }
    REQUIRE(ts.size() == 3);
    double slope = (std::log(rhos.back()) - std::log(rhos.front())) /
                   (std::log(ts.back()) - std::log(ts.front()));
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.01));
}

TEST_CASE("identical invocations emit byte-identical output") {
    std::string args = "density --model stable-1d-cauchy --t 0.5 --grid-n 4096 --grid-extent 64";
    RunResult a = run_cli(args);
    RunResult b = run_cli(args);
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("x1") != std::string::npos);
}

TEST_CASE("config file errors cite the key; inline models are accepted") {
    std::string dir = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
    std::string bad_path = dir + "/lvk_bad_config.json";
    {
        std::ofstream f(bad_path);
        f << R"({"model": {"dim": 1, "drift": [0.0], "measure": {"variant": "isotropic_stable", "c": 0.3}}, "t": [0.01]})";
    }
    RunResult bad = run_cli("rho-table --config " + bad_path);
    CHECK(bad.status == 2);
    CHECK(bad.out.find("model.measure.alpha") != std::string::npos);

    std::string good_path = dir + "/lvk_good_config.json";
    {
        std::ofstream f(good_path);
        f << R"({"model": {"dim": 1, "drift": [0.0], "measure": {"variant": "isotropic_stable", "alpha": 1.0, "c": 0.31830988618379067}}, "t": [0.01, 0.1]})";
    }
    RunResult good = run_cli("rho-table --config " + good_path);
    CHECK(good.status == 0);
    std::remove(bad_path.c_str());
    std::remove(good_path.c_str());
}

TEST_CASE("decompose reports the big-jump mass within its bound") {
    RunResult r = run_cli("decompose --model discretized-stable-1d --t 1e-3,1e-2");
    CHECK(r.status == 0);
    CHECK(r.out.find("VERDICT,lambda_mass_bound,pass") != std::string::npos);
}

TEST_CASE("bounds command gates on the comparability condition") {
    RunResult r = run_cli("bounds --model axis-degenerate-2d --direction upper");
    CHECK(r.status != 0);
    CHECK(r.out.find("condition A failed") != std::string::npos);
}

TEST_CASE("bell command fits the tail-sum bound for shell measures") {
    RunResult r = run_cli("bell --model discretized-stable-1d --t 1e-2,1e-1 --grid-n 2048");
    CHECK(r.status == 0);
    CHECK(r.out.find("VERDICT,bell_subexp_bound:upper:tailfn,pass") != std::string::npos);
    CHECK(r.out.find("precond_C=") != std::string::npos);
}

TEST_CASE("report aggregates the battery") {
    RunResult r = run_cli("report --model stable-1d-cauchy --t 1e-2,1e-1 --grid-n 1024");
    CHECK(r.status == 0);
    CHECK(r.out.find("VERDICT,condition_a,pass") != std::string::npos);
    CHECK(r.out.find("VERDICT,upper_compound_kernel,pass") != std::string::npos);
    CHECK(r.out.find("VERDICT,lower_compound_kernel,pass") != std::string::npos);
    CHECK(r.out.find("VERDICT,route_equivalence,pass") != std::string::npos);
}

TEST_CASE("subexp-diag verdicts") {
    RunResult pareto = run_cli("subexp-diag --law pareto:1.5");
    CHECK(pareto.status == 0);
    CHECK(pareto.out.find("VERDICT,subexp_consistent,pass") != std::string::npos);
    RunResult expo = run_cli("subexp-diag --law exp:1 --t 2,4,8,16,32");
    CHECK(expo.out.find("VERDICT,subexp_consistent,fail,decisively-not-subexponential") !=
          std::string::npos);
}

TEST_SUITE_END();
