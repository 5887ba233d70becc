#include <doctest.h>

#include "levykit/config.hpp"

using namespace levykit;

TEST_SUITE_BEGIN("presets_config");

TEST_CASE("every preset round-trips through the config schema losslessly") {
    for (const auto& name : preset_names()) {
        ModelPreset p = preset(name);
        json j = triplet_to_json(p.triplet);
        LevyTriplet back = triplet_from_json(j);
        CHECK(back.dim == p.triplet.dim);
        CHECK(back.drift == p.triplet.drift);
        CHECK(back.measure.kind() == p.triplet.measure.kind());
        json j2 = triplet_to_json(back);
        CHECK(j == j2);  // byte-level fixed point
        // behavioural identity on a few tail evaluations
        for (double r : {0.25, 1.0, 9.0})
            CHECK(back.measure.tail_mass(r) ==
                  doctest::Approx(p.triplet.measure.tail_mass(r)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(preset("no-such-model"), InvalidArgument);
}

TEST_CASE("preset expectations are consistent with the catalog flags") {
    for (const auto& name : preset_names()) {
        ModelPreset p = preset(name);
        CHECK(p.triplet.measure.symmetric() == p.expected.symmetric);
        CHECK(p.triplet.measure.infinite_mass() == p.expected.density_capable);
    }
}

TEST_CASE("parse errors cite the offending key") {
    json j;
    j["dim"] = 1;
    j["drift"] = json::array({0.0});
    // missing measure
    try {
        triplet_from_json(j);
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(e.key == "model.measure");
    }
    j["measure"] = {{"variant", "isotropic_stable"}, {"c", 1.0}};
    try {
        triplet_from_json(j);  // missing alpha
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(e.key == "model.measure.alpha");
    }
    j["measure"] = {{"variant", "martian"}};
    try {
        triplet_from_json(j);
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(e.key == "model.measure.variant");
    }
    // invalid parameters surface as config errors on the measure path
    j["measure"] = {{"variant", "isotropic_stable"}, {"alpha", 3.0}, {"c", 1.0}};
    CHECK_THROWS_AS(triplet_from_json(j), ConfigError);
}

TEST_CASE("run config: geometric t ranges and validation") {
    json j;
    j["model"] = "stable-1d";
    j["t"] = {{"lo", 1e-3}, {"hi", 1e-1}, {"count", 3}};
    RunConfig rc = run_config_from_json(j);
    REQUIRE(rc.t_values.size() == 3);
    CHECK(rc.t_values[0] == doctest::Approx(1e-3));
    CHECK(rc.t_values[1] == doctest::Approx(1e-2));
    CHECK(rc.t_values[2] == doctest::Approx(1e-1));
    j["t"] = json::array({0.1, 0.01});
    CHECK_THROWS_AS(run_config_from_json(j), ConfigError);  // not increasing
    j["t"] = json::array({-1.0});
    CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
}

TEST_SUITE_END();
