#include <covest/common.hpp>
#include <covest/config.hpp>
#include <covest/csv.hpp>
#include <covest/hy.hpp>
#include <covest/inference.hpp>
#include <covest/io.hpp>
#include <covest/kernel.hpp>
#include <covest/mc.hpp>
#include <covest/sim.hpp>
#include <covest/variance.hpp>

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

using covest::RunConfig;
using covest::TickSeries;

TEST_CASE("config serialization round-trips and rejects unknown keys") {
    RunConfig cfg;
    cfg.theta = 0.27;
    cfg.kn_rule = "ceil";
    cfg.kernel = "parabola";
    cfg.variance = "plugin";
    cfg.scheme = "poisson";
    cfg.lambda1 = 3.5;
    cfg.reps = 123;
    cfg.adjust_variance = false;
    cfg.joint_tolerance = 1e-6;

    auto text = covest::serialize_config(cfg);
    auto back = covest::parse_config(text);
    CHECK(back.theta == cfg.theta);
    CHECK(back.kn_rule == cfg.kn_rule);
    CHECK(back.kernel == cfg.kernel);
    CHECK(back.variance == cfg.variance);
    CHECK(back.scheme == cfg.scheme);
    CHECK(back.lambda1 == cfg.lambda1);
    CHECK(back.reps == cfg.reps);
    CHECK(back.adjust_variance == cfg.adjust_variance);
    CHECK(back.joint_tolerance == cfg.joint_tolerance);
    // serialize(parse(serialize(x))) is stable
    CHECK(covest::serialize_config(back) == text);

    CHECK_THROWS_AS(covest::parse_config(R"({"thetta": 0.2})"), covest::ValidationError);
    CHECK_THROWS_AS(covest::parse_config("not json"), covest::ValidationError);

    // partial configs keep defaults elsewhere
    auto partial = covest::parse_config(R"({"theta": 0.3})");
    CHECK(partial.theta == 0.3);
    CHECK(partial.kernel == "triangle");
    CHECK(partial.N == 23400);
}

TEST_CASE("config validation") {
    RunConfig cfg;
    cfg.kn_rule = "down";
    CHECK_THROWS_AS(cfg.validate(), covest::ValidationError);
    cfg = RunConfig{};
    cfg.theta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), covest::ValidationError);
    cfg = RunConfig{};
    cfg.variance = "bootstrap";
    CHECK_THROWS_AS(cfg.validate(), covest::ValidationError);
    cfg = RunConfig{};
    cfg.ci_level = 1.0;
    CHECK_THROWS_AS(cfg.validate(), covest::ValidationError);
    cfg = RunConfig{};
    CHECK(cfg.make_scheme().label() != "");
}

TEST_CASE("tick csv round-trip preserves values exactly") {
    std::vector<TickSeries> series{
        TickSeries{"spy", {0.0, 0.25, 0.6180339887498949, 1.0},
                   {100.0, 100.017, 99.98123456789012, 100.11}},
        TickSeries{"qqq", {0.0, 0.5, 1.0}, {250.5, 250.25, 250.75}},
    };
    std::ostringstream out;
    covest::write_ticks_csv(out, series);
    std::istringstream in(out.str());
    auto back = covest::parse_ticks_csv(in, false, "roundtrip");
    REQUIRE(back.size() == 2);
    CHECK(back[0].asset == "spy");
    CHECK(back[1].asset == "qqq");
    CHECK(back[0].times == series[0].times);
    CHECK(back[0].values == series[0].values);
    CHECK(back[1].values == series[1].values);
}

TEST_CASE("tick csv parsing: header, asset order, time normalization") {
    std::istringstream in(
        "asset,time,value\n"
        "b,34200,10.0\n"
        "a,34200,20.0\n"
        "b,36000,10.5\n"
        "a,37800,19.5\n");
    auto series = covest::parse_ticks_csv(in, true, "test");
    REQUIRE(series.size() == 2);
    // first appearance order, not alphabetical
    CHECK(series[0].asset == "b");
    CHECK(series[1].asset == "a");
    // pooled range [34200, 37800] maps onto [0,1]
    CHECK(series[0].times[0] == doctest::Approx(0.0));
    CHECK(series[0].times[1] == doctest::Approx(0.5));
    CHECK(series[1].times[1] == doctest::Approx(1.0));

    std::istringstream bad_header("a,b\n1,2\n");
    CHECK_THROWS_AS(covest::parse_ticks_csv(bad_header, false, "x"), covest::ValidationError);
    std::istringstream bad_row("asset,time,value\na,0.1,not_a_number\n");
    CHECK_THROWS_AS(covest::parse_ticks_csv(bad_row, false, "x"), covest::ValidationError);
}

TEST_CASE("calibration table json round-trip") {
    auto scheme = covest::SamplingScheme::subset(600, 120, 60);
    auto table = covest::calibrate(scheme, 0.15, covest::Kernel::triangle(),
                                   covest::KnRule::Ceil, 12, 1.0, 4u);
    auto text = covest::calibration_json(table);
    auto back = covest::parse_calibration(text);
    CHECK(back.key == table.key);
    CHECK(back.reps == table.reps);
    CHECK(back.rho == table.rho);
    CHECK(back.has_var_factors == table.has_var_factors);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) {
            CHECK(back.factors(k, l) == table.factors(k, l));
            CHECK(back.var_factors(k, l) == table.var_factors(k, l));
        }

    CHECK_THROWS_AS(covest::parse_calibration("{}"), covest::ValidationError);
    CHECK_THROWS_AS(covest::parse_calibration("nope"), covest::ValidationError);
}

TEST_CASE("estimate report structure") {
    TickSeries a{"a", {}, {}};
    TickSeries b{"b", {}, {}};
    for (int i = 0; i <= 24; ++i) {
        a.times.push_back(i / 24.0);
        a.values.push_back(0.01 * i + 0.05 * std::sin(2.1 * i));
    }
    for (int i = 0; i <= 12; ++i) {
        b.times.push_back(i / 12.0);
        b.values.push_back(1.0 + 0.02 * i + 0.04 * std::cos(1.3 * i));
    }
    auto panel = covest::build_panel({a, b});
    auto est = covest::hy_matrix(panel, covest::Kernel::triangle(), 2);
    auto v = covest::var_subsample(panel, covest::Kernel::triangle(), 2, 1.0, 7.0 / 12.0, false);
    auto region = covest::confidence_region(est, v, panel.n_total, 0.95);

    auto text = covest::estimate_report_json({"a", "b"}, est, panel.n_total, &v, &region,
                                             panel.warnings);
    auto j = nlohmann::json::parse(text);
    CHECK(j.contains("assets"));
    CHECK(j.contains("matrix"));
    CHECK(j.contains("k_n"));
    CHECK(j.contains("theta_effective"));
    CHECK(j.contains("variance"));
    CHECK(j.contains("confidence"));
    CHECK(j["assets"].size() == 2);
    CHECK(j["matrix"].size() == 2);
    CHECK(j["matrix"][0].size() == 2);
    CHECK(j["k_n"].get<int>() == 2);
    CHECK(j["variance"]["method"] == "subsample");
    CHECK(j["confidence"]["intervals"].size() == 4);
    // entries are reported in 1-based asset indices
    CHECK(j["confidence"]["intervals"][0]["k"] == 1);

    // without optional parts the keys are absent or null, and parsing works
    auto bare = covest::estimate_report_json({"a", "b"}, est, panel.n_total, nullptr, nullptr, {});
    auto jb = nlohmann::json::parse(bare);
    CHECK(jb.contains("matrix"));
}

TEST_CASE("mc report json is deterministic and runtime-free") {
    auto scheme = covest::SamplingScheme::subset(23400, 2340, 1170);
    covest::SvModelParams params;
    auto r = covest::run_mc(scheme, params, covest::Kernel::triangle(), covest::McTuning{}, 8,
                            2u, nullptr);
    auto t1 = covest::mc_report_json(r);
    r.runtime_seconds = 1234.5;  // must not leak into the serialized report
    auto t2 = covest::mc_report_json(r);
    CHECK(t1 == t2);

    auto j = nlohmann::json::parse(t1);
    CHECK(j.contains("entries"));
    CHECK(j.contains("std_histogram"));
    CHECK(j.contains("mean_n"));
    CHECK(!j.contains("runtime"));
    CHECK(!j.contains("runtime_seconds"));
    REQUIRE(j["entries"].size() == 3);
    CHECK(j["entries"][0].contains("entry"));
    CHECK(j["entries"][0].contains("rel_bias"));
    CHECK(j["entries"][0].contains("rmse"));
    CHECK(j["entries"][0].contains("coverage"));
}

TEST_CASE("simulate manifest lists files and truths") {
    covest::Matrix t1(2, 2, 0.5), t2(2, 2, 0.7);
    auto text = covest::simulate_manifest_json("subset(600,120,60)", 9u, 0.5, 0.0,
                                               {"rep_00000.csv", "rep_00001.csv"}, {t1, t2});
    auto j = nlohmann::json::parse(text);
    CHECK(j["scheme"] == "subset(600,120,60)");
    CHECK(j["seed"] == 9);
    CHECK(j["reps"] == 2);
    REQUIRE(j["replications"].size() == 2);
    CHECK(j["replications"][0]["file"] == "rep_00000.csv");
    CHECK(j["replications"][0]["integrated_cov"][0][0] == 0.5);
    CHECK(j["replications"][1]["integrated_cov"][1][1] == 0.7);
}

TEST_CASE("text file round trip") {
    std::string path = "/tmp/covest_io_test.txt";
    covest::write_text_file(path, "line1\nline2\n");
    CHECK(covest::read_text_file(path) == "line1\nline2\n");
    std::remove(path.c_str());
    CHECK_THROWS_AS(covest::read_text_file("/tmp/definitely_missing_covest.txt"),
                    covest::ValidationError);
}

TEST_CASE("kernel constants json") {
    auto j = nlohmann::json::parse(covest::kernel_constants_json(covest::Kernel::triangle()));
    CHECK(j["kernel"] == "triangle");
    CHECK(j["psi"].get<double>() == doctest::Approx(0.25));
    CHECK(j["kappa"].get<double>() == doctest::Approx(7585.0 / 1161216.0).epsilon(1e-6));
    CHECK(j["kappa_bar"].get<double>() == doctest::Approx(151.0 / 20160.0).epsilon(1e-6));
    CHECK(j["kappa_tilde"].get<double>() == doctest::Approx(1.0 / 24.0).epsilon(1e-6));
}
