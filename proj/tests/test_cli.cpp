#include <covest/csv.hpp>
#include <covest/grids.hpp>
#include <covest/io.hpp>
#include <covest/rng.hpp>

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string scratch_dir() {
    static std::string dir = [] {
        char tmpl[] = "/tmp/covest_cli_XXXXXX";
        char* d = mkdtemp(tmpl);
        REQUIRE(d != nullptr);
        return std::string(d);
    }();
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    CliResult r;
    std::string out_f = scratch_dir() + "/stdout.txt";
    std::string err_f = scratch_dir() + "/stderr.txt";
    std::string cmd =
        std::string(COVEST_CLI_PATH) + " " + args + " >" + out_f + " 2>" + err_f;
    int rc = std::system(cmd.c_str());
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out_f);
    r.err = slurp(err_f);
    return r;
}

std::string write_walk_csv(const std::string& name, int n_a, int n_b) {
    std::vector<covest::TickSeries> series;
    covest::RngStream rng(77u, 0u, 0u);
    auto make = [&](const std::string& asset, int n) {
        std::vector<double> t(static_cast<std::size_t>(n) + 1), v(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
        v[0] = 0.0;
        for (int i = 1; i <= n; ++i)
            v[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i - 1)] + 0.05 * rng.normal();
        series.push_back(covest::TickSeries{asset, std::move(t), std::move(v)});
    };
    make("a", n_a);
    if (n_b > 0) make("b", n_b);
    std::string path = scratch_dir() + "/" + name;
    covest::write_ticks_csv(path, series);
    return path;
}

}  // namespace

TEST_CASE("kernel constants subcommand") {
    auto r = run_cli("kernel-constants --kernel triangle");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["kernel"] == "triangle");
    CHECK(j["psi"].get<double>() == doctest::Approx(0.25));

    CHECK(run_cli("kernel-constants --kernel gauss").code == 3);
}

TEST_CASE("estimate over a csv panel") {
    auto csv = write_walk_csv("walk.csv", 40, 20);
    auto r = run_cli("estimate --input " + csv);
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["assets"].size() == 2);
    CHECK(j["matrix"].size() == 2);
    CHECK(j["n_total"] == 60);
    CHECK(j.contains("variance"));
    CHECK(j.contains("confidence"));
    CHECK(!j["confidence"]["intervals"].empty());

    auto quiet = run_cli("estimate --input " + csv + " --no-variance");
    REQUIRE(quiet.code == 0);
    auto jq = nlohmann::json::parse(quiet.out);
    CHECK(!jq.contains("variance"));
    CHECK(!jq.contains("confidence"));
}

TEST_CASE("estimate failure modes") {
    // non-monotone times
    std::string bad = scratch_dir() + "/bad.csv";
    {
        std::ofstream f(bad);
        f << "asset,time,value\nzzz,0.0,1.0\nzzz,0.6,1.1\nzzz,0.4,1.2\nzzz,1.0,1.3\n";
    }
    auto r = run_cli("estimate --input " + bad);
    CHECK(r.code == 3);
    CHECK(r.err.find("zzz") != std::string::npos);

    CHECK(run_cli("estimate --input /tmp/never_written_covest.csv").code == 3);
    CHECK(run_cli("estimate").code == 2);              // missing required --input
    CHECK(run_cli("estimate --nope x").code == 2);     // unknown flag
    CHECK(run_cli("conjure").code == 2);               // unknown subcommand
}

TEST_CASE("flags override config files") {
    auto csv = write_walk_csv("walk2.csv", 100, 0);
    std::string cfg = scratch_dir() + "/cfg.json";
    covest::write_text_file(cfg, R"({"theta": 0.3, "kn_rule": "round"})");

    auto from_cfg = run_cli("--config " + cfg + " estimate --input " + csv + " --no-variance");
    REQUIRE(from_cfg.code == 0);
    CHECK(nlohmann::json::parse(from_cfg.out)["k_n"] == 3);  // round(0.3 * 10)

    auto overridden = run_cli("--config " + cfg + " estimate --input " + csv +
                              " --theta 0.43 --no-variance");
    REQUIRE(overridden.code == 0);
    CHECK(nlohmann::json::parse(overridden.out)["k_n"] == 4);  // round(0.43 * 10)

    std::string bad_cfg = scratch_dir() + "/bad_cfg.json";
    covest::write_text_file(bad_cfg, R"({"thetaa": 0.3})");
    CHECK(run_cli("--config " + bad_cfg + " estimate --input " + csv).code == 3);
}

TEST_CASE("mc runs are reproducible byte for byte") {
    std::string cfg = scratch_dir() + "/mc_cfg.json";
    covest::write_text_file(cfg, R"({"scheme": "subset", "N": 23400, "n1": 2340, "n2": 1170})");
    std::string f1 = scratch_dir() + "/mc1.json";
    std::string f2 = scratch_dir() + "/mc2.json";

    auto base = "--config " + cfg + " mc --reps 8 --seed 3 --no-calibration --out ";
    REQUIRE(run_cli(base + f1).code == 0);
    REQUIRE(run_cli(base + f2).code == 0);
    auto b1 = slurp(f1);
    CHECK(!b1.empty());
    CHECK(b1 == slurp(f2));

    auto j = nlohmann::json::parse(b1);
    CHECK(j["reps"] == 8);
    CHECK(j["entries"].size() == 3);

    // --seed and --reps are mandatory
    CHECK(run_cli("--config " + cfg + " mc --reps 8 --no-calibration").code == 2);
    CHECK(run_cli("--config " + cfg + " mc --seed 3 --no-calibration").code == 2);
}

TEST_CASE("calibration pipeline through files") {
    std::string cfg = scratch_dir() + "/cal_cfg.json";
    covest::write_text_file(cfg, R"({"scheme": "subset", "N": 23400, "n1": 2340, "n2": 1170})");
    std::string table = scratch_dir() + "/table.json";

    REQUIRE(run_cli("--config " + cfg + " calibrate --seed 4 --reps 10 --out " + table).code == 0);
    auto parsed = covest::load_calibration_file(table);
    CHECK(parsed.reps == 10);

    std::string report = scratch_dir() + "/mc_cal.json";
    REQUIRE(run_cli("--config " + cfg + " mc --reps 6 --seed 5 --calibration " + table +
                    " --out " + report).code == 0);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["calibration_key"] == parsed.key);

    // table built under a different window scale is refused
    std::string other = scratch_dir() + "/table_other.json";
    REQUIRE(run_cli("--config " + cfg + " calibrate --seed 4 --reps 10 --theta 0.3 --out " +
                    other).code == 0);
    CHECK(run_cli("--config " + cfg + " mc --reps 6 --seed 5 --calibration " + other).code == 3);

    // --calibration and --no-calibration are mutually exclusive
    CHECK(run_cli("--config " + cfg + " mc --reps 6 --seed 5 --calibration " + table +
                  " --no-calibration").code == 2);
}

TEST_CASE("simulate writes panels and a manifest") {
    std::string cfg = scratch_dir() + "/sim_cfg.json";
    covest::write_text_file(cfg, R"({"scheme": "subset", "N": 600, "n1": 120, "n2": 60})");
    std::string dir = scratch_dir() + "/sims";

    REQUIRE(run_cli("--config " + cfg + " simulate --seed 6 --reps 2 --out " + dir).code == 0);

    auto manifest = nlohmann::json::parse(slurp(dir + "/manifest.json"));
    CHECK(manifest["reps"] == 2);
    REQUIRE(manifest["replications"].size() == 2);
    std::string first = manifest["replications"][0]["file"].get<std::string>();

    auto series = covest::read_ticks_csv(dir + "/" + first);
    REQUIRE(series.size() == 2);
    CHECK(series[0].points() == 121);
    CHECK(series[1].points() == 61);
    auto panel = covest::build_panel(series);
    CHECK(panel.n_total == 180);
}
