#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "splitfit/csv.hpp"
#include "splitfit/pipeline.hpp"

using namespace splitfit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("splitfit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const fs::path& p) {
    json j;
    std::ifstream in(p);
    in >> j;
    return j;
}

const char* kAppendixConfig = R"({
  "model": {"kind": "appendix", "bounds": {"a": [-100, 100]}},
  "schedule": {"times": [1, 2, 3]},
  "truth": {"a": 2.0},
  "noise": {"kind": "custom", "values": [0.1, -0.2, 0.2]},
  "sections": {"linear_axes": [{"parameter": "a", "lo": 1.9, "hi": 2.13, "count": 231}]}
})";

} // namespace

TEST_CASE("simulate writes the worked data series and a truth sidecar") {
    TempDir tmp;
    write_text(tmp.path / "cfg.json", kAppendixConfig);

    cli::CommonArgs args;
    args.config = tmp.path / "cfg.json";
    args.out_dir = tmp.path / "out";
    REQUIRE(cli::run_simulate(args) == cli::kExitOk);

    const DataSeries data = read_series(tmp.path / "out" / "data.csv");
    REQUIRE(data.values.size() == 3);
    CHECK(data.values[0] == doctest::Approx(2.1).epsilon(1e-15));
    CHECK(data.values[1] == doctest::Approx(7.8).epsilon(1e-15));
    CHECK(data.values[2] == doctest::Approx(18.2).epsilon(1e-15));

    const json truth = read_json_file(tmp.path / "out" / "truth.json");
    CHECK(truth.at("parameters").at("a").get<double>() == 2.0);
}

TEST_CASE("seeded simulation is byte-identical across runs") {
    TempDir tmp;
    write_text(tmp.path / "cfg.json", R"({
      "model": {"kind": "exponential"},
      "schedule": {"start": 0.1, "stop": 10, "count": 40},
      "truth": {"amplitude": 3.0, "rate": 0.5},
      "noise": {"kind": "gaussian", "amplitude": 0.05, "seed": 7}
    })");

    cli::CommonArgs args;
    args.config = tmp.path / "cfg.json";

    args.out_dir = tmp.path / "a";
    REQUIRE(cli::run_simulate(args) == cli::kExitOk);
    args.out_dir = tmp.path / "b";
    REQUIRE(cli::run_simulate(args) == cli::kExitOk);
    CHECK(read_bytes(tmp.path / "a" / "data.csv") == read_bytes(tmp.path / "b" / "data.csv"));

    args.out_dir = tmp.path / "c";
    args.seed = 8;
    REQUIRE(cli::run_simulate(args) == cli::kExitOk);
    CHECK(read_bytes(tmp.path / "a" / "data.csv") != read_bytes(tmp.path / "c" / "data.csv"));
}

TEST_CASE("the appendix pipeline reproduces the worked quantities end to end") {
    TempDir tmp;
    write_text(tmp.path / "cfg.json", kAppendixConfig);

    cli::CommonArgs args;
    args.config = tmp.path / "cfg.json";
    args.out_dir = tmp.path / "out";
    REQUIRE(cli::run_simulate(args) == cli::kExitOk);
    args.data = tmp.path / "out" / "data.csv";
    args.engine = "grid";
    REQUIRE(cli::run_fit(args) == cli::kExitOk);

    const json report = read_json_file(tmp.path / "out" / "fit_report.json");
    CHECK(report.at("engine") == "grid");
    CHECK(report.at("evaluations").get<std::size_t>() == 1);
    CHECK(report.at("solution")[0].get<double>() ==
          doctest::Approx(2.011224).epsilon(1e-6));
    CHECK(report.at("merit").get<double>() ==
          doctest::Approx(fixtures::appendix_f_min()).epsilon(1e-9));
    CHECK(report.at("normal_equations").at("gram")[0][0].get<double>() ==
          doctest::Approx(98.0).epsilon(1e-12));
    CHECK(report.at("normal_equations").at("atf")[0].get<double>() ==
          doctest::Approx(197.1).epsilon(1e-12));
    REQUIRE(report.at("error_intervals").size() == 1);
    const json& interval = report.at("error_intervals")[0];
    CHECK(interval.at("parameter") == "a");
    CHECK(interval.at("width").get<double>() == doctest::Approx(0.0563).epsilon(0.01));
    CHECK(interval.at("true_error").get<double>() == doctest::Approx(0.0112).epsilon(0.01));

    REQUIRE(cli::run_sections(args) == cli::kExitOk);
    const CsvTable section = read_csv(tmp.path / "out" / "section_a.csv");
    REQUIRE(section.rows.size() == 231);
    const double a_min = fixtures::appendix_a_min();
    for (const auto& row : section.rows) {
        const double x = row[0];
        const double follower_expected = 98.0 * (x - a_min) * (x - a_min);
        CHECK(row[2] == doctest::Approx(follower_expected).epsilon(1e-9));
        CHECK(row[1] ==
              doctest::Approx(follower_expected + fixtures::appendix_f_min()).epsilon(1e-9));
    }

    REQUIRE(cli::run_analyze(args) == cli::kExitOk);
    const json analysis = read_json_file(tmp.path / "out" / "analysis.json");
    CHECK(analysis.at("noise_norm_sq").get<double>() ==
          doctest::Approx(fixtures::appendix_f_min()).epsilon(1e-12));
    CHECK(analysis.at("max_identity_residual").get<double>() <= 1e-10);
    const json& domain = analysis.at("error_intervals")[0];
    CHECK(domain.at("half_width").get<double>() == doctest::Approx(0.02815).epsilon(0.01));
    CHECK(domain.at("true_error_over_width").get<double>() == doctest::Approx(0.2).epsilon(0.05));
    for (const auto& check : analysis.at("band_checks")) CHECK(check.at("inside").get<bool>());
}

TEST_CASE("zero-noise sections coincide") {
    TempDir tmp;
    write_text(tmp.path / "cfg.json", R"({
      "model": {"kind": "appendix"},
      "schedule": {"times": [1, 2, 3]},
      "truth": {"a": 2.0},
      "noise": {"kind": "none"},
      "sections": {"linear_axes": [{"parameter": "a", "lo": 1.9, "hi": 2.1, "count": 41}]}
    })");

    cli::CommonArgs args;
    args.config = tmp.path / "cfg.json";
    args.out_dir = tmp.path / "out";
    REQUIRE(cli::run_simulate(args) == cli::kExitOk);
    args.data = tmp.path / "out" / "data.csv";
    REQUIRE(cli::run_fit(args) == cli::kExitOk);
    REQUIRE(cli::run_sections(args) == cli::kExitOk);

    const CsvTable section = read_csv(tmp.path / "out" / "section_a.csv");
    for (const auto& row : section.rows)
        CHECK(row[1] == doctest::Approx(row[2]).epsilon(1e-12));
}

TEST_CASE("consolidation round trip with the one-axis grid") {
    TempDir tmp;
    write_text(tmp.path / "cfg.json", R"({
      "model": {"kind": "consolidation", "version": "HC",
                "geometry": {"H": 1.0, "E_oed": 100.0, "v0": 0.05},
                "terms": 150,
                "bounds": {"c": [1e-3, 10.0], "sigma_inf": [-100, 100]}},
      "schedule": {"start": 0.01, "stop": 12.0, "count": 60, "spacing": "log"},
      "truth": {"A": 0.3, "B": -0.2, "C": 0.5, "sigma_inf": 5.0, "c": 0.3},
      "noise": {"kind": "gaussian", "amplitude": 0.002, "seed": 11},
      "grid": {"axes": [{"parameter": "c", "lo": 0.05, "hi": 1.5, "count": 54,
                         "spacing": "log"}]}
    })");

    cli::CommonArgs args;
    args.config = tmp.path / "cfg.json";
    args.out_dir = tmp.path / "out";
    REQUIRE(cli::run_simulate(args) == cli::kExitOk);
    args.data = tmp.path / "out" / "data.csv";
    REQUIRE(cli::run_fit(args) == cli::kExitOk);

    const json report = read_json_file(tmp.path / "out" / "fit_report.json");
    CHECK(report.at("evaluations").get<std::size_t>() == 54);

    // c recovered within one (log) grid step of the truth.
    const double c_hat = report.at("solution")[4].get<double>();
    const double step_ratio = std::pow(1.5 / 0.05, 1.0 / 53.0);
    CHECK(c_hat / 0.3 < step_ratio);
    CHECK(0.3 / c_hat < step_ratio);

    // The scan table it wrote is parseable and complete.
    const CsvTable scan_table = read_csv(tmp.path / "out" / "scan.csv");
    CHECK(scan_table.rows.size() == 54);
}

TEST_CASE("the secant-eliminated engine agrees with the grid engine") {
    TempDir tmp;
    write_text(tmp.path / "cfg.json", R"({
      "model": {"kind": "exponential"},
      "schedule": {"start": 0.1, "stop": 10, "count": 25},
      "truth": {"amplitude": 3.0, "rate": 0.5},
      "noise": {"kind": "none"},
      "grid": {"axes": [{"parameter": "rate", "lo": 0.1, "hi": 1.0, "count": 91}]},
      "solver": {"variant": "modified", "max_iterations": 60, "merit_tolerance": 1e-20,
                 "start": {"center": [0.3], "radius": 0.05}}
    })");

    cli::CommonArgs args;
    args.config = tmp.path / "cfg.json";
    args.out_dir = tmp.path / "out";
    REQUIRE(cli::run_simulate(args) == cli::kExitOk);
    args.data = tmp.path / "out" / "data.csv";

    args.engine = "grid";
    REQUIRE(cli::run_fit(args) == cli::kExitOk);
    const double grid_rate =
        read_json_file(tmp.path / "out" / "fit_report.json").at("solution")[1].get<double>();

    args.engine = "secant-eliminated";
    REQUIRE(cli::run_fit(args) == cli::kExitOk);
    const json report = read_json_file(tmp.path / "out" / "fit_report.json");
    const double secant_rate = report.at("solution")[1].get<double>();

    CHECK(std::abs(secant_rate - 0.5) <= 1e-8);
    CHECK(std::abs(grid_rate - secant_rate) <= 0.01 + 1e-9); // within grid resolution
    CHECK(fs::exists(tmp.path / "out" / "trace.csv"));
}

TEST_CASE("compression-curve resolves each stage with the long-stage c") {
    TempDir tmp;
    // Shared c, per-stage asymptote; stage 3 is the long one.
    const char* stage_cfg = R"({
      "model": {"kind": "consolidation", "version": "HC",
                "geometry": {"H": 1.0, "E_oed": 100.0, "v0": 0.05},
                "terms": 120},
      "schedule": {"start": 0.005, "stop": %STOP%, "count": 40, "spacing": "log"},
      "truth": {"A": 0.2, "B": -0.1, "C": 0.4, "sigma_inf": %SIGMA%, "c": 0.3},
      "noise": {"kind": "gaussian", "amplitude": 0.001, "seed": %SEED%}
    })";
    const std::vector<std::pair<double, double>> stages{
        {0.2, 4.0}, {0.2, 6.0}, {12.0, 8.0}}; // (stop, sigma_inf)
    for (std::size_t s = 0; s < stages.size(); ++s) {
        std::string cfg = stage_cfg;
        cfg.replace(cfg.find("%STOP%"), 6, std::to_string(stages[s].first));
        cfg.replace(cfg.find("%SIGMA%"), 7, std::to_string(stages[s].second));
        cfg.replace(cfg.find("%SEED%"), 6, std::to_string(100 + s));
        write_text(tmp.path / ("stage" + std::to_string(s) + ".json"), cfg);

        cli::CommonArgs sim;
        sim.config = tmp.path / ("stage" + std::to_string(s) + ".json");
        sim.out_dir = tmp.path / ("stage" + std::to_string(s));
        REQUIRE(cli::run_simulate(sim) == cli::kExitOk);
    }

    write_text(tmp.path / "curve.json", R"({
      "model": {"kind": "consolidation", "version": "HC",
                "geometry": {"H": 1.0, "E_oed": 100.0, "v0": 0.05},
                "terms": 120},
      "grid": {"axes": [{"parameter": "c", "lo": 0.05, "hi": 1.5, "count": 54,
                         "spacing": "log"}]},
      "compression": {"stages": ["stage0/data.csv", "stage1/data.csv", "stage2/data.csv"],
                      "long_stage": 2}
    })");

    cli::CommonArgs args;
    args.config = tmp.path / "curve.json";
    args.out_dir = tmp.path / "curve";
    REQUIRE(cli::run_compression_curve(args) == cli::kExitOk);

    const CsvTable curve = read_csv(tmp.path / "curve" / "compression_curve.csv");
    REQUIRE(curve.rows.size() == 3);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(curve.rows[s][1] ==
              doctest::Approx(stages[s].second).epsilon(0.01)); // sigma_inf within 1%
    }
}

TEST_CASE("exit codes distinguish configuration and data problems") {
    TempDir tmp;
    cli::CommonArgs args;

    SUBCASE("missing model section") {
        write_text(tmp.path / "bad.json", R"({"schedule": {"times": [1]}})");
        args.config = tmp.path / "bad.json";
        args.out_dir = tmp.path / "out";
        CHECK(cli::run_simulate(args) == cli::kExitConfig);
    }
    SUBCASE("malformed JSON") {
        write_text(tmp.path / "bad.json", "{nope");
        args.config = tmp.path / "bad.json";
        args.out_dir = tmp.path / "out";
        CHECK(cli::run_simulate(args) == cli::kExitConfig);
    }
    SUBCASE("unparseable data file") {
        write_text(tmp.path / "cfg.json", kAppendixConfig);
        write_text(tmp.path / "bad.csv", "time,value\nx,y\n");
        args.config = tmp.path / "cfg.json";
        args.data = tmp.path / "bad.csv";
        args.out_dir = tmp.path / "out";
        CHECK(cli::run_fit(args) == cli::kExitData);
    }
    SUBCASE("unknown engine") {
        write_text(tmp.path / "cfg.json", kAppendixConfig);
        args.config = tmp.path / "cfg.json";
        args.out_dir = tmp.path / "out";
        REQUIRE(cli::run_simulate(args) == cli::kExitOk);
        args.data = tmp.path / "out" / "data.csv";
        args.engine = "newton";
        CHECK(cli::run_fit(args) == cli::kExitConfig);
    }
}

TEST_CASE("csv round trip") {
    TempDir tmp;
    CsvTable t;
    t.header = {"x", "y"};
    t.rows = {{1.0, -0.25}, {2.5, 1e-17}, {3.125, 123456.789012345678}};
    write_csv(tmp.path / "t.csv", t);
    const CsvTable back = read_csv(tmp.path / "t.csv");
    REQUIRE(back.header == t.header);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(back.rows[i][j] == t.rows[i][j]);

    // LF line endings, '.' decimal, header first.
    const std::string bytes = read_bytes(tmp.path / "t.csv");
    CHECK(bytes.find("\r") == std::string::npos);
    CHECK(bytes.rfind("x,y\n", 0) == 0);
}
