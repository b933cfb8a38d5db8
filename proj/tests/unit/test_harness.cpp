#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dqbm/harness.hpp"

using namespace dqbm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dqbm-test-" + std::to_string(std::rand()) + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& body) {
    const auto p = dir / name;
    std::ofstream out(p);
    out << body;
    return p;
}

}  // namespace

TEST_CASE("catalog shape") {
    const auto& cat = scenario_catalog();
    CHECK(cat.size() == 7);
    std::set<std::string> names;
    for (const auto& sc : cat) {
        CHECK(names.insert(sc.name).second);  // unique
        CHECK_FALSE(sc.sweep_values.empty());
        for (double v : sc.sweep_values) CHECK(std::isfinite(v));
        CHECK(sc.t_end > 0.0);
        CHECK(sc.n_points % 2 == 1);
    }
    CHECK_THROWS_AS(find_scenario("no-such"), std::invalid_argument);
}

TEST_CASE("config parsing") {
    TempDir tmp;

    SUBCASE("valid file with comments") {
        const auto p = write_file(tmp.path, "ok.cfg",
                                  "# comment line\n"
                                  "kT=0.0259\n"
                                  "mu-list = 0.1, 0.5 , 1.0  # inline comment\n"
                                  "\n"
                                  "t_end=5\n");
        const auto ov = parse_config(p);
        CHECK(ov.scalars.at("kT") == 0.0259);
        CHECK(ov.scalars.at("t_end") == 5.0);
        REQUIRE(ov.lists.at("mu-list").size() == 3);
        CHECK(ov.lists.at("mu-list")[1] == 0.5);
    }

    SUBCASE("negative mu is rejected") {
        const auto p = write_file(tmp.path, "bad1.cfg", "mu=-1\n");
        CHECK_THROWS_WITH_AS(parse_config(p), doctest::Contains("mu must be >= 0"),
                             std::invalid_argument);
    }

    SUBCASE("misspelled key is rejected") {
        const auto p = write_file(tmp.path, "bad2.cfg", "gammma=1e-4\n");
        CHECK_THROWS_WITH_AS(parse_config(p), doctest::Contains("unknown key"),
                             std::invalid_argument);
    }

    SUBCASE("non-numeric value is rejected") {
        const auto p = write_file(tmp.path, "bad3.cfg", "kT=warm\n");
        CHECK_THROWS_AS(parse_config(p), std::invalid_argument);
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(parse_config(tmp.path / "absent.cfg"), std::invalid_argument);
    }

    SUBCASE("--set overrides the file") {
        ConfigOverrides ov;
        apply_override(ov, "kT=0.02");
        apply_override(ov, "kT=0.04");
        CHECK(ov.scalars.at("kT") == 0.04);
        CHECK_THROWS_AS(apply_override(ov, "kT"), std::invalid_argument);
        CHECK_THROWS_AS(apply_override(ov, "grid_points=64"), std::invalid_argument);
    }
}

TEST_CASE("write_csv format") {
    TempDir tmp;

    SUBCASE("empty set yields a header-only file") {
        write_csv({}, tmp.path / "empty.csv");
        std::ifstream in(tmp.path / "empty.csv");
        std::string line;
        CHECK(std::getline(in, line));
        CHECK(line == "t_fs");
        CHECK_FALSE(std::getline(in, line));
    }

    SUBCASE("one series of three points is a four-line file") {
        ObservableSeries s;
        s.label = "P@0.5";
        s.push(0.0, 0.1);
        s.push(5.0, 0.2);
        s.push(10.0, 0.3);
        write_csv({s}, tmp.path / "three.csv");
        std::ifstream in(tmp.path / "three.csv");
        std::string line;
        int lines = 0;
        std::getline(in, line);
        CHECK(line == "t_fs,P@0.5");
        ++lines;
        while (std::getline(in, line)) ++lines;
        CHECK(lines == 4);
    }

    SUBCASE("round trip preserves 12 significant digits") {
        ObservableSeries s;
        s.label = "C@1";
        for (int k = 0; k < 40; ++k) {
            s.push(0.5 * k, std::exp(-0.0831 * k) * std::cos(0.277 * k + 0.1));
        }
        const auto path = tmp.path / "roundtrip.csv";
        write_csv({s}, path);

        std::ifstream in(path);
        std::string line;
        std::getline(in, line);  // header
        std::size_t row = 0;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string t_text, v_text;
            std::getline(ss, t_text, ',');
            std::getline(ss, v_text, ',');
            const double t = std::stod(t_text);
            const double v = std::stod(v_text);
            CHECK(std::abs(t - s.times[row]) <= 1e-11 * std::max(1.0, std::abs(s.times[row])));
            CHECK(std::abs(v - s.values[row]) <= 1e-11 * std::abs(s.values[row]));
            ++row;
        }
        CHECK(row == s.size());
    }

    SUBCASE("mismatched lengths are rejected") {
        ObservableSeries a, b;
        a.push(0.0, 1.0);
        CHECK_THROWS_AS(write_csv({a, b}, tmp.path / "bad.csv"), std::invalid_argument);
    }
}

TEST_CASE("run_scenario basics at reduced resolution") {
    TempDir tmp;
    ConfigOverrides small;
    apply_override(small, "grid_points=65");
    apply_override(small, "t_end=2");

    SUBCASE("mu-list of zero reproduces the baseline identically") {
        ConfigOverrides ov = small;
        apply_override(ov, "mu-list=0");
        RunOptions opt;
        opt.out_dir = tmp.path;
        const auto result = run_scenario("decoherence-mu", ov, opt);
        REQUIRE(result.series.size() == 1);
        CHECK(result.series[0].label == "C_R@0");
        for (double v : result.series[0].values) {
            CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
        }
        CHECK(fs::exists(result.csv_path));

        // manifest finalized with diagnostics
        std::ifstream in(tmp.path / "decoherence-mu.manifest.json");
        nlohmann::json j;
        in >> j;
        CHECK(j["status"] == "ok");
        CHECK(j["diagnostics"].size() == 2);
        for (const auto& [label, d] : j["diagnostics"].items()) {
            CHECK(d["max_trace_drift"].get<double>() < 1e-6);
            CHECK(d["c_stab"].get<double>() > 0.0);
        }
    }

    SUBCASE("identical slope values give an identically unit ratio") {
        ConfigOverrides ov = small;
        apply_override(ov, "g-list=1,1");
        const auto result = run_scenario("decoherence-slope", ov);
        REQUIRE(result.series.size() == 2);
        for (const auto& s : result.series) {
            for (double v : s.values) CHECK(v == 1.0);
        }
    }

    SUBCASE("unknown scenario and conflicting overrides are rejected") {
        CHECK_THROWS_AS(run_scenario("nope", small), std::invalid_argument);

        ConfigOverrides bad = small;
        apply_override(bad, "mu=0.3");
        CHECK_THROWS_WITH_AS(run_scenario("decoherence-mu", bad),
                             doctest::Contains("mu-list"), std::invalid_argument);

        ConfigOverrides wrong_list = small;
        apply_override(wrong_list, "a-list=1,2");
        CHECK_THROWS_AS(run_scenario("decoherence-mu", wrong_list), std::invalid_argument);
    }

    SUBCASE("runs are reproducible") {
        ConfigOverrides ov = small;
        apply_override(ov, "mu-list=0.5");
        const auto a = run_scenario("decoherence-mu", ov);
        const auto b = run_scenario("decoherence-mu", ov);
        REQUIRE(a.series.size() == b.series.size());
        for (std::size_t s = 0; s < a.series.size(); ++s) {
            REQUIRE(a.series[s].size() == b.series[s].size());
            for (std::size_t k = 0; k < a.series[s].size(); ++k) {
                CHECK(a.series[s].values[k] == b.series[s].values[k]);
            }
        }
        CHECK(a.series[0].params_fingerprint == b.series[0].params_fingerprint);
    }

    SUBCASE("workers > 1 gives identical results") {
        ConfigOverrides ov = small;
        apply_override(ov, "mu-list=0.2,0.8");
        RunOptions serial, parallel;
        parallel.workers = 2;
        const auto a = run_scenario("decoherence-mu", ov, serial);
        const auto b = run_scenario("decoherence-mu", ov, parallel);
        REQUIRE(a.series.size() == b.series.size());
        for (std::size_t s = 0; s < a.series.size(); ++s) {
            for (std::size_t k = 0; k < a.series[s].size(); ++k) {
                CHECK(a.series[s].values[k] == b.series[s].values[k]);
            }
        }
    }
}

TEST_CASE("validation suite passes") {
    for (const auto& c : run_validation_suite()) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.passed);
    }
}
