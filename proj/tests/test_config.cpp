#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "pani/cli.hpp"
#include "pani/config.hpp"
#include "pani/report.hpp"

using namespace pani;
namespace fs = std::filesystem;

namespace {

std::string repo_path(const std::string& rel) {
    // tests run from the build tree; the configs live in the source tree
    for (fs::path base : {fs::path("."), fs::path(".."), fs::path("../.."),
                          fs::path(SOURCE_DIR)}) {
        auto p = base / rel;
        if (fs::exists(p)) return p.string();
    }
    return rel;
}

int run(std::initializer_list<const char*> args) {
    std::vector<const char*> argv{"pani"};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

struct CaptureStdout {
    std::streambuf* old;
    std::ostringstream ss;
    CaptureStdout() : old(std::cout.rdbuf(ss.rdbuf())) {}
    ~CaptureStdout() { std::cout.rdbuf(old); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("every shipped example config parses") {
    for (const char* name :
         {"configs/classic_pa.json", "configs/bb_uniform.json", "configs/beta2_bb.json",
          "configs/two_atom_bb.json", "configs/sweep_alpha.json"}) {
        CHECK_NOTHROW(parse_config_file(repo_path(name)));
    }
}

TEST_CASE("strict parsing rejects bad inputs with a located error") {
    SUBCASE("unknown key") {
        CHECK_THROWS_AS(parse_config_text(R"({"law": {"kind": "uniform"},
            "model": {"form": "classic_pa", "c": 1.0}, "bogus": 1})"),
                        ConfigError);
    }
    SUBCASE("unknown nested key") {
        CHECK_THROWS_AS(parse_config_text(R"({"law": {"kind": "uniform", "oops": 2},
            "model": {"form": "classic_pa", "c": 1.0}})"),
                        ConfigError);
    }
    SUBCASE("malformed json carries line and column") {
        try {
            parse_config_text("{\n  \"law\": {\"kind\": \"uniform\"},\n  !\n}");
            FAIL("expected a parse error");
        } catch (const ConfigError& e) {
            CHECK(e.line == 3);
            CHECK(e.column >= 1);
        }
    }
    SUBCASE("missing sections") {
        CHECK_THROWS_AS(parse_config_text(R"({"model": {"form": "classic_pa", "c": 1}})"),
                        ConfigError);
    }
    SUBCASE("table form demands an atomic law") {
        CHECK_THROWS_AS(parse_config_text(R"({"law": {"kind": "uniform"},
            "model": {"form": "table", "g": [[1]], "h": [1]}})"),
                        ConfigError);
    }
}

TEST_CASE("config hash is stable under reformatting") {
    auto a = parse_config_text(R"({"law":{"kind":"uniform"},"model":{"form":"classic_pa","c":1.0}})");
    auto b = parse_config_text(R"({
        "model": {"c": 1.0, "form": "classic_pa"},
        "law": {"kind": "uniform"}
    })");
    CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("cli theory: report fields and exit codes") {
    SUBCASE("classic PA") {
        std::string out;
        int rc;
        {
            CaptureStdout cap;
            rc = run({"theory", "--config", repo_path("configs/classic_pa.json").c_str()});
            out = cap.ss.str();
        }
        CHECK(rc == 0);
        CHECK(out.find("\"regime\": \"non_condensation\"") != std::string::npos);
        CHECK(out.find("\"lambda_star\": 2.0") != std::string::npos);
    }
    SUBCASE("condensation") {
        std::string cfg = R"({"law": {"kind": "beta_poly", "alpha": 2.0},
                              "model": {"form": "bianconi_barabasi"}})";
        auto path = fs::temp_directory_path() / "pani_cond.json";
        std::ofstream(path) << cfg;
        std::string out;
        int rc;
        {
            CaptureStdout cap;
            rc = run({"theory", "--config", path.string().c_str()});
            out = cap.ss.str();
        }
        CHECK(rc == 0);
        auto j = nlohmann::json::parse(out);
        CHECK(j["regime"] == "condensation");
        CHECK(std::fabs(j["condensate_mass"].get<double>() - 0.5) < 1e-9);
        CHECK(j["lambda_star"].is_null());
    }
    SUBCASE("boundary refuses predictions with exit 2") {
        std::string cfg = R"({"law": {"kind": "beta_poly", "alpha": 1.0},
                              "model": {"form": "bianconi_barabasi"}})";
        auto path = fs::temp_directory_path() / "pani_boundary.json";
        std::ofstream(path) << cfg;
        std::string out;
        int rc;
        {
            CaptureStdout cap;
            rc = run({"theory", "--config", path.string().c_str()});
            out = cap.ss.str();
        }
        CHECK(rc == 2);
        CHECK(out.find("\"regime\": \"boundary\"") != std::string::npos);
    }
    SUBCASE("malformed config exits 1") {
        auto path = fs::temp_directory_path() / "pani_bad.json";
        std::ofstream(path) << "{ nope";
        CHECK(run({"theory", "--config", path.string().c_str()}) == 1);
    }
}

TEST_CASE("cli simulate: artifacts are byte-identical across reruns") {
    std::string cfg = R"({
        "law": {"kind": "uniform", "w_star": 1.0},
        "model": {"form": "bianconi_barabasi"},
        "run": {"n_steps": 3000, "replicas": 2, "master_seed": 99, "bins": 16, "k_max": 16}
    })";
    auto cfg_path = fs::temp_directory_path() / "pani_sim.json";
    std::ofstream(cfg_path) << cfg;
    auto out_a = fs::temp_directory_path() / "pani_out_a";
    auto out_b = fs::temp_directory_path() / "pani_out_b";
    fs::remove_all(out_a);
    fs::remove_all(out_b);
    CHECK(run({"simulate", "--config", cfg_path.string().c_str(), "--out",
               out_a.string().c_str()}) == 0);
    CHECK(run({"simulate", "--config", cfg_path.string().c_str(), "--out",
               out_b.string().c_str()}) == 0);
    for (const char* f : {"degrees.csv", "edges.csv", "zpath.csv", "manifest.json"}) {
        auto a = slurp((out_a / f).string());
        auto b = slurp((out_b / f).string());
        CHECK(a == b);
        CHECK_FALSE(a.empty());
    }
    // a seed override changes the artifacts
    auto out_c = fs::temp_directory_path() / "pani_out_c";
    fs::remove_all(out_c);
    CHECK(run({"simulate", "--config", cfg_path.string().c_str(), "--out",
               out_c.string().c_str(), "--seed", "100"}) == 0);
    CHECK(slurp((out_a / "degrees.csv").string()) !=
          slurp((out_c / "degrees.csv").string()));
}

TEST_CASE("cli sweep: phase boundary at alpha = 1") {
    std::string cfg = R"({
        "law": {"kind": "beta_poly", "alpha": 2.0},
        "model": {"form": "bianconi_barabasi"},
        "sweep": {"parameter": "alpha", "from": 0.5, "to": 2.0, "count": 4}
    })";
    auto path = fs::temp_directory_path() / "pani_sweep.json";
    std::ofstream(path) << cfg;
    std::string out;
    int rc;
    {
        CaptureStdout cap;
        rc = run({"sweep", "--config", path.string().c_str()});
        out = cap.ss.str();
    }
    CHECK(rc == 0);
    // grid 0.5, 1.0, 1.5, 2.0: split rows and parse the fields
    std::istringstream lines(out);
    std::string header, row;
    std::getline(lines, header);
    CHECK(header == "param,criterion,regime,lambda_or_gstar,condensate_mass");
    struct Row { double param, criterion; std::string regime; double mass; };
    std::vector<Row> rows;
    while (std::getline(lines, row)) {
        std::istringstream fields(row);
        std::string param, crit, regime, lam, mass;
        std::getline(fields, param, ',');
        std::getline(fields, crit, ',');
        std::getline(fields, regime, ',');
        std::getline(fields, lam, ',');
        std::getline(fields, mass, ',');
        rows.push_back({std::stod(param), std::stod(crit), regime, std::stod(mass)});
    }
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].regime == "non_condensation");
    CHECK(std::fabs(rows[0].criterion - 2.0) < 1e-6);
    CHECK(rows[1].regime == "boundary");
    CHECK(rows[3].regime == "condensation");
    CHECK(std::fabs(rows[3].criterion - 0.5) < 1e-6);
    CHECK(std::fabs(rows[3].mass - 0.5) < 1e-6);
}

TEST_CASE("cli urn: emits the eigen report") {
    std::string out;
    int rc;
    {
        CaptureStdout cap;
        rc = run({"urn", "--config", repo_path("configs/two_atom_bb.json").c_str()});
        out = cap.ss.str();
    }
    CHECK(rc == 0);
    CHECK(out.find("\"lambda\"") != std::string::npos);
    CHECK(out.find("\"B_m\"") != std::string::npos);
    CHECK(out.find("\"R_K\"") != std::string::npos);
    CHECK(out.find("\"type_count\"") != std::string::npos);
}

TEST_CASE("cli validate: suite handling") {
    SUBCASE("empty suite exits 1") {
        auto path = fs::temp_directory_path() / "pani_suite_empty.json";
        std::ofstream(path) << R"({"checks": []})";
        CHECK(run({"validate", "--config", path.string().c_str()}) == 1);
    }
    SUBCASE("unknown check name exits 1") {
        auto path = fs::temp_directory_path() / "pani_suite_unknown.json";
        std::ofstream(path) << R"({"checks": [{"name": "no_such_check"}]})";
        CHECK(run({"validate", "--config", path.string().c_str()}) == 1);
    }
    SUBCASE("corrupted tolerance fails the named check") {
        auto path = fs::temp_directory_path() / "pani_suite_bad_tol.json";
        std::ofstream(path)
            << R"({"checks": [{"name": "regime_criterion_and_sweep", "tolerance": 1e-30}]})";
        CHECK(run({"validate", "--config", path.string().c_str()}) == 3);
    }
    SUBCASE("honest tolerance passes") {
        auto path = fs::temp_directory_path() / "pani_suite_ok.json";
        std::ofstream(path)
            << R"({"checks": [{"name": "regime_criterion_and_sweep", "tolerance": 1e-6},
                              {"name": "urn_d_eigen", "tolerance": 1e-8}]})";
        CHECK(run({"validate", "--config", path.string().c_str()}) == 0);
    }
}
