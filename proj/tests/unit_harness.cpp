#include <doctest.h>

#include <sstream>

#include "levylab/experiments.hpp"

using namespace levylab;

namespace {

const char* kBaseConfig = R"(
experiment = verify-isometry
seed = 12345
reps = 4000
horizon = 3.0
gate = 4.0

[triplet]
drift = 0.0
sigma = 1.0
atoms = 1.0:2.0 -0.5:1.0

[params]
pairs = 3
)";

ExperimentConfig base_config() {
    return load_experiment_config(ConfigFile::parse_string(kBaseConfig));
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config: well-formed file parses") {
    ExperimentConfig cfg = base_config();
    CHECK(cfg.experiment == "verify-isometry");
    CHECK(cfg.seed == 12345);
    CHECK(cfg.reps == 4000);
    CHECK(cfg.horizon == 3.0);
    CHECK(cfg.model().sigma() == 1.0);
    CHECK(cfg.model().nu().atoms().size() == 2);
    CHECK(cfg.params.at("pairs") == "3");
}

TEST_CASE("config: malformed inputs are rejected") {
    CHECK_THROWS_AS(ConfigFile::parse_string("key value\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("[broken\nk = v\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("a = 1\na = 2\n"), ConfigError);
    // missing mandatory keys
    CHECK_THROWS_AS(load_experiment_config(
                        ConfigFile::parse_string("experiment = s2-norm\nreps = 10\n"
                                                 "[triplet]\natoms = 1:1\n")),
                    ConfigError);
    // unknown top-level key
    CHECK_THROWS_AS(load_experiment_config(ConfigFile::parse_string(
                        "experiment = s2-norm\nseed = 1\nreps = 10\nbogus = 1\n"
                        "[triplet]\natoms = 1:1\n")),
                    ConfigError);
    // unknown triplet key
    CHECK_THROWS_AS(load_experiment_config(ConfigFile::parse_string(
                        "experiment = s2-norm\nseed = 1\nreps = 10\n"
                        "[triplet]\natoms = 1:1\nwhat = 2\n")),
                    ConfigError);
    // degenerate triplet
    CHECK_THROWS_AS(load_experiment_config(ConfigFile::parse_string(
                        "experiment = s2-norm\nseed = 1\nreps = 10\n"
                        "[triplet]\nsigma = -1\natoms = 1:1\n")),
                    ConfigError);
}

TEST_CASE("config: unknown experiment and unknown params are rejected") {
    ExperimentConfig cfg = base_config();
    cfg.experiment = "no-such-thing";
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
    cfg = base_config();
    cfg.params["bogus"] = "1";
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("catalog: the eleven experiments") {
    const auto& catalog = experiment_catalog();
    CHECK(catalog.size() == 11);
    const char* expected[] = {
        "verify-isometry",    "verify-product-rule", "verify-chain-rule",
        "chaos-oracle-vs-mc", "s2-norm",             "lemma4-convergence",
        "lemma4-error-terms", "theorem1-pipeline",   "d12-decomposition",
        "centered-inequality", "mollifier-bounds"};
    for (std::size_t i = 0; i < catalog.size(); ++i) CHECK(catalog[i].first == expected[i]);
}

TEST_CASE("run: isometry experiment passes and emits one row per pair") {
    ExperimentConfig cfg = base_config();
    cfg.reps = 20000;
    ExperimentResult result = run_experiment(cfg);
    CHECK(result.rows.size() == 3);
    CHECK(result.all_pass());
    for (const auto& row : result.rows) {
        CHECK(row.experiment == "verify-isometry");
        CHECK(row.has_target);
    }
}

TEST_CASE("csv: header, 17 significant digits, round trip") {
    ExperimentConfig cfg = base_config();
    cfg.reps = 2000;
    ExperimentResult result = run_experiment(cfg);
    std::ostringstream os;
    write_csv(os, result);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "experiment,params,estimate,stderr,target,pass,seconds");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        // 7 columns, comma-separated, none of the fields contain commas
        std::size_t commas = 0;
        for (char c : line) commas += c == ',';
        CHECK(commas == 6);
        // estimate column re-reads to the same double
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        std::getline(ls, cell, ',');
        std::getline(ls, cell, ',');
        CHECK(std::stod(cell) == result.rows[rows - 1].estimate);
    }
    CHECK(rows == result.rows.size());
}

TEST_CASE("determinism: same seed, different thread counts, identical rows") {
    ExperimentConfig cfg = base_config();
    cfg.reps = 8000;
    cfg.threads = 1;
    const std::string a = deterministic_digest(run_experiment(cfg));
    cfg.threads = 4;
    const std::string b = deterministic_digest(run_experiment(cfg));
    cfg.threads = 3;
    const std::string c = deterministic_digest(run_experiment(cfg));
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("run: every catalog name is accepted at smoke scale") {
    for (const auto& [name, _] : experiment_catalog()) {
        ExperimentConfig cfg = base_config();
        cfg.experiment = name;
        cfg.reps = 600;
        cfg.params.clear();
        if (name == "verify-isometry") cfg.params["pairs"] = "2";
        if (name == "verify-product-rule") {
            cfg.params["pairs"] = "2";
            cfg.params["points"] = "200";
        }
        if (name == "verify-chain-rule") cfg.params["points"] = "200";
        if (name == "s2-norm") {
            cfg.params["exact_cases"] = "2:2";
            cfg.params["mc_cases"] = "2:2";
        }
        if (name == "lemma4-convergence") cfg.params["meshes"] = "0.5 0.25";
        if (name == "lemma4-error-terms") cfg.params["meshes"] = "0.5 0.25";
        if (name == "theorem1-pipeline") {
            cfg.params["rects"] = "0:1:0.5:1.5";
            cfg.params["deltas"] = "0.3 0.01";
            cfg.params["meshes"] = "0.5 0.25";
            cfg.params["cutoffs"] = "6 8";
        }
        if (name == "d12-decomposition") cfg.params["paths"] = "8";
        if (name == "mollifier-bounds") {
            cfg.params["levels"] = "2";
            cfg.params["grid_points"] = "500";
        }
        ExperimentResult result;
        CHECK_NOTHROW(result = run_experiment(cfg));
        CHECK(!result.rows.empty());
    }
}

}  // TEST_SUITE
