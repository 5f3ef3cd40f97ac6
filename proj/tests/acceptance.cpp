// Acceptance suite: one criterion per runnable check, each printing a single
// pass/fail line. Run with no arguments for all criteria or with a criterion
// number (1-11) for one of them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "levylab/experiments.hpp"
#include "levylab/rng.hpp"

using namespace levylab;

namespace {

constexpr std::uint64_t kSeed = 20240917ULL;

ExperimentConfig base_config(const std::string& experiment, std::uint64_t reps,
                             double horizon = 3.0) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.seed = kSeed;
    cfg.reps = reps;
    cfg.horizon = horizon;
    cfg.gate = 4.0;
    cfg.triplet = LevyTriplet(0.0, 1.0, JumpMeasure::from_atoms({{1.0, 2.0}, {-0.5, 1.0}}));
    return cfg;
}

struct CriterionOutcome {
    bool pass = true;
    std::string detail;
};

bool rows_pass(const ExperimentResult& result, CriterionOutcome& out) {
    std::size_t failed = 0;
    for (const auto& row : result.rows)
        if (!row.pass) {
            ++failed;
            if (out.detail.empty())
                out.detail = "first failing row: " + row.params + " estimate=" +
                             std::to_string(row.estimate) + " target=" +
                             std::to_string(row.target);
        }
    out.pass = out.pass && failed == 0;
    if (failed > 0)
        out.detail += " (" + std::to_string(failed) + "/" +
                      std::to_string(result.rows.size()) + " rows failed)";
    return failed == 0;
}

// 1. isometry suite, 10 randomized rectangle pairs, 1e6 replicates
CriterionOutcome criterion_1() {
    CriterionOutcome out;
    ExperimentConfig cfg = base_config("verify-isometry", 1000000);
    cfg.params["pairs"] = "10";
    rows_pass(run_experiment(cfg), out);
    return out;
}

// 2. chaos oracle vs MC, orders 1-3, 1e6 replicates
CriterionOutcome criterion_2() {
    CriterionOutcome out;
    ExperimentConfig cfg = base_config("chaos-oracle-vs-mc", 1000000);
    rows_pass(run_experiment(cfg), out);
    return out;
}

// 3. S2 norm: enumeration, MC, decay in N
CriterionOutcome criterion_3() {
    CriterionOutcome out;
    ExperimentConfig cfg = base_config("s2-norm", 600000);
    cfg.params["exact_cases"] = "2:2 2:8 3:4";
    cfg.params["mc_cases"] = "2:2 2:4";
    cfg.params["decay_levels"] = "2 4 8 16 32 64 128 256";
    cfg.params["decay_max_ratio"] = "0.01";
    rows_pass(run_experiment(cfg), out);
    return out;
}

// 4. product rule at 1e4 sampled points over 20 random pairs
CriterionOutcome criterion_4() {
    CriterionOutcome out;
    ExperimentConfig cfg = base_config("verify-product-rule", 100);
    cfg.params["pairs"] = "20";
    cfg.params["points"] = "10000";
    rows_pass(run_experiment(cfg), out);
    return out;
}

// 5. chain rule: |y| jump bound, sin zero-part, mollifier bounds
CriterionOutcome criterion_5() {
    CriterionOutcome out;
    ExperimentConfig cfg = base_config("verify-chain-rule", 100);
    cfg.params["points"] = "10000";
    rows_pass(run_experiment(cfg), out);
    ExperimentConfig mol = base_config("mollifier-bounds", 100);
    mol.params["levels"] = "2 8 32";
    mol.params["grid_points"] = "10000";
    rows_pass(run_experiment(mol), out);
    return out;
}

ExperimentConfig lemma4_config(double sigma, std::uint64_t reps) {
    ExperimentConfig cfg;
    cfg.experiment = "lemma4-convergence";
    cfg.seed = kSeed;
    cfg.reps = reps;
    cfg.horizon = 1.0;
    cfg.gate = 4.0;
    cfg.triplet = LevyTriplet(0.0, sigma, JumpMeasure::from_atoms({{1.0, 2.0}}));
    cfg.params["meshes"] = "0.25 0.0625 0.015625 0.00390625";
    cfg.params["bump_lo"] = "0.5";
    cfg.params["bump_hi"] = "1.5";
    cfg.params["bump_height"] = "0.7";
    cfg.params["interval_lo"] = "0";
    cfg.params["interval_hi"] = "1";
    cfg.params["final_ratio"] = "0.2";
    return cfg;
}

// 6. first-chaos approximation converges over the mesh schedule (sigma = 0.5)
CriterionOutcome criterion_6() {
    CriterionOutcome out;
    rows_pass(run_experiment(lemma4_config(0.5, 100000)), out);
    return out;
}

// 7. pure-jump case matches the per-cell Poisson oracle (sigma = 0)
CriterionOutcome criterion_7() {
    CriterionOutcome out;
    rows_pass(run_experiment(lemma4_config(0.0, 100000)), out);
    return out;
}

// 8. centered-functional inequality for five centered functionals
CriterionOutcome criterion_8() {
    CriterionOutcome out;
    ExperimentConfig cfg = base_config("centered-inequality", 200000);
    rows_pass(run_experiment(cfg), out);
    return out;
}

// 9. FULL = ZERO + JUMP - L2 per path and on the chaos oracle
CriterionOutcome criterion_9() {
    CriterionOutcome out;
    ExperimentConfig cfg = base_config("d12-decomposition", 100);
    cfg.params["paths"] = "200";
    rows_pass(run_experiment(cfg), out);
    return out;
}

// 10. smoothing + partition + cutoff pipeline over a 3-stage schedule
CriterionOutcome criterion_10() {
    CriterionOutcome out;
    ExperimentConfig cfg;
    cfg.experiment = "theorem1-pipeline";
    cfg.seed = kSeed;
    cfg.reps = 40000;
    cfg.horizon = 2.0;
    cfg.gate = 4.0;
    cfg.triplet = LevyTriplet(0.0, 0.5, JumpMeasure::from_atoms({{1.0, 2.0}, {-0.5, 1.0}}));
    cfg.params["rects"] = "0:1:0.5:1.5 1:2:-1:-0.25";
    cfg.params["deltas"] = "0.3 0.01 0.0001";
    cfg.params["meshes"] = "0.25 0.0625 0.015625";
    cfg.params["cutoffs"] = "4 6 8";
    cfg.params["final_ratio"] = "0.3";
    rows_pass(run_experiment(cfg), out);
    return out;
}

// 11. byte-identical estimates for every experiment regardless of thread count
CriterionOutcome criterion_11() {
    CriterionOutcome out;
    for (const auto& [name, _] : experiment_catalog()) {
        ExperimentConfig cfg = base_config(name, 4000);
        if (name == "lemma4-convergence" || name == "lemma4-error-terms") {
            cfg.triplet = LevyTriplet(0.0, 0.5, JumpMeasure::from_atoms({{1.0, 2.0}}));
            cfg.horizon = 1.0;
            cfg.params["meshes"] = "0.25 0.0625";
        }
        if (name == "verify-product-rule") cfg.params["points"] = "800";
        if (name == "verify-chain-rule") cfg.params["points"] = "800";
        if (name == "mollifier-bounds") cfg.params["grid_points"] = "1000";
        if (name == "d12-decomposition") cfg.params["paths"] = "32";
        if (name == "theorem1-pipeline") {
            cfg.triplet =
                LevyTriplet(0.0, 0.5, JumpMeasure::from_atoms({{1.0, 2.0}, {-0.5, 1.0}}));
            cfg.horizon = 2.0;
            cfg.params["rects"] = "0:1:0.5:1.5 1:2:-1:-0.25";
            cfg.params["deltas"] = "0.3 0.01";
            cfg.params["meshes"] = "0.25 0.125";
            cfg.params["cutoffs"] = "4 6";
        }
        cfg.threads = 1;
        const std::string one = deterministic_digest(run_experiment(cfg));
        cfg.threads = 5;
        const std::string five = deterministic_digest(run_experiment(cfg));
        cfg.threads = 3;
        const std::string three = deterministic_digest(run_experiment(cfg));
        if (one != five || one != three) {
            out.pass = false;
            out.detail += name + " differs across thread counts; ";
        }
    }
    return out;
}

struct Criterion {
    int number;
    const char* description;
    CriterionOutcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "isometry suite: E[M(r1)M(r2)] = m(r1 n r2) within 4 stderr, 10 pairs",
     criterion_1},
    {2, "chaos oracle vs MC second moments, orders 1-3, within 4 stderr", criterion_2},
    {3, "S2 norm: enumeration = formula to 1e-14; MC within 4 stderr; decay in N",
     criterion_3},
    {4, "product rule residual <= 1e-12 (1 + |lhs|) at 1e4 sampled points", criterion_4},
    {5, "chain rule: |y| jump bound, sin zero-part to 1e-10, mollifier bounds",
     criterion_5},
    {6, "first-chaos approximation: distances non-increasing, final <= 0.2 x first",
     criterion_6},
    {7, "pure-jump distances match the Poisson conditioning oracle within 4 stderr",
     criterion_7},
    {8, "centered functionals: E|F|^2 <= E||DF||^2 within 4 combined stderr",
     criterion_8},
    {9, "FULL = ZERO + JUMP - L2 per path (<= 1e-12) and exactly on the oracle",
     criterion_9},
    {10, "pipeline: 3-stage distances decrease, final <= 0.3 x first, bound respected",
     criterion_10},
    {11, "determinism: byte-identical estimates for all experiments across threads",
     criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 11) {
            std::fprintf(stderr, "usage: %s [criterion 1-11]\n", argv[0]);
            return 2;
        }
    }
    bool all_pass = true;
    for (const auto& c : kCriteria) {
        if (only != 0 && c.number != only) continue;
        const auto start = std::chrono::steady_clock::now();
        CriterionOutcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        std::printf("[%s] criterion %2d (%.1fs): %s%s%s\n",
                    outcome.pass ? "PASS" : "FAIL", c.number, secs, c.description,
                    outcome.detail.empty() ? "" : " -- ", outcome.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && outcome.pass;
    }
    return all_pass ? 0 : 1;
}
