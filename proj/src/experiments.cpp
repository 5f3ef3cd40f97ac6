#include "levylab/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "levylab/denseness.hpp"
#include "levylab/rng.hpp"

namespace levylab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct RowBuilder {
    ExperimentResult& result;
    std::string experiment;
    Clock::time_point t0 = Clock::now();

    void add(const std::string& params, double estimate, double se, double target,
             bool has_target, bool pass) {
        result.rows.push_back(ResultRow{experiment, params, estimate, se, target,
                                        has_target, pass, elapsed_seconds(t0)});
        t0 = Clock::now();
    }
    void stat(const std::string& params, const MCEstimate& est, double target,
              double gate) {
        add(params, est.mean, est.stderr_, target, true,
            std::abs(est.mean - target) <= gate * est.stderr_);
    }
    void exact(const std::string& params, double estimate, double target, double rel_tol) {
        add(params, estimate, 0.0, target, true,
            std::abs(estimate - target) <= rel_tol * (1.0 + std::abs(target)));
    }
    void bound(const std::string& params, double estimate, double bound, double slop) {
        add(params, estimate, 0.0, bound, true, estimate <= bound + slop);
    }
};

// Deterministic uniform helper on [lo, hi).
double draw(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

// Compactly supported tensor product of cubic bumps with analytic gradient.
SmoothFunctional random_bump_functional(std::mt19937_64& eng, double horizon) {
    const int arity = 1 + static_cast<int>(eng() % 3);
    std::vector<double> times;
    for (int i = 0; i < arity; ++i) times.push_back(draw(eng, 0.05, 0.95) * horizon);
    std::sort(times.begin(), times.end());
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1]) times[i] = times[i - 1] + 1e-3;

    std::vector<Profile> bumps;
    SmoothFunctional::Box box;
    for (int i = 0; i < arity; ++i) {
        const double lo = draw(eng, -3.0, 1.0);
        const double hi = lo + draw(eng, 1.0, 3.0);
        bumps.push_back(bump_profile(lo, hi, 1.0));
        box.push_back({lo, hi});
    }
    const double height = draw(eng, 0.5, 2.0);
    auto shared = std::make_shared<const std::vector<Profile>>(std::move(bumps));
    SmoothFunctional::Fn f = [shared, height](std::span<const double> y) {
        double v = height;
        for (std::size_t i = 0; i < y.size(); ++i) v *= (*shared)[i].value(y[i]);
        return v;
    };
    SmoothFunctional::Grad grad = [shared, height](std::span<const double> y,
                                                   std::span<double> out) {
        const std::size_t k = y.size();
        std::vector<double> vals(k);
        for (std::size_t i = 0; i < k; ++i) vals[i] = (*shared)[i].value(y[i]);
        for (std::size_t i = 0; i < k; ++i) {
            double g = height * (*shared)[i].deriv(y[i]);
            for (std::size_t j = 0; j < k; ++j)
                if (j != i) g *= vals[j];
            out[i] = g;
        }
    };
    return SmoothFunctional(times, std::move(f), std::move(grad),
                            Smoothness::CompactSupportSmooth, std::move(box));
}

std::vector<double> atom_positions(const LevyTriplet& tr) {
    std::vector<double> xs;
    if (tr.nu().is_atomic())
        for (const auto& at : tr.nu().atoms()) xs.push_back(at.position);
    else
        xs.push_back(0.5 * (tr.nu().support_lo() + tr.nu().support_hi()));
    return xs;
}

// PathFunctional for S2 = full shared-time product minus the sum of the
// disjointified tensors.
PathFunctional s2_functional(std::vector<Rect> full, std::vector<TensorKernel> s1) {
    auto rects = std::make_shared<const std::vector<Rect>>(std::move(full));
    auto tensors = std::make_shared<const std::vector<TensorKernel>>(std::move(s1));
    PathFunctional pf;
    std::vector<double> bp;
    for (const auto& r : *rects) {
        bp.push_back(r.t_lo);
        bp.push_back(r.t_hi);
    }
    for (const auto& tk : *tensors)
        for (double t : tk.time_endpoints()) bp.push_back(t);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    pf.t_breakpoints = bp;
    pf.required_times = bp;
    pf.bind = [rects, tensors](const Path& path) {
        PathEvaluator ev;
        double v = eval_rect_product(path, *rects);
        for (const auto& tk : *tensors) v -= eval_IN(path, tk);
        ev.value = v;
        const Path* p = &path;
        ev.deriv = [rects, tensors, p](double t, double x) {
            double d = derivative_of_rect_product(*p, *rects, t, x);
            for (const auto& tk : *tensors) d -= derivative_of_elementary(*p, tk, t, x);
            return d;
        };
        return ev;
    };
    return pf;
}

// ---------------------------------------------------------------------------
// experiment implementations
// ---------------------------------------------------------------------------

void run_verify_isometry(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params, {"pairs"}, "[params] of verify-isometry");
    const int pairs = param_int(cfg.params, "pairs", 10);
    if (pairs < 1) throw ConfigError("pairs must be >= 1");
    const LevyTriplet& tr = cfg.model();

    std::mt19937_64 eng(derive_seed(cfg.seed, 0xA11CE));
    std::vector<std::pair<Rect, Rect>> rect_pairs;
    std::vector<double> req;
    for (int i = 0; i < pairs; ++i) {
        auto rand_rect = [&]() {
            double t0 = draw(eng, 0.0, cfg.horizon), t1 = draw(eng, 0.0, cfg.horizon);
            while (t0 == t1) t1 = draw(eng, 0.0, cfg.horizon);
            double x0 = draw(eng, -2.0, 2.0), x1 = draw(eng, -2.0, 2.0);
            while (x0 == x1) x1 = draw(eng, -2.0, 2.0);
            return Rect(std::min(t0, t1), std::max(t0, t1), std::min(x0, x1),
                        std::max(x0, x1));
        };
        rect_pairs.emplace_back(rand_rect(), rand_rect());
        const auto& [r1, r2] = rect_pairs.back();
        req.insert(req.end(), {r1.t_lo, r1.t_hi, r2.t_lo, r2.t_hi});
    }
    std::sort(req.begin(), req.end());
    req.erase(std::unique(req.begin(), req.end()), req.end());

    auto estimator = [&](const Path& p, std::span<double> out) {
        for (std::size_t i = 0; i < rect_pairs.size(); ++i)
            out[i] = eval_M(p, rect_pairs[i].first) * eval_M(p, rect_pairs[i].second);
    };
    auto est = mc_run_vec(estimator, rect_pairs.size(), cfg.reps, cfg.seed, tr,
                          cfg.horizon, req, cfg.threads);

    RowBuilder rb{result, cfg.experiment};
    for (std::size_t i = 0; i < rect_pairs.size(); ++i) {
        const double target =
            m_measure_intersection(tr, rect_pairs[i].first, rect_pairs[i].second);
        rb.stat("pair=" + std::to_string(i), est[i], target, cfg.gate);
    }
}

void run_chaos_oracle_vs_mc(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params, {}, "[params] of chaos-oracle-vs-mc");
    const LevyTriplet& tr = cfg.model();
    const double H = cfg.horizon;

    struct Element {
        ElementaryChaos chaos;
        TensorKernel tensor;
    };
    auto make = [&](std::vector<Rect> rects, double coeff) {
        std::vector<StepKernel> factors;
        for (const auto& r : rects) factors.push_back(StepKernel::indicator(r));
        return Element{ElementaryChaos{rects, coeff}, TensorKernel(std::move(factors))};
    };
    std::vector<Element> elements;
    elements.push_back(make({Rect(0.0, 0.4 * H, 0.5, 1.5)}, 1.0));
    elements.push_back(make({Rect(0.1 * H, 0.5 * H, -1.0, 0.5)}, 2.0));
    elements.push_back(
        make({Rect(0.0, 0.3 * H, 0.5, 1.5), Rect(0.3 * H, 0.6 * H, -1.0, 0.0)}, 1.0));
    elements.push_back(
        make({Rect(0.2 * H, 0.5 * H, -0.7, 1.2), Rect(0.5 * H, 0.9 * H, 0.5, 2.0)}, 0.5));
    elements.push_back(make({Rect(0.0, 0.25 * H, 0.5, 1.5), Rect(0.25 * H, 0.5 * H, -1.0, 0.0),
                             Rect(0.5 * H, 0.8 * H, -2.0, 2.0)},
                            1.0));

    std::vector<double> req;
    for (const auto& e : elements)
        for (double t : e.tensor.time_endpoints()) req.push_back(t);
    std::sort(req.begin(), req.end());
    req.erase(std::unique(req.begin(), req.end()), req.end());

    auto estimator = [&](const Path& p, std::span<double> out) {
        for (std::size_t i = 0; i < elements.size(); ++i) {
            const double v = elements[i].chaos.coefficient * eval_IN(p, elements[i].tensor);
            out[i] = v * v;
        }
    };
    auto est = mc_run_vec(estimator, elements.size(), cfg.reps, cfg.seed, tr, cfg.horizon,
                          req, cfg.threads);

    RowBuilder rb{result, cfg.experiment};
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const double target = inner_product(tr, elements[i].chaos, elements[i].chaos);
        rb.stat("element=" + std::to_string(i) +
                    ";order=" + std::to_string(elements[i].chaos.order()),
                est[i], target, cfg.gate);
    }
}

// Disjoint size intervals with positive mu-mass for the shared-time product.
std::vector<std::pair<double, double>> s2_size_intervals(const LevyTriplet& tr, int m) {
    std::vector<std::pair<double, double>> all;
    if (tr.nu().is_atomic()) {
        std::vector<double> pts;
        for (const auto& at : tr.nu().atoms()) pts.push_back(at.position);
        if (tr.sigma() > 0.0) pts.push_back(0.0);
        std::sort(pts.begin(), pts.end());
        for (double p : pts) all.push_back({p - 0.25, p + 0.25});
    } else {
        const double lo = tr.nu().support_lo(), hi = tr.nu().support_hi();
        const double third = (hi - lo) / 3.0;
        all.push_back({lo, lo + third});
        all.push_back({lo + third, lo + 2.0 * third});
        all.push_back({lo + 2.0 * third, hi});
    }
    if (static_cast<int>(all.size()) < m)
        throw ConfigError("s2-norm: not enough disjoint size intervals with positive mass");
    all.resize(static_cast<std::size_t>(m));
    return all;
}

void run_s2_norm(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params,
                       {"exact_cases", "mc_cases", "decay_levels", "decay_max_ratio"},
                       "[params] of s2-norm");
    const LevyTriplet& tr = cfg.model();
    auto parse_cases = [&](const std::string& raw) {
        std::vector<std::pair<int, int>> out;
        std::istringstream iss(raw);
        std::string tok;
        while (iss >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw ConfigError("s2-norm cases must be m:N, got '" + tok + "'");
            out.push_back({std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1))});
        }
        return out;
    };
    const auto exact_cases =
        parse_cases(param_string(cfg.params, "exact_cases", "2:2 2:8 3:4"));
    const auto mc_cases = parse_cases(param_string(cfg.params, "mc_cases", "2:2 2:4"));
    const auto decay_levels =
        param_double_list(cfg.params, "decay_levels", "2 4 8 16 32 64 128 256");
    const double decay_max_ratio = param_double(cfg.params, "decay_max_ratio", 0.01);

    const double t_lo = 0.0;
    const double t_hi = std::min(1.0, 0.5 * cfg.horizon);
    RowBuilder rb{result, cfg.experiment};

    for (const auto& [m, N] : exact_cases) {
        auto a = s2_size_intervals(tr, m);
        SharedTimeProduct spec{t_lo, t_hi, a, {}};
        double c = static_cast<double>(m) + 1.0;
        for (const auto& [alo, ahi] : a) c *= mu_measure(tr, alo, ahi);
        const double formula = s2_norm_formula(m, N, t_hi - t_lo, c);
        const double direct = s2_norm_direct(tr, spec, N);
        rb.exact("check=direct;m=" + std::to_string(m) + ";N=" + std::to_string(N), direct,
                 formula, 1e-14);
    }

    for (const auto& [m, N] : mc_cases) {
        auto a = s2_size_intervals(tr, m);
        Disjointified dis = disjointify(tr, t_lo, t_hi, a, {}, N);
        std::vector<Rect> full;
        for (const auto& [alo, ahi] : a) full.push_back(Rect(t_lo, t_hi, alo, ahi));
        PathFunctional s2 = s2_functional(std::move(full), dis.s1);
        MCEstimate est = d12_norm_sq_mc(s2, tr, cfg.horizon, cfg.reps,
                                        derive_seed(cfg.seed, static_cast<std::uint64_t>(
                                                                  100 * m + N)),
                                        NormFlavor::Full, cfg.threads);
        rb.stat("check=mc;m=" + std::to_string(m) + ";N=" + std::to_string(N), est,
                dis.s2_norm, cfg.gate);
    }

    {
        const int m = 2;
        auto a = s2_size_intervals(tr, m);
        double c = static_cast<double>(m) + 1.0;
        for (const auto& [alo, ahi] : a) c *= mu_measure(tr, alo, ahi);
        double prev = std::numeric_limits<double>::infinity();
        bool monotone = true;
        double first = 0.0, last = 0.0;
        for (std::size_t i = 0; i < decay_levels.size(); ++i) {
            const int N = static_cast<int>(decay_levels[i]);
            const double v = s2_norm_formula(m, N, t_hi - t_lo, c);
            if (i == 0) first = v;
            last = v;
            monotone = monotone && v <= prev * (1.0 + 1e-15);
            prev = v;
        }
        rb.add("check=decay-monotone;m=2", monotone ? 1.0 : 0.0, 0.0, 1.0, true, monotone);
        rb.bound("check=decay-ratio;m=2", last, decay_max_ratio * first, 0.0);
    }
}

void run_verify_product_rule(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params, {"pairs", "points"}, "[params] of verify-product-rule");
    const int pairs = param_int(cfg.params, "pairs", 20);
    const int points = param_int(cfg.params, "points", 10000);
    const LevyTriplet& tr = cfg.model();
    auto shared = std::make_shared<const LevyTriplet>(tr);
    const auto atoms = atom_positions(tr);

    RowBuilder rb{result, cfg.experiment};
    std::mt19937_64 eng(derive_seed(cfg.seed, 0x9a1f));
    const int points_per_pair = std::max(1, points / std::max(1, pairs));
    for (int pair = 0; pair < pairs; ++pair) {
        SmoothFunctional F = random_bump_functional(eng, cfg.horizon);
        SmoothFunctional G = random_bump_functional(eng, cfg.horizon);
        SmoothFunctional FG = product(F, G);
        std::vector<double> req;
        req.insert(req.end(), FG.times().begin(), FG.times().end());

        double max_resid = 0.0;
        const int paths = std::max(1, points_per_pair / 16);
        int produced = 0;
        for (int pi = 0; pi < paths && produced < points_per_pair; ++pi) {
            Path p = simulate_path(shared, cfg.horizon, req,
                                   static_cast<std::uint64_t>(pair * 1000 + pi),
                                   derive_seed(cfg.seed, 0xF00D));
            DerivField dF(F, p), dG(G, p), dFG(FG, p);
            const double vF = dF.value(), vG = dG.value();
            for (int k = 0; k < 16 && produced < points_per_pair; ++k, ++produced) {
                const double t = draw(eng, 0.0, 1.05 * FG.times().back());
                double x;
                const std::size_t which = static_cast<std::size_t>(k) % (atoms.size() + 2);
                if (which == 0)
                    x = 0.0;
                else if (which <= atoms.size())
                    x = atoms[which - 1];
                else
                    x = draw(eng, -2.0, 2.0);
                const double lhs = dFG(t, x);
                const double rhs = vG * dF(t, x) + vF * dG(t, x) + x * dF(t, x) * dG(t, x);
                max_resid = std::max(max_resid,
                                     std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
            }
        }
        rb.bound("pair=" + std::to_string(pair), max_resid, 1e-12, 0.0);
    }
}

void run_verify_chain_rule(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params, {"points"}, "[params] of verify-chain-rule");
    const int points = param_int(cfg.params, "points", 10000);
    const LevyTriplet& tr = cfg.model();
    auto shared = std::make_shared<const LevyTriplet>(tr);
    const auto atoms = atom_positions(tr);

    std::mt19937_64 eng(derive_seed(cfg.seed, 0xC4A1));
    SmoothFunctional F = random_bump_functional(eng, cfg.horizon);
    std::vector<double> req(F.times());

    LipschitzFn g_abs([](double y) { return std::abs(y); }, 1.0);
    LipschitzFn g_sin([](double y) { return std::sin(y); }, 1.0,
                      [](double y) { return std::cos(y); });
    SmoothFunctional sinF = compose(g_sin, F);

    double max_abs_excess = 0.0;   // |Dg(F)| - L |DF| at x != 0, normalized
    double max_zero_resid = 0.0;   // composition route vs g'(F) D_{t,0}F
    double max_jump_resid = 0.0;   // composition route vs increment quotient, C^1 g
    const int paths = std::max(1, points / 32);
    int produced = 0;
    for (int pi = 0; pi < paths && produced < points; ++pi) {
        Path p = simulate_path(shared, cfg.horizon, req, static_cast<std::uint64_t>(pi),
                               derive_seed(cfg.seed, 0xBEEF));
        DerivField dF(F, p), dSin(sinF, p);
        for (int k = 0; k < 32 && produced < points; ++k, ++produced) {
            const double t = draw(eng, 0.0, 1.05 * F.times().back());
            double x;
            const std::size_t which = static_cast<std::size_t>(k) % (atoms.size() + 1);
            if (which < atoms.size())
                x = atoms[which];
            else {
                x = draw(eng, -2.0, 2.0);
                if (x == 0.0) x = 0.5;
            }
            const double q = chain_rule_jump(g_abs, F, p, t, x);
            const double dfx = dF(t, x);
            max_abs_excess = std::max(
                max_abs_excess,
                (std::abs(q) - g_abs.lipschitz * std::abs(dfx)) / (1.0 + std::abs(q)));
            const double zr = chain_rule_zero(g_sin, F, p, t);
            max_zero_resid =
                std::max(max_zero_resid, std::abs(dSin(t, 0.0) - zr) / (1.0 + std::abs(zr)));
            const double jq = chain_rule_jump(g_sin, F, p, t, x);
            max_jump_resid =
                std::max(max_jump_resid, std::abs(dSin(t, x) - jq) / (1.0 + std::abs(jq)));
        }
    }
    RowBuilder rb{result, cfg.experiment};
    rb.bound("check=abs-jump-bound", max_abs_excess, 0.0, 1e-12);
    rb.bound("check=sin-zero-part", max_zero_resid, 0.0, 1e-10);
    rb.bound("check=sin-jump-part", max_jump_resid, 0.0, 1e-10);
}

void run_mollifier_bounds(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params, {"levels", "grid_points", "grid_radius"},
                       "[params] of mollifier-bounds");
    const auto levels = param_double_list(cfg.params, "levels", "2 8 32");
    const int grid_points = param_int(cfg.params, "grid_points", 10000);
    const double radius = param_double(cfg.params, "grid_radius", 3.0);

    LipschitzFn g_abs([](double y) { return std::abs(y); }, 1.0);
    RowBuilder rb{result, cfg.experiment};
    for (double level : levels) {
        const int N = static_cast<int>(level);
        LipschitzFn gn = mollify(g_abs, N);
        double sup_diff = 0.0, sup_deriv = 0.0;
        for (int i = 0; i < grid_points; ++i) {
            const double y = -radius + 2.0 * radius * i / (grid_points - 1);
            sup_diff = std::max(sup_diff, std::abs(gn.fn(y) - g_abs.fn(y)));
            sup_deriv = std::max(sup_deriv, std::abs(gn.deriv(y)));
        }
        rb.bound("check=uniform;N=" + std::to_string(N), sup_diff,
                 g_abs.lipschitz / static_cast<double>(N), 1e-12);
        rb.bound("check=derivative;N=" + std::to_string(N), sup_deriv, g_abs.lipschitz,
                 1e-12);
    }
}

Profile lemma4_profile(const ExperimentConfig& cfg) {
    return bump_profile(param_double(cfg.params, "bump_lo", 0.5),
                        param_double(cfg.params, "bump_hi", 1.5),
                        param_double(cfg.params, "bump_height", 0.7));
}

void run_lemma4_convergence(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params,
                       {"meshes", "bump_lo", "bump_hi", "bump_height", "interval_lo",
                        "interval_hi", "final_ratio"},
                       "[params] of lemma4-convergence");
    const auto meshes =
        param_double_list(cfg.params, "meshes", "0.25 0.0625 0.015625 0.00390625");
    const double s = param_double(cfg.params, "interval_lo", 0.0);
    const double u = param_double(cfg.params, "interval_hi", 1.0);
    const double final_ratio = param_double(cfg.params, "final_ratio", 0.2);
    const LevyTriplet& tr = cfg.model();
    const Profile phi = lemma4_profile(cfg);
    PathFunctional target = from_separable(SeparableKernel(s, u, phi));

    const bool oracle_applies = tr.sigma() == 0.0 && tr.drift() == 0.0 &&
                                tr.nu().is_atomic() && tr.nu().atoms().size() == 1;

    RowBuilder rb{result, cfg.experiment};
    std::vector<MCEstimate> dists;
    for (double mesh : meshes) {
        const int cells = std::max(1, static_cast<int>(std::lround((u - s) / mesh)));
        BuiltGn gn = build_Gn(tr, phi, s, u, Partition::uniform(s, u, cells));
        MCEstimate d = d12_distance_sq(target, gn.fast, tr, cfg.horizon, cfg.reps,
                                       cfg.seed, cfg.threads);
        dists.push_back(d);
        const std::string params = "mesh=" + fmt17(mesh);
        if (oracle_applies) {
            const double oracle = lemma4_pure_jump_oracle(tr, phi, s, u, cells);
            rb.stat(params, d, oracle, cfg.gate);
        } else {
            rb.add(params, d.mean, d.stderr_, 0.0, false, true);
        }
    }
    bool monotone = true;
    for (std::size_t i = 1; i < dists.size(); ++i)
        monotone = monotone &&
                   dists[i].mean <= dists[i - 1].mean +
                                        2.0 * std::hypot(dists[i].stderr_,
                                                         dists[i - 1].stderr_);
    rb.add("check=trend-monotone", monotone ? 1.0 : 0.0, 0.0, 1.0, true, monotone);
    rb.bound("check=final-over-first", dists.back().mean, final_ratio * dists.front().mean,
             0.0);
}

void run_lemma4_error_terms(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params,
                       {"meshes", "bump_lo", "bump_hi", "bump_height", "interval_lo",
                        "interval_hi"},
                       "[params] of lemma4-error-terms");
    const auto meshes = param_double_list(cfg.params, "meshes", "0.25 0.0625 0.015625");
    const double s = param_double(cfg.params, "interval_lo", 0.0);
    const double u = param_double(cfg.params, "interval_hi", 1.0);
    const LevyTriplet& tr = cfg.model();
    const Profile phi = lemma4_profile(cfg);

    RowBuilder rb{result, cfg.experiment};
    std::vector<Lemma4ErrorTerms> terms;
    for (double mesh : meshes) {
        const int cells = std::max(1, static_cast<int>(std::lround((u - s) / mesh)));
        Lemma4ErrorTerms t = lemma4_error_terms(tr, phi, s, u,
                                                Partition::uniform(s, u, cells),
                                                cfg.horizon, cfg.reps, cfg.seed,
                                                cfg.threads);
        terms.push_back(t);
        const std::string params = "mesh=" + fmt17(mesh);
        rb.add(params + ";part=zero", t.zero_part.mean, t.zero_part.stderr_, 0.0, false,
               true);
        rb.add(params + ";part=jump", t.jump_part.mean, t.jump_part.stderr_, 0.0, false,
               true);
        const double worst = std::max(t.max_zero_ratio, t.max_jump_ratio);
        rb.bound(params + ";check=domination", worst, 1.0, 1e-9);
    }
    auto trend = [&](auto pick, const std::string& name) {
        bool monotone = true;
        for (std::size_t i = 1; i < terms.size(); ++i) {
            const MCEstimate& cur = pick(terms[i]);
            const MCEstimate& prev = pick(terms[i - 1]);
            monotone = monotone &&
                       cur.mean <= prev.mean + 2.0 * std::hypot(cur.stderr_, prev.stderr_);
        }
        rb.add("check=trend-" + name, monotone ? 1.0 : 0.0, 0.0, 1.0, true, monotone);
    };
    if (tr.sigma() > 0.0)
        trend([](const Lemma4ErrorTerms& t) -> const MCEstimate& { return t.zero_part; },
              "zero");
    trend([](const Lemma4ErrorTerms& t) -> const MCEstimate& { return t.jump_part; },
          "jump");
}

std::vector<Rect> parse_rect_list(const std::string& raw) {
    std::vector<Rect> out;
    std::istringstream iss(raw);
    std::string tok;
    while (iss >> tok) {
        std::array<double, 4> v{};
        std::size_t pos = 0;
        for (int i = 0; i < 4; ++i) {
            const auto colon = tok.find(':', pos);
            const std::string piece = colon == std::string::npos
                                          ? tok.substr(pos)
                                          : tok.substr(pos, colon - pos);
            if (piece.empty()) throw ConfigError("bad rect '" + tok + "'");
            v[static_cast<std::size_t>(i)] = std::stod(piece);
            pos = colon == std::string::npos ? tok.size() : colon + 1;
        }
        out.push_back(Rect(v[0], v[1], v[2], v[3]));
    }
    if (out.empty()) throw ConfigError("empty rects list");
    return out;
}

void run_theorem1_pipeline(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params, {"rects", "deltas", "meshes", "cutoffs", "final_ratio"},
                       "[params] of theorem1-pipeline");
    const auto target =
        parse_rect_list(param_string(cfg.params, "rects", "0:1:0.5:1.5 1:2:-1:-0.25"));
    const auto deltas = param_double_list(cfg.params, "deltas", "0.3 0.01 0.0001");
    const auto meshes = param_double_list(cfg.params, "meshes", "0.25 0.0625 0.015625");
    const auto cutoffs = param_double_list(cfg.params, "cutoffs", "4 6 8");
    const double final_ratio = param_double(cfg.params, "final_ratio", 0.3);
    if (deltas.size() != meshes.size() || meshes.size() != cutoffs.size())
        throw ConfigError("theorem1-pipeline: deltas/meshes/cutoffs must align");
    const LevyTriplet& tr = cfg.model();

    RowBuilder rb{result, cfg.experiment};
    std::vector<MCEstimate> dists;
    for (std::size_t stage = 0; stage < deltas.size(); ++stage) {
        PipelineResult pr = theorem1_pipeline(
            tr, target, deltas[stage], meshes[stage], static_cast<int>(cutoffs[stage]),
            cfg.horizon, cfg.reps, derive_seed(cfg.seed, stage), cfg.threads);
        dists.push_back(pr.distance);
        const std::string params = "stage=" + std::to_string(stage) +
                                   ";delta=" + fmt17(deltas[stage]) +
                                   ";mesh=" + fmt17(meshes[stage]) +
                                   ";cutoff=" + fmt17(cutoffs[stage]);
        rb.add(params + ";quantity=distance", pr.distance.mean, pr.distance.stderr_, 0.0,
               false, true);
        // smoothing stage must respect the displayed bound
        rb.add(params + ";quantity=smoothing", pr.smoothing_distance.mean,
               pr.smoothing_distance.stderr_, pr.smoothing_bound, true,
               pr.smoothing_distance.mean <=
                   pr.smoothing_bound + cfg.gate * pr.smoothing_distance.stderr_);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < dists.size(); ++i)
        monotone = monotone &&
                   dists[i].mean <= dists[i - 1].mean +
                                        2.0 * std::hypot(dists[i].stderr_,
                                                         dists[i - 1].stderr_);
    rb.add("check=trend-monotone", monotone ? 1.0 : 0.0, 0.0, 1.0, true, monotone);
    rb.bound("check=final-over-first", dists.back().mean, final_ratio * dists.front().mean,
             0.0);
}

void run_d12_decomposition(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params, {"paths"}, "[params] of d12-decomposition");
    const int n_paths = param_int(cfg.params, "paths", 64);
    const LevyTriplet& tr = cfg.model();
    auto shared = std::make_shared<const LevyTriplet>(tr);

    std::mt19937_64 eng(derive_seed(cfg.seed, 0xDEC0));
    std::vector<PathFunctional> functionals;
    functionals.push_back(from_smooth(random_bump_functional(eng, cfg.horizon)));
    functionals.push_back(from_smooth(random_bump_functional(eng, cfg.horizon)));
    functionals.push_back(
        from_rect_product({Rect(0.0, 0.4 * cfg.horizon, 0.5, 1.5),
                           Rect(0.4 * cfg.horizon, 0.8 * cfg.horizon, -2.0, 0.5)}));

    double max_resid = 0.0;
    for (std::size_t fi = 0; fi < functionals.size(); ++fi) {
        const auto& f = functionals[fi];
        for (int pi = 0; pi < n_paths; ++pi) {
            Path p = simulate_path(shared, cfg.horizon, f.required_times,
                                   static_cast<std::uint64_t>(pi),
                                   derive_seed(cfg.seed, 0xD12));
            PathEvaluator ev = f.bind(p);
            const double l2 = ev.value * ev.value;
            const double full =
                l2 + d12_m_integral(tr, ev, f.t_breakpoints, NormFlavor::Full);
            const double zero =
                l2 + d12_m_integral(tr, ev, f.t_breakpoints, NormFlavor::ZeroPart);
            const double jump =
                l2 + d12_m_integral(tr, ev, f.t_breakpoints, NormFlavor::JumpPart);
            max_resid = std::max(max_resid, std::abs(full - (zero + jump - l2)) /
                                                (1.0 + std::abs(full)));
        }
    }
    RowBuilder rb{result, cfg.experiment};
    rb.bound("check=pathwise", max_resid, 0.0, 1e-12);

    // oracle identity on a random chaos sum
    ChaosSum sum;
    for (int k = 0; k < 5; ++k) {
        const std::size_t order = 1 + static_cast<std::size_t>(eng() % 3);
        std::vector<Rect> rects;
        for (std::size_t i = 0; i < order; ++i) {
            double t0 = draw(eng, 0.0, cfg.horizon), t1 = draw(eng, 0.0, cfg.horizon);
            while (t0 == t1) t1 = draw(eng, 0.0, cfg.horizon);
            double x0 = draw(eng, -2.0, 2.0), x1 = draw(eng, -2.0, 2.0);
            while (x0 == x1) x1 = draw(eng, -2.0, 2.0);
            rects.push_back(Rect(std::min(t0, t1), std::max(t0, t1), std::min(x0, x1),
                                 std::max(x0, x1)));
        }
        sum.push_back(ElementaryChaos{rects, draw(eng, -2.0, 2.0)});
    }
    const double full = d12_norm_sq(tr, sum, NormFlavor::Full);
    const double zero = d12_norm_sq(tr, sum, NormFlavor::ZeroPart);
    const double jump = d12_norm_sq(tr, sum, NormFlavor::JumpPart);
    const double l2 = l2_norm_sq(tr, sum);
    rb.exact("check=oracle", zero + jump - l2, full, 1e-12);

    // restricted-coordinate invariance on an order-3 pair
    const ElementaryChaos& a = sum[0].order() >= 2 ? sum[0] : sum[1];
    double coord_resid = 0.0;
    for (auto flavor : {NormFlavor::ZeroPart, NormFlavor::JumpPart}) {
        const double via_perm = restricted_inner_product(tr, a, a, flavor);
        for (std::size_t coord = 0; coord < a.order(); ++coord) {
            const double direct =
                restricted_inner_product_direct(tr, a, a, flavor, coord);
            coord_resid = std::max(coord_resid, std::abs(direct - via_perm) /
                                                    (1.0 + std::abs(via_perm)));
        }
    }
    rb.bound("check=restriction-coordinate", coord_resid, 0.0, 1e-12);
}

void run_centered_inequality(const ExperimentConfig& cfg, ExperimentResult& result) {
    require_known_keys(cfg.params, {}, "[params] of centered-inequality");
    const LevyTriplet& tr = cfg.model();
    const double H = cfg.horizon;

    std::vector<std::pair<std::string, PathFunctional>> functionals;
    functionals.emplace_back("first-chaos-rect",
                             from_rect_product({Rect(0.0, 0.4 * H, 0.5, 1.5)}));
    functionals.emplace_back(
        "first-chaos-smooth",
        from_separable(SeparableKernel(0.0, 0.5 * H, bump_profile(0.5, 1.5, 0.7))));
    {
        const double u = std::min(1.0, H);
        BuiltGn gn = build_Gn(tr, bump_profile(0.5, 1.5, 0.7), 0.0, u,
                              Partition::uniform(0.0, u, 4));
        functionals.emplace_back("partition-sum", gn.fast);
    }
    functionals.emplace_back("order-2",
                             from_rect_product({Rect(0.0, 0.3 * H, 0.5, 1.5),
                                                Rect(0.3 * H, 0.6 * H, -1.0, 0.5)}));
    functionals.emplace_back("order-3",
                             from_rect_product({Rect(0.0, 0.25 * H, 0.5, 1.5),
                                                Rect(0.25 * H, 0.5 * H, -1.0, 0.0),
                                                Rect(0.5 * H, 0.75 * H, -2.0, 2.0)}));

    RowBuilder rb{result, cfg.experiment};
    for (auto& [name, f] : functionals) {
        auto estimator = [&](const Path& p) {
            PathEvaluator ev = f.bind(p);
            const double deriv_part =
                d12_m_integral(tr, ev, f.t_breakpoints, NormFlavor::Full);
            return ev.value * ev.value - deriv_part;
        };
        MCEstimate est = mc_run(estimator, cfg.reps, cfg.seed, tr, cfg.horizon,
                                f.required_times, cfg.threads);
        // E|F|^2 <= E int |DF|^2 dm for centered F, within the gate
        rb.add("functional=" + name, est.mean, est.stderr_, 0.0, true,
               est.mean <= cfg.gate * est.stderr_);
    }
}

}  // namespace

bool ExperimentResult::all_pass() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const ResultRow& r) { return r.pass; });
}

const std::vector<std::pair<std::string, std::string>>& experiment_catalog() {
    static const std::vector<std::pair<std::string, std::string>> catalog = {
        {"verify-isometry",
         "E[M(r1)M(r2)] equals m(r1 n r2) for randomized rectangle pairs"},
        {"verify-product-rule",
         "D(FG) = G DF + F DG + x DF DG pathwise on random smooth functionals"},
        {"verify-chain-rule",
         "Lipschitz chain rule: jump-part quotient bound and C1 zero-part identity"},
        {"chaos-oracle-vs-mc",
         "second moments of elementary multiple integrals vs the permanent oracle"},
        {"s2-norm",
         "non-distinct-index remainder norm: closed form vs enumeration vs MC"},
        {"lemma4-convergence",
         "D12 distance of partition sums to the first integral as the mesh shrinks"},
        {"lemma4-error-terms",
         "the two error integrals behind the partition-sum bound, with domination"},
        {"theorem1-pipeline",
         "smoothing + partition + cutoff approximation of rectangle products"},
        {"d12-decomposition",
         "full norm = zero-part + jump-part - L2, pathwise and on the oracle"},
        {"centered-inequality", "E|F|^2 <= E||DF||^2 for centered functionals"},
        {"mollifier-bounds",
         "||g_N - g|| <= L/N and ||g_N'|| <= L for the mollified Lipschitz map"},
    };
    return catalog;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult result;
    if (cfg.experiment == "verify-isometry")
        run_verify_isometry(cfg, result);
    else if (cfg.experiment == "verify-product-rule")
        run_verify_product_rule(cfg, result);
    else if (cfg.experiment == "verify-chain-rule")
        run_verify_chain_rule(cfg, result);
    else if (cfg.experiment == "chaos-oracle-vs-mc")
        run_chaos_oracle_vs_mc(cfg, result);
    else if (cfg.experiment == "s2-norm")
        run_s2_norm(cfg, result);
    else if (cfg.experiment == "lemma4-convergence")
        run_lemma4_convergence(cfg, result);
    else if (cfg.experiment == "lemma4-error-terms")
        run_lemma4_error_terms(cfg, result);
    else if (cfg.experiment == "theorem1-pipeline")
        run_theorem1_pipeline(cfg, result);
    else if (cfg.experiment == "d12-decomposition")
        run_d12_decomposition(cfg, result);
    else if (cfg.experiment == "centered-inequality")
        run_centered_inequality(cfg, result);
    else if (cfg.experiment == "mollifier-bounds")
        run_mollifier_bounds(cfg, result);
    else
        throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    return result;
}

std::string csv_header() { return "experiment,params,estimate,stderr,target,pass,seconds"; }

namespace {

std::string row_core(const ResultRow& row) {
    std::ostringstream os;
    os << row.experiment << ',' << row.params << ',' << fmt17(row.estimate) << ','
       << fmt17(row.stderr_) << ',' << (row.has_target ? fmt17(row.target) : "") << ','
       << (row.pass ? '1' : '0');
    return os.str();
}

}  // namespace

std::string csv_row(const ResultRow& row) {
    char sec[32];
    std::snprintf(sec, sizeof(sec), "%.3f", row.seconds);
    return row_core(row) + ',' + sec;
}

void write_csv(std::ostream& out, const ExperimentResult& result) {
    out << csv_header() << '\n';
    for (const auto& row : result.rows) out << csv_row(row) << '\n';
}

std::string deterministic_digest(const ExperimentResult& result) {
    std::string s;
    for (const auto& row : result.rows) {
        s += row_core(row);
        s += '\n';
    }
    return s;
}

}  // namespace levylab
