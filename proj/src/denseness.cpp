#include "levylab/denseness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "levylab/quadrature.hpp"
#include "levylab/rng.hpp"

namespace levylab {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// mu of a region (lo, hi) / (lo, hi] depending on include_hi; used for the
// indicator ramp slack where the endpoint conventions matter at atoms.
double mu_region(const LevyTriplet& tr, double lo, double hi, bool include_hi) {
    double v = 0.0;
    const JumpMeasure& nu = tr.nu();
    if (nu.is_atomic()) {
        for (const auto& at : nu.atoms()) {
            const bool inside =
                lo < at.position && (include_hi ? at.position <= hi : at.position < hi);
            if (inside) v += at.intensity * at.position * at.position;
        }
    } else {
        const double a = std::max(lo, nu.support_lo());
        const double b = std::min(hi, nu.support_hi());
        if (a < b)
            v += integrate([&](double x) { return x * x * nu.density_at(x); }, a, b,
                           nu.panels());
    }
    const bool zero_inside = lo < 0.0 && (include_hi ? 0.0 <= hi : 0.0 < hi);
    if (zero_inside) v += tr.sigma() * tr.sigma();
    return v;
}

// int g dmu = sigma^2 g(0) + int g(x) x^2 dnu.
double mu_integral(const LevyTriplet& tr, const std::function<double(double)>& g) {
    double v = tr.sigma() * tr.sigma() * g(0.0);
    const JumpMeasure& nu = tr.nu();
    if (nu.is_atomic()) {
        for (const auto& at : nu.atoms())
            v += at.intensity * at.position * at.position * g(at.position);
    } else {
        v += integrate([&](double x) { return x * x * nu.density_at(x) * g(x); },
                       nu.support_lo(), nu.support_hi(), nu.panels());
    }
    return v;
}

// Per-atom Poisson pmf table covering all but < 1e-15 of the mass.
std::vector<double> poisson_pmfs(double rate) {
    std::vector<double> pmf;
    double p = std::exp(-rate);
    double cum = 0.0;
    for (int n = 0; n <= 400; ++n) {
        pmf.push_back(p);
        cum += p;
        if (cum >= 1.0 - 1e-15 && n >= 1) break;
        p *= rate / (n + 1);
    }
    return pmf;
}

// E[psi(b dt + sum of jumps + sigma sqrt(dt) Z)] for atomic nu, conditioning
// on the per-atom jump counts; the Gaussian part by quadrature.
double atomic_expected_psi(const LevyTriplet& tr, double dt,
                           const std::function<double(double)>& psi) {
    const auto& atoms = tr.nu().atoms();
    std::vector<std::vector<double>> tables;
    tables.reserve(atoms.size());
    for (const auto& at : atoms) tables.push_back(poisson_pmfs(at.intensity * dt));
    const double sd = tr.sigma() * std::sqrt(dt);
    const double base = tr.drift() * dt;

    double total = 0.0;
    // depth-first over count vectors, pruning branches below 1e-16 probability
    auto rec = [&](auto&& self, std::size_t k, double prob, double shift) -> void {
        if (prob < 1e-16) return;
        if (k == atoms.size()) {
            const double mean = base + shift;
            total += prob * (sd == 0.0 ? psi(mean) : gaussian_expectation(psi, mean, sd));
            return;
        }
        const auto& pmf = tables[k];
        for (std::size_t n = 0; n < pmf.size(); ++n)
            self(self, k + 1, prob * pmf[n],
                 shift + static_cast<double>(n) * atoms[k].position);
    };
    rec(rec, 0, 1.0, 0.0);
    return total;
}

}  // namespace

Partition Partition::uniform(double s, double u, int cells) {
    if (!(0.0 <= s && s < u)) throw std::invalid_argument("Partition: need 0 <= s < u");
    if (cells < 1) throw std::invalid_argument("Partition: need >= 1 cell");
    Partition p;
    p.s = s;
    p.u = u;
    p.points.resize(static_cast<std::size_t>(cells) + 1);
    for (int j = 0; j <= cells; ++j)
        p.points[static_cast<std::size_t>(j)] = s + (u - s) * j / cells;
    p.points.front() = s;
    p.points.back() = u;
    return p;
}

double Partition::mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        m = std::max(m, points[i] - points[i - 1]);
    return m;
}

SmoothIndicator make_smooth_indicator(const LevyTriplet& triplet, double a, double b,
                                      double ramp_width) {
    SmoothIndicator si;
    si.a = a;
    si.b = b;
    si.w = ramp_width;
    si.profile = indicator_profile(a, b, ramp_width);
    si.c_lo = a + ramp_width;
    si.c_hi = b - ramp_width;
    si.u_lo = a;
    si.u_hi = b + 1e-9 * ramp_width;
    // phi differs from 1_A only on the rise (a, a+w) and the fall (b-w, b].
    si.slack = mu_region(triplet, a, a + ramp_width, false) +
               mu_region(triplet, b - ramp_width, b, true);
    return si;
}

SmoothIndicator indicator_for_slack(const LevyTriplet& triplet, double a, double b,
                                    double max_slack) {
    double w = 0.45 * (b - a);
    for (int i = 0; i < 80; ++i) {
        SmoothIndicator si = make_smooth_indicator(triplet, a, b, w);
        if (si.slack <= max_slack) return si;
        w *= 0.5;
    }
    throw std::runtime_error("indicator_for_slack: requested slack unattainable");
}

CutoffFn::CutoffFn(int level) : level_(level) {
    if (level < 1) throw std::invalid_argument("CutoffFn: need level >= 1");
}

double CutoffFn::beta(double x) const {
    const double ax = std::abs(x);
    if (ax <= level_) return 1.0;
    return smoothstep((level_ + 2.0 - ax) / 2.0);
}

double CutoffFn::beta_deriv(double x) const {
    const double ax = std::abs(x);
    if (ax <= level_ || ax >= level_ + 2.0) return 0.0;
    const double sign = x > 0.0 ? 1.0 : -1.0;
    return -sign * smoothstep_deriv((level_ + 2.0 - ax) / 2.0) / 2.0;
}

double CutoffFn::alpha(std::span<const double> y) const {
    double prev = 0.0, v = 1.0;
    for (double yi : y) {
        v *= beta(yi - prev);
        prev = yi;
    }
    return v;
}

SmoothFunctional CutoffFn::apply(const SmoothFunctional& F) const {
    auto shared = std::make_shared<const SmoothFunctional>(F);
    const CutoffFn cut(*this);
    const std::size_t n = F.arity();

    SmoothFunctional::Fn f = [shared, cut](std::span<const double> y) {
        return shared->eval(y) * cut.alpha(y);
    };
    SmoothFunctional::Grad grad = [shared, cut, n](std::span<const double> y,
                                                   std::span<double> out) {
        std::vector<double> bv(n), bd(n);
        double prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y[i] - prev;
            bv[i] = cut.beta(d);
            bd[i] = cut.beta_deriv(d);
            prev = y[i];
        }
        std::vector<double> pre(n + 1, 1.0), suf(n + 1, 1.0);
        for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] * bv[i];
        for (std::size_t i = n; i-- > 0;) suf[i] = suf[i + 1] * bv[i];
        const double alpha = pre[n];
        const double fv = shared->eval(y);
        shared->grad(y, out);
        for (std::size_t i = 0; i < n; ++i) {
            double dalpha = bd[i] * pre[i] * suf[i + 1];
            if (i + 1 < n) dalpha -= bd[i + 1] * pre[i + 1] * suf[i + 2];
            out[i] = out[i] * alpha + fv * dalpha;
        }
    };

    SmoothFunctional::Box box(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = static_cast<double>(i + 1) * (level_ + 2.0);
        box[i] = {-r, r};
    }
    return SmoothFunctional(F.times(), std::move(f), std::move(grad),
                            Smoothness::CompactSupportSmooth, std::move(box));
}

BuiltGn build_Gn(const LevyTriplet& triplet, const Profile& phi, double s, double u,
                 const Partition& pi, std::uint64_t expectation_seed,
                 std::uint64_t expectation_reps) {
    if (pi.s != s || pi.u != u)
        throw std::invalid_argument("build_Gn: partition does not match the interval");
    auto points = std::make_shared<const std::vector<double>>(pi.points);
    auto prof = std::make_shared<const Profile>(phi);
    auto psi = [prof](double x) { return prof->psi(x); };

    double expectation = 0.0;
    double expectation_stderr = 0.0;
    if (triplet.nu().is_atomic()) {
        std::map<double, double> by_dt;
        for (std::size_t j = 1; j < points->size(); ++j) {
            const double dt = (*points)[j] - (*points)[j - 1];
            auto it = by_dt.find(dt);
            if (it == by_dt.end())
                it = by_dt.emplace(dt, atomic_expected_psi(triplet, dt, psi)).first;
            expectation += it->second;
        }
    } else {
        auto est = [&](const Path& p) {
            double acc = 0.0;
            for (std::size_t j = 1; j < points->size(); ++j)
                acc += prof->psi(p.increment((*points)[j - 1], (*points)[j]));
            return acc;
        };
        MCEstimate e = mc_run(est, expectation_reps, expectation_seed, triplet, u,
                              *points);
        expectation = e.mean;
        expectation_stderr = e.stderr_;
    }

    const double c = expectation;
    const std::size_t n = points->size();
    SmoothFunctional::Fn f = [points, prof, c](std::span<const double> y) {
        double acc = -c;
        for (std::size_t j = 1; j < y.size(); ++j) acc += prof->psi(y[j] - y[j - 1]);
        return acc;
    };
    SmoothFunctional::Grad grad = [prof](std::span<const double> y, std::span<double> out) {
        const std::size_t k = y.size();
        for (std::size_t i = 0; i < k; ++i) {
            double g = 0.0;
            if (i > 0) g += prof->psi_deriv(y[i] - y[i - 1]);
            if (i + 1 < k) g -= prof->psi_deriv(y[i + 1] - y[i]);
            out[i] = g;
        }
    };
    SmoothFunctional functional(*points, std::move(f), std::move(grad),
                                Smoothness::C1Extended);

    PathFunctional fast;
    fast.t_breakpoints = *points;
    fast.required_times = *points;
    fast.aux_stderr = expectation_stderr;
    fast.bind = [points, prof, c, n](const Path& path) {
        auto incs = std::make_shared<std::vector<double>>(n - 1);
        double acc = -c;
        for (std::size_t j = 1; j < n; ++j) {
            (*incs)[j - 1] = path.increment((*points)[j - 1], (*points)[j]);
            acc += prof->psi((*incs)[j - 1]);
        }
        PathEvaluator ev;
        ev.value = acc;
        ev.deriv = [points, prof, incs](double t, double x) {
            // cell with p_{j-1} < t <= p_j
            auto it = std::lower_bound(points->begin(), points->end(), t);
            if (it == points->begin() || it == points->end()) return 0.0;
            const std::size_t j = static_cast<std::size_t>(it - points->begin());
            const double inc = (*incs)[j - 1];
            if (x == 0.0) return prof->psi_deriv(inc);
            return (prof->psi(inc + x) - prof->psi(inc)) / x;
        };
        return ev;
    };

    BuiltGn out{std::move(functional), std::move(fast), expectation, expectation_stderr,
                pi, phi, s, u};
    return out;
}

MCEstimate d12_distance_sq(const PathFunctional& fa, const PathFunctional& fb,
                           const LevyTriplet& triplet, double horizon,
                           std::uint64_t n_reps, std::uint64_t seed, int threads) {
    PathFunctional diff = difference(fa, fb);
    auto estimator = [&](const Path& path, std::span<double> out) {
        PathEvaluator ev = diff.bind(path);
        out[0] = ev.value * ev.value +
                 d12_m_integral(triplet, ev, diff.t_breakpoints, NormFlavor::Full);
        out[1] = ev.value;
    };
    auto est = mc_run_vec(estimator, 2, n_reps, seed, triplet, horizon,
                          diff.required_times, threads);
    MCEstimate result = est[0];
    if (diff.aux_stderr > 0.0) {
        // delta method for the MC-estimated centering constant inside a factor
        const double sensitivity = 2.0 * std::abs(est[1].mean);
        result.stderr_ = std::hypot(result.stderr_, sensitivity * diff.aux_stderr);
    }
    return result;
}

Lemma4ErrorTerms lemma4_error_terms(const LevyTriplet& triplet, const Profile& phi,
                                    double s, double u, const Partition& pi,
                                    double horizon, std::uint64_t n_reps,
                                    std::uint64_t seed, int threads) {
    if (pi.s != s || pi.u != u)
        throw std::invalid_argument("lemma4_error_terms: partition does not match interval");
    auto points = std::make_shared<const std::vector<double>>(pi.points);
    auto prof = std::make_shared<const Profile>(phi);
    const double phi0 = prof->value(0.0);
    const double zero_bound_sq =
        (prof->sup + prof->psi_sup_deriv) * (prof->sup + prof->psi_sup_deriv);
    const double jb = prof->psi_sup_deriv + prof->sup + 3.0 * prof->psi_sup;
    const double jump_bound_sq = jb * jb;
    const double sigma2 = triplet.sigma() * triplet.sigma();
    const JumpMeasure& nu = triplet.nu();

    auto cell_terms = [&](const Path& path, std::size_t j, double& zero_term,
                          double& jump_term, double& zr, double& jr) {
        const double inc = path.increment((*points)[j - 1], (*points)[j]);
        const double z = phi0 - prof->psi_deriv(inc);
        zero_term = z * z;
        zr = std::max(zr, zero_term / zero_bound_sq);
        jump_term = 0.0;
        auto one_x = [&](double x) {
            const double q = prof->psi(inc + x) - prof->psi(inc) - prof->psi(x);
            const double cap = std::min(std::abs(x), 1.0);
            jr = std::max(jr, (q * q) / (jump_bound_sq * cap * cap));
            return q * q;
        };
        if (nu.is_atomic()) {
            for (const auto& at : nu.atoms()) jump_term += at.intensity * one_x(at.position);
        } else {
            jump_term += integrate([&](double x) { return nu.density_at(x) * one_x(x); },
                                   nu.support_lo(), nu.support_hi(), nu.panels());
        }
    };

    auto estimator = [&](const Path& path, std::span<double> out) {
        double zero_acc = 0.0, jump_acc = 0.0, zr = 0.0, jr = 0.0;
        for (std::size_t j = 1; j < points->size(); ++j) {
            const double len = (*points)[j] - (*points)[j - 1];
            double zt, jt;
            cell_terms(path, j, zt, jt, zr, jr);
            zero_acc += len * zt;
            jump_acc += len * jt;
        }
        if (zr > 1.0 + 1e-9 || jr > 1.0 + 1e-9)
            throw std::runtime_error("lemma4_error_terms: dominating bound violated");
        out[0] = 2.0 * sigma2 * zero_acc;
        out[1] = 2.0 * jump_acc;
    };
    auto est = mc_run_vec(estimator, 2, n_reps, seed, triplet, horizon, *points, threads);

    Lemma4ErrorTerms out;
    out.zero_part = est[0];
    out.jump_part = est[1];
    out.zero_bound_sq = zero_bound_sq;
    out.jump_bound_sq = jump_bound_sq;

    // explicit domination sweep over a path sample
    auto shared = std::make_shared<const LevyTriplet>(triplet);
    const std::uint64_t sweep = std::min<std::uint64_t>(n_reps, 256);
    double zr = 0.0, jr = 0.0;
    for (std::uint64_t i = 0; i < sweep; ++i) {
        Path p = simulate_path(shared, horizon, *points, i, seed);
        for (std::size_t j = 1; j < points->size(); ++j) {
            double zt, jt;
            cell_terms(p, j, zt, jt, zr, jr);
        }
    }
    out.max_zero_ratio = zr;
    out.max_jump_ratio = jr;
    return out;
}

double lemma4_pure_jump_oracle(const LevyTriplet& triplet, const Profile& phi, double s,
                               double u, int cells) {
    if (triplet.sigma() != 0.0 || triplet.drift() != 0.0)
        throw std::invalid_argument("lemma4_pure_jump_oracle: needs sigma = 0, drift = 0");
    if (!triplet.nu().is_atomic() || triplet.nu().atoms().size() != 1)
        throw std::invalid_argument("lemma4_pure_jump_oracle: needs a single atom");
    const double x0 = triplet.nu().atoms()[0].position;
    const double lam = triplet.nu().atoms()[0].intensity;
    const double len = u - s;
    const double h = len / cells;

    auto psi = [&](double x) { return phi.psi(x); };
    const double psi_x0 = psi(x0);
    const double phi_x0 = phi.value(x0);

    // Per-cell count N ~ Poisson(lam h):
    //   Z(N)  = psi(x0) N - psi(N x0)             (value mismatch)
    //   DD(N) = phi(x0) - [psi((N+1)x0) - psi(N x0)] / x0   (derivative mismatch)
    double p = std::exp(-lam * h);
    double ez = 0.0, ez2 = 0.0, edd2 = 0.0, cum = 0.0;
    for (int n = 0; n <= 400 && cum < 1.0 - 1e-18; ++n) {
        const double z = psi_x0 * n - psi(n * x0);
        const double dd = phi_x0 - (psi((n + 1) * x0) - psi(n * x0)) / x0;
        ez += p * z;
        ez2 += p * z * z;
        edd2 += p * dd * dd;
        cum += p;
        p *= lam * h / (n + 1);
    }
    const double var_z = ez2 - ez * ez;
    return cells * var_z + x0 * x0 * lam * len * edd2;
}

Disjointified disjointify(const LevyTriplet& triplet, double t_lo, double t_hi,
                          std::span<const std::pair<double, double>> a_intervals,
                          std::span<const Rect> tail, int N) {
    const int m = static_cast<int>(a_intervals.size());
    if (m < 1) throw std::invalid_argument("disjointify: need m >= 1");
    if (N < 1) throw std::invalid_argument("disjointify: need N >= 1");
    if (!(0.0 <= t_lo && t_lo < t_hi)) throw std::invalid_argument("disjointify: bad T");
    for (int i = 0; i < m; ++i) {
        if (!(mu_measure(triplet, a_intervals[static_cast<std::size_t>(i)].first,
                         a_intervals[static_cast<std::size_t>(i)].second) > 0.0))
            throw std::invalid_argument("disjointify: mu(A_i) must be positive");
        for (int j = i + 1; j < m; ++j) {
            const auto& ai = a_intervals[static_cast<std::size_t>(i)];
            const auto& aj = a_intervals[static_cast<std::size_t>(j)];
            if (ai.first < aj.second && aj.first < ai.second)
                throw std::invalid_argument("disjointify: A intervals must be disjoint");
        }
    }
    for (const auto& r : tail)
        if (r.t_lo < t_hi && t_lo < r.t_hi)
            throw std::invalid_argument("disjointify: tail times must avoid T");

    Disjointified out;
    out.cell_edges.resize(static_cast<std::size_t>(N) + 1);
    for (int j = 0; j <= N; ++j)
        out.cell_edges[static_cast<std::size_t>(j)] = t_lo + (t_hi - t_lo) * j / N;

    const int n = m + static_cast<int>(tail.size());
    double c = static_cast<double>(n) + 1.0;
    for (int i = 0; i < m; ++i)
        c *= mu_measure(triplet, a_intervals[static_cast<std::size_t>(i)].first,
                        a_intervals[static_cast<std::size_t>(i)].second);
    for (const auto& r : tail) c *= mu_measure(triplet, r.x_lo, r.x_hi) * r.time_length();
    // c folds the tail m-measures as mu(A_k)|T_k|
    out.c = c;
    // N < m leaves no distinct tuple: S1 is empty and S2 carries the full
    // product norm c |T|^m.
    out.s2_norm = N >= m ? s2_norm_formula(m, N, t_hi - t_lo, c)
                         : c * std::pow(t_hi - t_lo, m);

    if (std::pow(static_cast<double>(N), m) <= 1e6) {
        SharedTimeProduct spec;
        spec.t_lo = t_lo;
        spec.t_hi = t_hi;
        spec.a.assign(a_intervals.begin(), a_intervals.end());
        spec.tail.assign(tail.begin(), tail.end());
        const double direct = s2_norm_direct(triplet, spec, N);
        if (std::abs(direct - out.s2_norm) > 1e-13 * (1.0 + std::abs(direct)))
            throw std::runtime_error("disjointify: direct enumeration disagrees with formula");
    }

    // distinct-index tuples -> time-disjoint tensor kernels
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    while (true) {
        bool distinct = true;
        for (int i = 0; i < m && distinct; ++i)
            for (int j = i + 1; j < m; ++j)
                if (idx[static_cast<std::size_t>(i)] == idx[static_cast<std::size_t>(j)]) {
                    distinct = false;
                    break;
                }
        if (distinct) {
            std::vector<StepKernel> factors;
            factors.reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < m; ++i) {
                const int j = idx[static_cast<std::size_t>(i)];
                factors.push_back(StepKernel::indicator(
                    Rect(out.cell_edges[static_cast<std::size_t>(j)],
                         out.cell_edges[static_cast<std::size_t>(j) + 1],
                         a_intervals[static_cast<std::size_t>(i)].first,
                         a_intervals[static_cast<std::size_t>(i)].second)));
            }
            for (const auto& r : tail) factors.push_back(StepKernel::indicator(r));
            out.s1.emplace_back(std::move(factors));
        }
        int pos = m - 1;
        while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == N)
            idx[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
    }
    return out;
}

PipelineResult theorem1_pipeline(const LevyTriplet& triplet, const std::vector<Rect>& target,
                                 double delta, double mesh, int cutoff, double horizon,
                                 std::uint64_t n_reps, std::uint64_t seed, int threads) {
    if (target.empty()) throw std::invalid_argument("theorem1_pipeline: empty target");
    for (std::size_t i = 0; i < target.size(); ++i)
        for (std::size_t j = i + 1; j < target.size(); ++j)
            if (target[i].t_lo < target[j].t_hi && target[j].t_lo < target[i].t_hi)
                throw std::invalid_argument(
                    "theorem1_pipeline: target factors must be time-disjoint");
    const int nf = static_cast<int>(target.size());

    std::vector<SmoothIndicator> indicators;
    std::vector<SeparableKernel> smooth_kernels;
    std::vector<BuiltGn> gs;
    indicators.reserve(target.size());
    for (const auto& r : target) {
        indicators.push_back(indicator_for_slack(triplet, r.x_lo, r.x_hi, delta));
        smooth_kernels.emplace_back(r.t_lo, r.t_hi, indicators.back().profile);
        const int cells =
            std::max(1, static_cast<int>(std::ceil(r.time_length() / mesh - 1e-12)));
        gs.push_back(build_Gn(triplet, indicators.back().profile, r.t_lo, r.t_hi,
                              Partition::uniform(r.t_lo, r.t_hi, cells),
                              derive_seed(seed, 101), 200000));
    }

    SmoothFunctional prod = gs[0].functional;
    for (std::size_t i = 1; i < gs.size(); ++i) prod = product(prod, gs[i].functional);
    CutoffFn cut(cutoff);
    SmoothFunctional approximant = cut.apply(prod);

    std::vector<StepKernel> factors;
    factors.reserve(target.size());
    for (const auto& r : target) factors.push_back(StepKernel::indicator(r));
    PathFunctional target_f = from_tensor(TensorKernel(std::move(factors)));

    PathFunctional approx_f = from_smooth(approximant);
    double aux = 0.0;
    for (const auto& g : gs) aux = std::hypot(aux, g.expectation_stderr);
    approx_f.aux_stderr = aux;

    PipelineResult out{approximant,
                       d12_distance_sq(approx_f, target_f, triplet, horizon, n_reps, seed,
                                       threads),
                       MCEstimate{},
                       0.0,
                       0.0,
                       {}};
    for (const auto& si : indicators) out.slacks.push_back(si.slack);

    // || 1_{A_1 x ... x A_N} - phi_1 x ... x phi_N ||^2 over mu^N expands into
    // per-coordinate integrals of 1_A, 1_A phi and phi^2.
    double p_ind = 1.0, p_mix = 1.0, p_phi2 = 1.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const auto& r = target[i];
        const Profile& phi = indicators[i].profile;
        auto in_a = [&](double x) { return (r.x_lo < x && x <= r.x_hi) ? 1.0 : 0.0; };
        p_ind *= mu_integral(triplet, in_a);
        p_mix *= mu_integral(triplet, [&](double x) { return in_a(x) * phi.value(x); });
        p_phi2 *= mu_integral(triplet, [&](double x) {
            const double v = phi.value(x);
            return v * v;
        });
    }
    out.tensor_l2_error = std::max(0.0, p_ind - 2.0 * p_mix + p_phi2);
    double tprod = 1.0;
    for (const auto& r : target) tprod *= r.time_length();
    out.smoothing_bound = factorial(nf + 1) * tprod * out.tensor_l2_error;

    out.smoothing_distance =
        d12_distance_sq(from_separable_product(smooth_kernels), target_f, triplet, horizon,
                        n_reps, derive_seed(seed, 7), threads);
    return out;
}

IndependenceReport product_independence_check(const LevyTriplet& triplet,
                                              const std::vector<BuiltGn>& factors,
                                              double horizon, std::uint64_t n_paths,
                                              std::uint64_t seed, int threads) {
    if (factors.size() < 2)
        throw std::invalid_argument("product_independence_check: need >= 2 factors");
    std::vector<double> req;
    for (const auto& g : factors)
        req.insert(req.end(), g.partition.points.begin(), g.partition.points.end());
    std::sort(req.begin(), req.end());
    req.erase(std::unique(req.begin(), req.end()), req.end());

    SmoothFunctional prod = factors[0].functional;
    for (std::size_t i = 1; i < factors.size(); ++i)
        prod = product(prod, factors[i].functional);

    std::vector<double> xs{0.0};
    if (triplet.nu().is_atomic())
        for (const auto& at : triplet.nu().atoms()) xs.push_back(at.position);
    else
        xs.push_back(0.5 * (triplet.nu().support_lo() + triplet.nu().support_hi()));

    std::vector<double> ts;
    for (const auto& g : factors)
        for (std::size_t j = 1; j < g.partition.points.size(); ++j)
            ts.push_back(0.5 * (g.partition.points[j - 1] + g.partition.points[j]));

    auto shared = std::make_shared<const LevyTriplet>(triplet);
    IndependenceReport rep;
    const std::uint64_t sample_paths = std::min<std::uint64_t>(n_paths, 64);
    for (std::uint64_t i = 0; i < sample_paths; ++i) {
        Path p = simulate_path(shared, horizon, req, i, derive_seed(seed, 3));
        std::vector<PathEvaluator> evs;
        evs.reserve(factors.size());
        for (const auto& g : factors) evs.push_back(g.fast.bind(p));
        DerivField dprod(prod, p);
        for (double t : ts) {
            for (double x : xs) {
                for (std::size_t i1 = 0; i1 < evs.size(); ++i1)
                    for (std::size_t i2 = i1 + 1; i2 < evs.size(); ++i2)
                        rep.max_cross_term =
                            std::max(rep.max_cross_term,
                                     std::abs(x * evs[i1].deriv(t, x) * evs[i2].deriv(t, x)));
                const double lhs = dprod(t, x);
                double rhs = 0.0;
                for (std::size_t k = 0; k < evs.size(); ++k) {
                    double rest = 1.0;
                    for (std::size_t l = 0; l < evs.size(); ++l)
                        if (l != k) rest *= evs[l].value;
                    rhs += rest * evs[k].deriv(t, x);
                }
                rep.max_product_rule_residual =
                    std::max(rep.max_product_rule_residual,
                             std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
            }
        }
    }

    const auto& f0 = factors[0].fast;
    const auto& f1 = factors[1].fast;
    rep.factor_product_mean = mc_run(
        [&](const Path& p) { return f0.bind(p).value * f1.bind(p).value; }, n_paths, seed,
        triplet, horizon, req, threads);

    rep.pass = rep.max_cross_term == 0.0 && rep.max_product_rule_residual <= 1e-12 &&
               std::abs(rep.factor_product_mean.mean) <=
                   4.0 * rep.factor_product_mean.stderr_;
    return rep;
}

}  // namespace levylab
