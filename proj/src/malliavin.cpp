#include "levylab/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "levylab/quadrature.hpp"
#include "levylab/rng.hpp"

namespace levylab {

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<double> merge_sorted(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return sorted_unique(std::move(out));
}

}  // namespace

SmoothFunctional::SmoothFunctional(std::vector<double> times, Fn f, Grad grad,
                                   Smoothness cls, std::optional<Box> support_box)
    : times_(std::move(times)), f_(std::move(f)), grad_(std::move(grad)), cls_(cls),
      box_(std::move(support_box)) {
    if (times_.empty()) throw std::invalid_argument("SmoothFunctional: need >= 1 time");
    if (!f_ || !grad_) throw std::invalid_argument("SmoothFunctional: null f or grad");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!(times_[i] >= 0.0))
            throw std::invalid_argument("SmoothFunctional: times must be >= 0");
        if (i > 0 && times_[i] < times_[i - 1])
            throw std::invalid_argument("SmoothFunctional: times must be sorted");
    }
    if (cls_ == Smoothness::CompactSupportSmooth) {
        if (!box_ || box_->size() != times_.size())
            throw std::invalid_argument(
                "SmoothFunctional: compact support requires a bounding box");
    }

    // Gradient consistency by central finite differences at 20 random points.
    const std::size_t n = times_.size();
    std::mt19937_64 eng(0xC0FFEEULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> y(n), g(n), yp(n), ym(n);
    const double step = 1e-5;
    for (int pt = 0; pt < 20; ++pt) {
        for (std::size_t i = 0; i < n; ++i) {
            if (box_) {
                const auto& [lo, hi] = (*box_)[i];
                y[i] = lo + unit(eng) * (hi - lo);
            } else {
                y[i] = -2.0 + 4.0 * unit(eng);
            }
        }
        grad_(y, g);
        for (std::size_t i = 0; i < n; ++i) {
            yp = y;
            ym = y;
            yp[i] += step;
            ym[i] -= step;
            const double fd = (f_(yp) - f_(ym)) / (2.0 * step);
            if (std::abs(fd - g[i]) > 1e-6 * (1.0 + std::abs(g[i])))
                throw std::invalid_argument(
                    "SmoothFunctional: gradient inconsistent with finite differences");
        }
    }
}

std::vector<double> SmoothFunctional::gather(const Path& path) const {
    std::vector<double> y(times_.size());
    for (std::size_t i = 0; i < times_.size(); ++i) y[i] = path.value(times_[i]);
    return y;
}

double SmoothFunctional::eval_on(const Path& path) const {
    auto y = gather(path);
    return f_(y);
}

DerivField::DerivField(const SmoothFunctional& F, const Path& path)
    : F_(&F), y_(F.gather(path)), grad_(F.arity()), grad_suffix_(F.arity() + 1, 0.0),
      shift_buf_(F.arity()) {
    F.grad(y_, grad_);
    for (std::size_t i = F.arity(); i-- > 0;)
        grad_suffix_[i] = grad_suffix_[i + 1] + grad_[i];
    f0_ = F.eval(y_);
}

double DerivField::operator()(double t, double x) const {
    if (!(t >= 0.0)) throw std::invalid_argument("DerivField: need t >= 0");
    const auto& times = F_->times();
    // First index with t_i >= t; the indicator 1_{[0,t_i]}(t) selects i >= idx.
    const std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(times.begin(), times.end(), t) - times.begin());
    if (x == 0.0) return grad_suffix_[idx];
    if (idx == times.size()) return 0.0;
    shift_buf_ = y_;
    for (std::size_t i = idx; i < times.size(); ++i) shift_buf_[i] += x;
    return (F_->eval(shift_buf_) - f0_) / x;
}

double eval_D(const SmoothFunctional& F, const Path& path, double t, double x) {
    return DerivField(F, path)(t, x);
}

PathFunctional from_smooth(SmoothFunctional F) {
    auto shared = std::make_shared<const SmoothFunctional>(std::move(F));
    PathFunctional pf;
    pf.t_breakpoints = sorted_unique(shared->times());
    pf.required_times = pf.t_breakpoints;
    pf.bind = [shared](const Path& path) {
        auto field = std::make_shared<DerivField>(*shared, path);
        PathEvaluator ev;
        ev.value = field->value();
        ev.deriv = [field](double t, double x) { return (*field)(t, x); };
        return ev;
    };
    return pf;
}

PathFunctional from_separable(SeparableKernel k) {
    auto shared = std::make_shared<const SeparableKernel>(std::move(k));
    PathFunctional pf;
    pf.t_breakpoints = {shared->s, shared->u};
    pf.required_times = pf.t_breakpoints;
    pf.bind = [shared](const Path& path) {
        PathEvaluator ev;
        ev.value = eval_I1(path, *shared);
        ev.deriv = [shared](double t, double x) {
            return (shared->s < t && t <= shared->u) ? shared->profile.value(x) : 0.0;
        };
        return ev;
    };
    return pf;
}

PathFunctional from_tensor(TensorKernel tk) {
    auto shared = std::make_shared<const TensorKernel>(std::move(tk));
    PathFunctional pf;
    pf.t_breakpoints = shared->time_endpoints();
    pf.required_times = pf.t_breakpoints;
    pf.bind = [shared](const Path& path) {
        PathEvaluator ev;
        ev.value = eval_IN(path, *shared);
        const Path* p = &path;
        ev.deriv = [shared, p](double t, double x) {
            return derivative_of_elementary(*p, *shared, t, x);
        };
        return ev;
    };
    return pf;
}

PathFunctional from_rect_product(std::vector<Rect> rects) {
    auto shared = std::make_shared<const std::vector<Rect>>(std::move(rects));
    PathFunctional pf;
    std::vector<double> bp;
    for (const auto& r : *shared) {
        bp.push_back(r.t_lo);
        bp.push_back(r.t_hi);
    }
    pf.t_breakpoints = sorted_unique(std::move(bp));
    pf.required_times = pf.t_breakpoints;
    pf.bind = [shared](const Path& path) {
        PathEvaluator ev;
        ev.value = eval_rect_product(path, *shared);
        const Path* p = &path;
        ev.deriv = [shared, p](double t, double x) {
            return derivative_of_rect_product(*p, *shared, t, x);
        };
        return ev;
    };
    return pf;
}

PathFunctional from_separable_product(std::vector<SeparableKernel> ks) {
    if (ks.empty()) throw std::invalid_argument("from_separable_product: empty list");
    for (std::size_t i = 0; i < ks.size(); ++i)
        for (std::size_t j = i + 1; j < ks.size(); ++j)
            if (ks[i].s < ks[j].u && ks[j].s < ks[i].u)
                throw std::invalid_argument(
                    "from_separable_product: intervals must be disjoint");
    auto shared = std::make_shared<const std::vector<SeparableKernel>>(std::move(ks));
    PathFunctional pf;
    std::vector<double> bp;
    for (const auto& k : *shared) {
        bp.push_back(k.s);
        bp.push_back(k.u);
    }
    pf.t_breakpoints = sorted_unique(std::move(bp));
    pf.required_times = pf.t_breakpoints;
    pf.bind = [shared](const Path& path) {
        auto vals = std::make_shared<std::vector<double>>();
        vals->reserve(shared->size());
        double prod = 1.0;
        for (const auto& k : *shared) {
            vals->push_back(eval_I1(path, k));
            prod *= vals->back();
        }
        PathEvaluator ev;
        ev.value = prod;
        ev.deriv = [shared, vals](double t, double x) {
            // time-disjoint intervals: at most one factor is differentiated
            double d = 0.0;
            for (std::size_t i = 0; i < shared->size(); ++i) {
                const auto& k = (*shared)[i];
                if (k.s < t && t <= k.u) {
                    double rest = 1.0;
                    for (std::size_t j = 0; j < shared->size(); ++j)
                        if (j != i) rest *= (*vals)[j];
                    d += k.profile.value(x) * rest;
                }
            }
            return d;
        };
        return ev;
    };
    return pf;
}

PathFunctional difference(PathFunctional a, PathFunctional b) {
    auto sa = std::make_shared<PathFunctional>(std::move(a));
    auto sb = std::make_shared<PathFunctional>(std::move(b));
    PathFunctional pf;
    pf.t_breakpoints = merge_sorted(sa->t_breakpoints, sb->t_breakpoints);
    pf.required_times = merge_sorted(sa->required_times, sb->required_times);
    pf.aux_stderr = std::hypot(sa->aux_stderr, sb->aux_stderr);
    pf.bind = [sa, sb](const Path& path) {
        auto ea = std::make_shared<PathEvaluator>(sa->bind(path));
        auto eb = std::make_shared<PathEvaluator>(sb->bind(path));
        PathEvaluator ev;
        ev.value = ea->value - eb->value;
        ev.deriv = [ea, eb](double t, double x) {
            return ea->deriv(t, x) - eb->deriv(t, x);
        };
        return ev;
    };
    return pf;
}

double d12_m_integral(const LevyTriplet& triplet, const PathEvaluator& ev,
                      std::span<const double> breakpoints, NormFlavor flavor) {
    const bool zero_part = flavor != NormFlavor::JumpPart;
    const bool jump_part = flavor != NormFlavor::ZeroPart;
    const double sigma2 = triplet.sigma() * triplet.sigma();
    const JumpMeasure& nu = triplet.nu();
    double acc = 0.0;
    double prev = 0.0;
    for (double b : breakpoints) {
        if (b <= prev) {
            prev = std::max(prev, b);
            continue;
        }
        const double len = b - prev;
        const double tmid = 0.5 * (prev + b);
        double density_at_t = 0.0;
        if (zero_part && sigma2 > 0.0) {
            const double d0 = ev.deriv(tmid, 0.0);
            density_at_t += sigma2 * d0 * d0;
        }
        if (jump_part) {
            if (nu.is_atomic()) {
                for (const auto& at : nu.atoms()) {
                    const double d = ev.deriv(tmid, at.position);
                    density_at_t += at.intensity * at.position * at.position * d * d;
                }
            } else {
                density_at_t += integrate(
                    [&](double x) {
                        const double d = ev.deriv(tmid, x);
                        return x * x * nu.density_at(x) * d * d;
                    },
                    nu.support_lo(), nu.support_hi(), nu.panels());
            }
        }
        acc += len * density_at_t;
        prev = b;
    }
    return acc;
}

namespace {

MCEstimate d12_norm_sq_mc_impl(const PathFunctional& F, const LevyTriplet& triplet,
                               double horizon, std::uint64_t n_reps, std::uint64_t seed,
                               NormFlavor flavor, int threads) {
    for (double t : F.required_times)
        if (t > horizon)
            throw std::invalid_argument("d12_norm_sq_mc: functional time beyond horizon");
    auto estimator = [&](const Path& path) {
        PathEvaluator ev = F.bind(path);
        return ev.value * ev.value +
               d12_m_integral(triplet, ev, F.t_breakpoints, flavor);
    };
    return mc_run(estimator, n_reps, seed, triplet, horizon, F.required_times, threads);
}

}  // namespace

MCEstimate d12_norm_sq_mc(const PathFunctional& F, const LevyTriplet& triplet,
                          double horizon, std::uint64_t n_reps, std::uint64_t seed,
                          NormFlavor flavor, int threads) {
    return d12_norm_sq_mc_impl(F, triplet, horizon, n_reps, seed, flavor, threads);
}

MCEstimate d12_norm_sq_mc(const SmoothFunctional& F, const LevyTriplet& triplet,
                          double horizon, std::uint64_t n_reps, std::uint64_t seed,
                          NormFlavor flavor, int threads) {
    return d12_norm_sq_mc_impl(from_smooth(F), triplet, horizon, n_reps, seed, flavor,
                               threads);
}

SmoothFunctional product(const SmoothFunctional& F, const SmoothFunctional& G) {
    const auto merged = merge_sorted(F.times(), G.times());
    auto index_of = [&](double t) {
        return static_cast<std::size_t>(
            std::lower_bound(merged.begin(), merged.end(), t) - merged.begin());
    };
    std::vector<std::size_t> idxF(F.arity()), idxG(G.arity());
    for (std::size_t i = 0; i < F.arity(); ++i) idxF[i] = index_of(F.times()[i]);
    for (std::size_t i = 0; i < G.arity(); ++i) idxG[i] = index_of(G.times()[i]);

    auto sharedF = std::make_shared<const SmoothFunctional>(F);
    auto sharedG = std::make_shared<const SmoothFunctional>(G);

    SmoothFunctional::Fn f = [sharedF, sharedG, idxF, idxG](std::span<const double> y) {
        std::vector<double> bf(idxF.size()), bg(idxG.size());
        for (std::size_t i = 0; i < idxF.size(); ++i) bf[i] = y[idxF[i]];
        for (std::size_t i = 0; i < idxG.size(); ++i) bg[i] = y[idxG[i]];
        return sharedF->eval(bf) * sharedG->eval(bg);
    };
    SmoothFunctional::Grad grad = [sharedF, sharedG, idxF, idxG](std::span<const double> y,
                                                                 std::span<double> out) {
        std::vector<double> bf(idxF.size()), bg(idxG.size());
        for (std::size_t i = 0; i < idxF.size(); ++i) bf[i] = y[idxF[i]];
        for (std::size_t i = 0; i < idxG.size(); ++i) bg[i] = y[idxG[i]];
        const double vF = sharedF->eval(bf), vG = sharedG->eval(bg);
        std::vector<double> gF(idxF.size()), gG(idxG.size());
        sharedF->grad(bf, gF);
        sharedG->grad(bg, gG);
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < idxF.size(); ++i) out[idxF[i]] += gF[i] * vG;
        for (std::size_t i = 0; i < idxG.size(); ++i) out[idxG[i]] += vF * gG[i];
    };

    const bool compact = F.smoothness() == Smoothness::CompactSupportSmooth &&
                         G.smoothness() == Smoothness::CompactSupportSmooth;
    std::optional<SmoothFunctional::Box> box;
    if (compact) {
        SmoothFunctional::Box b(merged.size(),
                                {-std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()});
        auto clip = [&](const std::vector<std::size_t>& idx,
                        const SmoothFunctional::Box& src) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                b[idx[i]].first = std::max(b[idx[i]].first, src[i].first);
                b[idx[i]].second = std::min(b[idx[i]].second, src[i].second);
            }
        };
        clip(idxF, *F.support_box());
        clip(idxG, *G.support_box());
        for (auto& [lo, hi] : b) {
            if (!std::isfinite(lo)) lo = -1e6;
            if (!std::isfinite(hi)) hi = 1e6;
            if (lo > hi) lo = hi = 0.0;  // disjoint supports: product vanishes
        }
        box = std::move(b);
    }
    return SmoothFunctional(merged, std::move(f), std::move(grad),
                            compact ? Smoothness::CompactSupportSmooth
                                    : Smoothness::C1Extended,
                            std::move(box));
}

SmoothFunctional shifted(const SmoothFunctional& F, double c) {
    auto shared = std::make_shared<const SmoothFunctional>(F);
    SmoothFunctional::Fn f = [shared, c](std::span<const double> y) {
        return shared->eval(y) - c;
    };
    SmoothFunctional::Grad grad = [shared](std::span<const double> y,
                                           std::span<double> out) {
        shared->grad(y, out);
    };
    const bool still_compact =
        c == 0.0 && F.smoothness() == Smoothness::CompactSupportSmooth;
    return SmoothFunctional(F.times(), std::move(f), std::move(grad),
                            still_compact ? Smoothness::CompactSupportSmooth
                                          : Smoothness::C1Extended,
                            still_compact ? F.support_box() : std::nullopt);
}

std::pair<double, double> product_rule_check(const SmoothFunctional& F,
                                             const SmoothFunctional& G, const Path& path,
                                             double t, double x) {
    const SmoothFunctional FG = product(F, G);
    const double lhs = eval_D(FG, path, t, x);
    const double vF = F.eval_on(path), vG = G.eval_on(path);
    const double dF = eval_D(F, path, t, x), dG = eval_D(G, path, t, x);
    const double rhs = vG * dF + vF * dG + x * dF * dG;
    return {lhs, rhs};
}

LipschitzFn::LipschitzFn(std::function<double(double)> fn_, double lipschitz_,
                         std::function<double(double)> deriv_)
    : fn(std::move(fn_)), lipschitz(lipschitz_), deriv(std::move(deriv_)) {
    if (!fn) throw std::invalid_argument("LipschitzFn: null function");
    if (!(lipschitz >= 0.0)) throw std::invalid_argument("LipschitzFn: bad constant");
    std::mt19937_64 eng(0x11B5C417ULL);
    std::uniform_real_distribution<double> pts(-8.0, 8.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = pts(eng), b = pts(eng);
        if (std::abs(fn(a) - fn(b)) >
            lipschitz * std::abs(a - b) * (1.0 + 1e-9) + 1e-12)
            throw std::invalid_argument("LipschitzFn: declared constant violated");
    }
}

double chain_rule_jump(const LipschitzFn& g, const SmoothFunctional& F, const Path& path,
                       double t, double x) {
    if (x == 0.0)
        throw std::invalid_argument("chain_rule_jump: x = 0 (use chain_rule_zero)");
    const double f0 = F.eval_on(path);
    const double d = eval_D(F, path, t, x);
    return (g.fn(f0 + x * d) - g.fn(f0)) / x;
}

double chain_rule_zero(const LipschitzFn& g, const SmoothFunctional& F, const Path& path,
                       double t) {
    if (!g.deriv) throw std::invalid_argument("chain_rule_zero: g' absent");
    const double f0 = F.eval_on(path);
    const double gprime = g.deriv(f0);
    if (std::abs(gprime) > g.lipschitz + 1e-12)
        throw std::runtime_error("chain_rule_zero: |g'(F)| exceeds Lipschitz constant");
    return gprime * eval_D(F, path, t, 0.0);
}

SmoothFunctional compose(const LipschitzFn& g, const SmoothFunctional& F) {
    if (!g.deriv) throw std::invalid_argument("compose: g' required");
    auto shared = std::make_shared<const SmoothFunctional>(F);
    auto gfn = g.fn;
    auto gdv = g.deriv;
    SmoothFunctional::Fn f = [shared, gfn](std::span<const double> y) {
        return gfn(shared->eval(y));
    };
    SmoothFunctional::Grad grad = [shared, gdv](std::span<const double> y,
                                                std::span<double> out) {
        shared->grad(y, out);
        const double s = gdv(shared->eval(y));
        for (auto& v : out) v *= s;
    };
    const bool compact = F.smoothness() == Smoothness::CompactSupportSmooth &&
                         g.fn(0.0) == 0.0;
    return SmoothFunctional(F.times(), std::move(f), std::move(grad),
                            compact ? Smoothness::CompactSupportSmooth
                                    : Smoothness::C1Extended,
                            compact ? F.support_box() : std::nullopt);
}

namespace {

// Shared quadrature table for the mollifier bump on [-1, 1].
struct MollifierTable {
    std::vector<double> nodes, weights, psi, dpsi;
    double norm = 0.0;

    MollifierTable() {
        const int panels = 256, order = 8;
        const auto& rule = gauss_legendre(order);
        const double h = 2.0 / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = -1.0 + (p + 0.5) * h;
            for (int i = 0; i < order; ++i) {
                const double u = mid + 0.5 * h * rule.nodes[static_cast<std::size_t>(i)];
                const double w = 0.5 * h * rule.weights[static_cast<std::size_t>(i)];
                const double q = 1.0 - u * u;
                const double val = q > 0.0 ? std::exp(-1.0 / q) : 0.0;
                nodes.push_back(u);
                weights.push_back(w);
                psi.push_back(val);
                dpsi.push_back(q > 0.0 ? val * (-2.0 * u) / (q * q) : 0.0);
            }
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) norm += weights[i] * psi[i];
    }
};

const MollifierTable& mollifier_table() {
    static MollifierTable table;
    return table;
}

}  // namespace

LipschitzFn mollify(const LipschitzFn& g, int N) {
    if (N < 1) throw std::invalid_argument("mollify: need N >= 1");
    const auto& tab = mollifier_table();
    if (!(tab.norm > 0.0)) throw std::runtime_error("mollify: quadrature failure");
    auto base = g.fn;
    const double scale = static_cast<double>(N);
    auto value = [base, scale, &tab](double y) {
        double acc = 0.0;
        for (std::size_t i = 0; i < tab.nodes.size(); ++i)
            acc += tab.weights[i] * tab.psi[i] * base(y - tab.nodes[i] / scale);
        return acc / tab.norm;
    };
    auto deriv = [base, scale, &tab](double y) {
        double acc = 0.0;
        for (std::size_t i = 0; i < tab.nodes.size(); ++i)
            acc += tab.weights[i] * tab.dpsi[i] * base(y - tab.nodes[i] / scale);
        return scale * acc / tab.norm;
    };
    return LipschitzFn(value, g.lipschitz, deriv);
}

}  // namespace levylab
