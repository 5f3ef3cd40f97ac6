#include "levylab/random_measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levylab {

namespace {

bool time_intervals_overlap(double a_lo, double a_hi, double b_lo, double b_hi) {
    // (a_lo, a_hi] vs (b_lo, b_hi]
    return a_lo < b_hi && b_lo < a_hi;
}

}  // namespace

StepKernel::StepKernel(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("StepKernel: need at least one term");
    for (std::size_t i = 0; i < terms_.size(); ++i)
        for (std::size_t j = i + 1; j < terms_.size(); ++j)
            if (intersect(terms_[i].rect, terms_[j].rect))
                throw std::invalid_argument("StepKernel: rectangles must be disjoint");
}

StepKernel StepKernel::indicator(const Rect& r, double coefficient) {
    return StepKernel({Term{coefficient, r}});
}

double StepKernel::point_value(double t, double x) const {
    double v = 0.0;
    for (const auto& term : terms_)
        if (term.rect.contains(t, x)) v += term.coefficient;
    return v;
}

double StepKernel::l2_norm_sq(const LevyTriplet& triplet) const {
    double v = 0.0;
    for (const auto& term : terms_)
        v += term.coefficient * term.coefficient * m_measure(triplet, term.rect);
    return v;
}

std::vector<double> StepKernel::time_endpoints() const {
    std::vector<double> out;
    out.reserve(2 * terms_.size());
    for (const auto& term : terms_) {
        out.push_back(term.rect.t_lo);
        out.push_back(term.rect.t_hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double StepKernel::time_lo() const {
    double v = terms_[0].rect.t_lo;
    for (const auto& term : terms_) v = std::min(v, term.rect.t_lo);
    return v;
}

double StepKernel::time_hi() const {
    double v = terms_[0].rect.t_hi;
    for (const auto& term : terms_) v = std::max(v, term.rect.t_hi);
    return v;
}

SeparableKernel::SeparableKernel(double s_, double u_, Profile profile_)
    : s(s_), u(u_), profile(std::move(profile_)) {
    if (!(0.0 <= s && s < u)) throw std::invalid_argument("SeparableKernel: need 0 <= s < u");
}

TensorKernel::TensorKernel(std::vector<StepKernel> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("TensorKernel: need N >= 1 factors");
    for (std::size_t i = 0; i < factors_.size(); ++i)
        for (std::size_t j = i + 1; j < factors_.size(); ++j)
            for (const auto& a : factors_[i].terms())
                for (const auto& b : factors_[j].terms())
                    if (time_intervals_overlap(a.rect.t_lo, a.rect.t_hi, b.rect.t_lo,
                                               b.rect.t_hi))
                        throw std::invalid_argument(
                            "TensorKernel: factor time supports must be disjoint");
}

std::vector<double> TensorKernel::time_endpoints() const {
    std::vector<double> out;
    for (const auto& f : factors_) {
        auto e = f.time_endpoints();
        out.insert(out.end(), e.begin(), e.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double eval_M(const Path& path, const Rect& r) {
    if (r.t_hi > path.horizon())
        throw std::invalid_argument("eval_M: rectangle beyond horizon");
    const LevyTriplet& tr = path.triplet();
    double v = 0.0;
    if (tr.sigma() > 0.0 && r.contains_zero())
        v += tr.sigma() * (path.brownian(r.t_hi) - path.brownian(r.t_lo));
    for (const auto& j : path.jumps()) {
        if (j.time > r.t_hi) break;
        if (j.time > r.t_lo && r.x_lo < j.size && j.size <= r.x_hi) v += j.size;
    }
    v -= r.time_length() * tr.nu().first_moment(r.x_lo, r.x_hi);
    return v;
}

double eval_I1(const Path& path, const StepKernel& k) {
    double v = 0.0;
    for (const auto& term : k.terms()) v += term.coefficient * eval_M(path, term.rect);
    return v;
}

double eval_I1(const Path& path, const SeparableKernel& k) {
    if (k.u > path.horizon())
        throw std::invalid_argument("eval_I1: kernel interval beyond horizon");
    const LevyTriplet& tr = path.triplet();
    double v = 0.0;
    const double phi0 = k.profile.value(0.0);
    if (tr.sigma() > 0.0 && phi0 != 0.0)
        v += tr.sigma() * phi0 * (path.brownian(k.u) - path.brownian(k.s));
    for (const auto& j : path.jumps()) {
        if (j.time > k.u) break;
        if (j.time > k.s) v += j.size * k.profile.value(j.size);
    }
    v -= (k.u - k.s) * tr.nu().integral([&](double x) { return x * k.profile.value(x); });
    return v;
}

double eval_IN(const Path& path, const TensorKernel& tk) {
    // multiply in time order so permuted factor lists give bit-identical values
    std::vector<std::pair<double, double>> vals;
    vals.reserve(tk.factors().size());
    for (const auto& f : tk.factors()) vals.push_back({f.time_lo(), eval_I1(path, f)});
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double v = 1.0;
    for (const auto& [_, i1] : vals) v *= i1;
    return v;
}

double derivative_of_elementary(const Path& path, const TensorKernel& tk, double t,
                                double x) {
    const auto& fs = tk.factors();
    const std::size_t n = fs.size();
    std::vector<double> i1(n);
    for (std::size_t i = 0; i < n; ++i) i1[i] = eval_I1(path, fs[i]);
    // prefix/suffix products of the I1 values
    std::vector<double> pre(n + 1, 1.0), suf(n + 1, 1.0);
    for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] * i1[i];
    for (std::size_t i = n; i-- > 0;) suf[i] = suf[i + 1] * i1[i];
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = fs[i].point_value(t, x);
        if (k != 0.0) v += k * pre[i] * suf[i + 1];
    }
    return v;
}

double eval_rect_product(const Path& path, std::span<const Rect> rects) {
    double v = 1.0;
    for (const auto& r : rects) v *= eval_M(path, r);
    return v;
}

double derivative_of_rect_product(const Path& path, std::span<const Rect> rects, double t,
                                  double x) {
    double v = 1.0, d = 0.0;
    for (const auto& r : rects) {
        const double vi = eval_M(path, r);
        const double di = r.contains(t, x) ? 1.0 : 0.0;
        d = v * di + vi * d + x * d * di;
        v *= vi;
    }
    return d;
}

}  // namespace levylab
