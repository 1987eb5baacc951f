#include "pani/weight_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "pani/errors.hpp"

namespace pani {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

WeightLaw WeightLaw::atoms(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
        throw DomainError("atoms: values/probs size mismatch");
    WeightLaw law;
    law.kind_ = LawKind::atoms;
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(probs[i] >= 0.0)) throw DomainError("atoms: negative probability");
        if (!(values[i] >= 0.0)) throw DomainError("atoms: negative value");
        sum += probs[i];
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw DomainError("atoms: probabilities sum to " + std::to_string(sum));
    for (auto& p : probs) p /= sum;  // remove <1e-9 drift
    std::set<double> distinct(values.begin(), values.end());
    if (distinct.size() != values.size())
        throw DomainError("atoms: duplicate values");
    law.values_ = std::move(values);
    law.probs_ = std::move(probs);
    law.w_star_ = *std::max_element(law.values_.begin(), law.values_.end());
    if (!(law.w_star_ > 0.0)) throw DomainError("atoms: w_star must be > 0");
    law.cum_.resize(law.probs_.size());
    double c = 0.0;
    for (std::size_t i = 0; i < law.probs_.size(); ++i) {
        c += law.probs_[i];
        law.cum_[i] = c;
    }
    law.cum_.back() = 1.0;
    return law;
}

WeightLaw WeightLaw::uniform(double w_star) {
    if (!(w_star > 0.0)) throw DomainError("uniform: w_star must be > 0");
    WeightLaw law;
    law.kind_ = LawKind::uniform;
    law.w_star_ = w_star;
    return law;
}

WeightLaw WeightLaw::beta_poly(double alpha) {
    if (!(alpha > -1.0)) throw DomainError("beta_poly: alpha must be > -1");
    WeightLaw law;
    law.kind_ = LawKind::beta_poly;
    law.w_star_ = 1.0;
    law.alpha_ = alpha;
    law.validate_density();
    return law;
}

WeightLaw WeightLaw::piecewise(std::vector<double> breakpoints,
                               std::vector<double> densities) {
    if (breakpoints.size() < 2 || densities.size() + 1 != breakpoints.size())
        throw DomainError("piecewise: need n+1 breakpoints for n densities");
    if (breakpoints.front() != 0.0)
        throw DomainError("piecewise: breakpoints must start at 0");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw DomainError("piecewise: breakpoints must increase");
    double mass = 0.0;
    for (std::size_t i = 0; i < densities.size(); ++i) {
        if (!(densities[i] >= 0.0)) throw DomainError("piecewise: negative density");
        mass += densities[i] * (breakpoints[i + 1] - breakpoints[i]);
    }
    if (std::fabs(mass - 1.0) > 1e-9)
        throw DomainError("piecewise: density integrates to " + std::to_string(mass));
    WeightLaw law;
    law.kind_ = LawKind::piecewise_density;
    law.w_star_ = breakpoints.back();
    law.breaks_ = std::move(breakpoints);
    law.dens_ = std::move(densities);
    law.seg_cum_.resize(law.dens_.size());
    double c = 0.0;
    for (std::size_t i = 0; i < law.dens_.size(); ++i) {
        c += law.dens_[i] * (law.breaks_[i + 1] - law.breaks_[i]);
        law.seg_cum_[i] = c;
    }
    law.seg_cum_.back() = 1.0;
    // mass was already checked exactly above; no quadrature needed
    return law;
}

void WeightLaw::validate_density() const {
    // construction-time self check: the density must integrate to 1
    auto f = [this](double w) { return density(w); };
    auto segs = segments();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        if (i + 2 == segs.size())
            total += integrate_with_top_singularity(f, segs[i], segs[i + 1]);
        else
            total += adaptive_simpson(f, segs[i], segs[i + 1], 1e-11);
    }
    if (!(std::fabs(total - 1.0) <= 1e-9))
        throw DomainError("density does not integrate to 1");
}

double WeightLaw::sample(Rng& rng) const {
    switch (kind_) {
        case LawKind::atoms: {
            double u = rng.uniform01();
            for (std::size_t i = 0; i < cum_.size(); ++i)
                if (u < cum_[i]) return values_[i];
            return values_.back();
        }
        case LawKind::uniform:
            return w_star_ * rng.uniform01();
        case LawKind::beta_poly: {
            double u = rng.uniform01();
            return 1.0 - std::pow(1.0 - u, 1.0 / (alpha_ + 1.0));
        }
        case LawKind::piecewise_density: {
            double u = rng.uniform01();
            std::size_t i = 0;
            while (i + 1 < seg_cum_.size() && u >= seg_cum_[i]) ++i;
            double lo_mass = i == 0 ? 0.0 : seg_cum_[i - 1];
            double d = dens_[i];
            if (d <= 0.0) return breaks_[i];  // zero-mass segment, u==lo_mass edge
            return breaks_[i] + (u - lo_mass) / d;
        }
    }
    return 0.0;
}

double WeightLaw::cdf(double t) const {
    if (t < 0.0) return 0.0;
    if (t >= w_star_) return 1.0;
    switch (kind_) {
        case LawKind::atoms: {
            double c = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i)
                if (values_[i] <= t) c += probs_[i];
            return c;
        }
        case LawKind::uniform:
            return t / w_star_;
        case LawKind::beta_poly:
            return 1.0 - std::pow(1.0 - t, alpha_ + 1.0);
        case LawKind::piecewise_density: {
            double c = 0.0;
            for (std::size_t i = 0; i < dens_.size(); ++i) {
                double hi = std::min(t, breaks_[i + 1]);
                if (hi <= breaks_[i]) break;
                c += dens_[i] * (hi - breaks_[i]);
            }
            return c;
        }
    }
    return 0.0;
}

double WeightLaw::density(double w) const {
    switch (kind_) {
        case LawKind::atoms:
            throw DomainError("density undefined for atomic law");
        case LawKind::uniform:
            return (w >= 0.0 && w <= w_star_) ? 1.0 / w_star_ : 0.0;
        case LawKind::beta_poly:
            return (w >= 0.0 && w <= 1.0) ? (alpha_ + 1.0) * std::pow(1.0 - w, alpha_)
                                          : 0.0;
        case LawKind::piecewise_density: {
            if (w < 0.0 || w > w_star_) return 0.0;
            for (std::size_t i = 0; i < dens_.size(); ++i)
                if (w <= breaks_[i + 1]) return dens_[i];
            return dens_.back();
        }
    }
    return 0.0;
}

double WeightLaw::measure(const WeightSet& A) const {
    double total = 0.0;
    for (const auto& iv : A.parts()) {
        if (iv.lo < 0.0 || iv.hi > w_star_ * (1.0 + 1e-12))
            throw DomainError("measure: set outside [0, w_star]");
        if (kind_ == LawKind::atoms) {
            for (std::size_t i = 0; i < values_.size(); ++i)
                if (iv.contains(values_[i])) total += probs_[i];
        } else {
            total += cdf(std::min(iv.hi, w_star_)) - cdf(iv.lo);
        }
    }
    return std::min(total, 1.0);
}

std::vector<double> WeightLaw::segments() const {
    switch (kind_) {
        case LawKind::piecewise_density:
            return breaks_;
        default:
            return {0.0, w_star_};
    }
}

double expect(const WeightLaw& law, const std::function<double(double)>& f,
              const ExpectOptions& opts) {
    return expect_over(law, WeightSet::full(law.w_star()), f, opts);
}

double expect_over(const WeightLaw& law, const WeightSet& A,
                   const std::function<double(double)>& f,
                   const ExpectOptions& opts) {
    if (law.is_atomic()) {
        double total = 0.0;
        const auto& vals = law.atom_values();
        const auto& probs = law.atom_probs();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (probs[i] <= 0.0 || !A.contains(vals[i])) continue;
            double fv = f(vals[i]);
            if (!std::isfinite(fv)) return kInf;
            total += probs[i] * fv;
        }
        return total;
    }
    QuadratureOptions qopts;
    qopts.abs_tol = opts.tol * 0.1;
    qopts.divergence_cap = opts.divergence_cap;
    const bool piecewise = law.kind() == LawKind::piecewise_density;
    auto segs = law.segments();
    double total = 0.0;
    for (const auto& iv : A.parts()) {
        if (iv.lo < 0.0 || iv.hi > law.w_star() * (1.0 + 1e-12))
            throw DomainError("expect_over: set outside [0, w_star]");
        double lo = iv.lo;
        double hi = std::min(iv.hi, law.w_star());
        if (hi <= lo) continue;
        // split at density breakpoints; the topmost piece may be singular at w*
        std::vector<double> cuts{lo};
        for (double s : segs)
            if (s > lo && s < hi) cuts.push_back(s);
        cuts.push_back(hi);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            // piecewise densities are constant between cuts; pinning the value
            // keeps breakpoint edges away from the quadrature nodes
            double dpin = piecewise ? law.density(0.5 * (cuts[i] + cuts[i + 1])) : 0.0;
            auto integrand = [&](double w) {
                return f(w) * (piecewise ? dpin : law.density(w));
            };
            double part;
            if (cuts[i + 1] >= law.w_star() * (1.0 - 1e-15))
                part = integrate_with_top_singularity(integrand, cuts[i], cuts[i + 1], qopts);
            else
                part = adaptive_simpson(integrand, cuts[i], cuts[i + 1], qopts.abs_tol,
                                        qopts.max_depth);
            if (!std::isfinite(part)) return kInf;
            total += part;
            if (std::fabs(total) > opts.divergence_cap) return kInf;
        }
    }
    return total;
}

Interval DyadicPartition::cell(int i) const {
    if (i < 0 || i >= cell_count()) throw DomainError("dyadic cell index out of range");
    double w = std::ldexp(range, -level);
    if (i == 0) return {0.0, w, false, false};
    return {i * w, (i + 1) * w, true, false};
}

int DyadicPartition::locate(double v) const {
    if (v < 0.0 || v > range) throw DomainError("locate: value outside [0, range]");
    if (v <= 0.0) return 0;
    double scaled = v / range * cell_count();
    int idx = static_cast<int>(std::ceil(scaled)) - 1;
    if (idx < 0) idx = 0;
    if (idx >= cell_count()) idx = cell_count() - 1;
    // guard against roundoff at cell edges
    while (idx > 0 && !cell(idx).contains(v)) --idx;
    while (idx + 1 < cell_count() && !cell(idx).contains(v)) ++idx;
    return idx;
}

DyadicPartition dyadic_cells(int m, double x) {
    if (m < 0) throw DomainError("dyadic_cells: level must be >= 0");
    if (!(x > 0.0)) throw DomainError("dyadic_cells: range must be > 0");
    return DyadicPartition{m, x};
}

}  // namespace pani
