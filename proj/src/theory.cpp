#include "pani/theory.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "pani/errors.hpp"

namespace pani {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// psi-style ratio: a zero numerator wins over a zero denominator, so laws
// with h = 0 on the maximizer set stay classifiable
double safe_ratio(double num, double den) {
    if (num <= 0.0) return 0.0;
    if (den <= 0.0) return kInf;
    return num / den;
}

struct Welford {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double std_error() const {
        return n > 1 ? std::sqrt(m2 / (double(n) * double(n - 1))) : 0.0;
    }
};

double criterion_integral(const FitnessModel& model, const WeightLaw& law,
                          const GTilde& gt, double lambda,
                          const ExpectOptions& opts = {}) {
    return expect(law, [&](double w) {
        return safe_ratio(model.h(w), lambda - gt(w));
    }, opts);
}

}  // namespace

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::non_condensation: return "non_condensation";
        case Regime::condensation: return "condensation";
        case Regime::boundary: return "boundary";
    }
    return "?";
}

TheoryReport classify_regime(const FitnessModel& model, const WeightLaw& law,
                             double boundary_tol) {
    GTilde gt(model, law);
    TheoryReport rep;
    rep.g_tilde_star = gt.star();
    rep.criterion_value = criterion_integral(model, law, gt, gt.star());
    rep.diagnostics.boundary_tol = boundary_tol;
    rep.diagnostics.quadrature_tol = 1e-9;
    if (rep.criterion_value < 1.0 - boundary_tol) {
        rep.regime = Regime::condensation;
        rep.condensate_mass = 1.0 - rep.criterion_value;
    } else if (rep.criterion_value > 1.0 + boundary_tol) {
        rep.regime = Regime::non_condensation;
        rep.condensate_mass = 0.0;
    } else {
        rep.regime = Regime::boundary;
    }
    return rep;
}

double malthusian(const FitnessModel& model, const WeightLaw& law, double tol,
                  TheoryDiagnostics* diag) {
    auto rep = classify_regime(model, law);
    if (rep.regime != Regime::non_condensation)
        throw PreconditionError("malthusian parameter requires the non-condensation regime");
    GTilde gt(model, law);
    const double star = gt.star();
    // the root integrand is smooth above g~*, so a tight quadrature is cheap
    ExpectOptions eopts;
    eopts.tol = std::max(1e-12, 0.05 * tol);
    auto F = [&](double lambda) {
        return criterion_integral(model, law, gt, lambda, eopts);
    };

    double lo = star + 1e-9 * (1.0 + star);
    double hi = star + model.h_max();
    int iters = 0;
    double f_hi = F(hi);
    ++iters;
    if (f_hi > 1.0 + 1e-6)
        throw InconsistencyError("criterion exceeds 1 at the upper bracket");
    if (std::fabs(f_hi - 1.0) <= tol) {
        if (diag) {
            diag->solver_iterations = iters;
            diag->solver_residual = std::fabs(f_hi - 1.0);
        }
        return hi;
    }
    double f_lo = F(lo);
    ++iters;
    if (f_lo < 1.0)
        throw PreconditionError("root lies below the bracket; configuration is near-boundary");

    double mid = 0.5 * (lo + hi);
    double res = kInf;
    while (iters < 300) {
        mid = 0.5 * (lo + hi);
        double f_mid = F(mid);
        ++iters;
        res = std::fabs(f_mid - 1.0);
        if (res <= 0.5 * tol && hi - lo <= 1e-9 * (1.0 + mid)) break;
        if (hi - lo <= 1e-15 * (1.0 + mid)) break;
        if (f_mid > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    if (res > tol) throw QuadratureError("malthusian solver did not meet tolerance");
    if (diag) {
        diag->solver_iterations = iters;
        diag->solver_residual = res;
    }
    return mid;
}

TheoryReport full_report(const FitnessModel& model, const WeightLaw& law,
                         double boundary_tol, double solver_tol) {
    TheoryReport rep = classify_regime(model, law, boundary_tol);
    if (rep.regime == Regime::non_condensation)
        rep.lambda_star = malthusian(model, law, solver_tol, &rep.diagnostics);
    return rep;
}

double psi_mass(const FitnessModel& model, const WeightLaw& law, const WeightSet& A,
                double lambda) {
    GTilde gt(model, law);
    // sup of g~ over A (the canonical shapes are nondecreasing)
    double sup_a = 0.0;
    if (law.is_atomic()) {
        const auto& vals = law.atom_values();
        for (double v : vals)
            if (A.contains(v)) sup_a = std::max(sup_a, gt(v));
    } else {
        for (const auto& p : A.parts()) sup_a = std::max(sup_a, gt(p.hi));
    }
    if (lambda < sup_a - 1e-12)
        throw PreconditionError("psi_mass: lambda below sup of g~ on A");
    return expect_over(law, A, [&](double w) {
        return safe_ratio(model.h(w), lambda - gt(w));
    });
}

double predicted_edge2(const FitnessModel& model, const WeightLaw& law,
                       const WeightSet& A, const WeightSet& B) {
    double lambda = malthusian(model, law);
    return psi_mass(model, law, A, lambda) * law.measure(B);
}

double condensate_mass(const FitnessModel& model, const WeightLaw& law) {
    auto rep = classify_regime(model, law);
    if (rep.regime != Regime::condensation)
        throw PreconditionError("condensate mass requires the condensation regime");
    return 1.0 - rep.criterion_value;
}

CompanionPath companion_sample(const FitnessModel& model, const WeightLaw& law,
                               double w, int k, Rng& rng) {
    if (k < 0) throw DomainError("companion_sample: k must be >= 0");
    CompanionPath path;
    path.w0 = w;
    path.values.reserve(static_cast<std::size_t>(k) + 1);
    double s = model.h(w);
    path.values.push_back(s);
    for (int i = 0; i < k; ++i) {
        s += model.g(w, law.sample(rng));
        path.values.push_back(s);
    }
    return path;
}

McEstimate degree_limit_mc(const FitnessModel& model, const WeightLaw& law, int k,
                           const WeightSet& B, double lambda, int n_samples,
                           Rng& rng) {
    if (lambda <= 0.0) throw DomainError("degree_limit_mc: lambda must be > 0");
    if (k < 0) throw DomainError("degree_limit_mc: k must be >= 0");
    Welford acc;
    for (int s = 0; s < n_samples; ++s) {
        double w0 = law.sample(rng);
        if (!B.contains(w0)) {
            acc.add(0.0);
            continue;
        }
        double prod = 1.0;  // empty product at k = 0
        double fit = model.h(w0);
        for (int i = 0; i < k; ++i) {
            prod *= fit / (fit + lambda);
            if (prod == 0.0) break;
            fit += model.g(w0, law.sample(rng));
        }
        acc.add(prod);
    }
    return {acc.mean, acc.std_error()};
}

std::vector<double> companion_products_exact(const FitnessModel& model,
                                             const WeightLaw& law, double w,
                                             double lambda, int k_max) {
    if (!law.is_atomic())
        throw PreconditionError("exact companion products need an atomic law");
    if (k_max > 65536) throw CapError("companion products: k beyond cap");
    const auto& vals = law.atom_values();
    const auto& probs = law.atom_probs();
    std::vector<double> incs(vals.size());
    for (std::size_t j = 0; j < vals.size(); ++j) incs[j] = model.g(w, vals[j]);

    std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
    out[0] = 1.0;
    // states: fitness sum -> probability mass carrying the running product
    std::map<double, double> states{{model.h(w), 1.0}};
    for (int k = 1; k <= k_max; ++k) {
        std::map<double, double> next;
        double level = 0.0;
        for (const auto& [s, m] : states) {
            double f = s <= 0.0 ? 0.0 : s / (s + lambda);
            double mm = m * f;
            if (mm == 0.0) continue;
            level += mm;
            if (k < k_max)
                for (std::size_t j = 0; j < incs.size(); ++j) {
                    if (probs[j] <= 0.0) continue;
                    next[s + incs[j]] += mm * probs[j];
                }
        }
        out[static_cast<std::size_t>(k)] = level;
        if (next.size() > 200000) throw CapError("companion products: state cap exceeded");
        states.swap(next);
        if (level == 0.0) break;
    }
    return out;
}

double degree_limit_exact(const FitnessModel& model, const WeightLaw& law, int k,
                          const WeightSet& B, double lambda) {
    if (!law.is_atomic())
        throw PreconditionError("degree_limit_exact needs an atomic law");
    const auto& vals = law.atom_values();
    const auto& probs = law.atom_probs();
    double total = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (probs[i] <= 0.0 || !B.contains(vals[i])) continue;
        auto prods = companion_products_exact(model, law, vals[i], lambda, k);
        total += probs[i] * prods[static_cast<std::size_t>(k)];
    }
    return total;
}

double companion_tail_bound(const FitnessModel& model, double w, double lambda,
                            int K) {
    const double h0 = model.h(w);
    const double g0 = model.sup_g_row(w);
    if (h0 <= 0.0) return 0.0;
    if (g0 <= 0.0) {
        double q = h0 / (h0 + lambda);
        return std::pow(q, K + 1) / (1.0 - q);
    }
    const double c = lambda / g0;
    if (c <= 1.0) return kInf;
    // walk the worst-case product forward, then close with the integral bound
    double t = 1.0;
    for (int i = 0; i < K; ++i) {
        double s = h0 + i * g0;
        t *= s / (s + lambda);
    }
    double tail = 0.0;
    long k = K;
    while (k < K + 2000000) {
        double s = h0 + double(k) * g0;
        t *= s / (s + lambda);
        ++k;
        tail += t;
        if (t < 1e-18 * (tail + 1.0)) break;
    }
    double remainder = t * (h0 + double(k) * g0 + lambda) / (g0 * (c - 1.0));
    return tail + remainder;
}

int companion_series_pick_k(const FitnessModel& model, double w, double lambda,
                   double tail_target) {
    for (int K = 8; K <= (1 << 20); K *= 2)
        if (companion_tail_bound(model, w, lambda, K) < tail_target) return K;
    throw CapError("companion_series_pick_k: no feasible truncation below cap");
}

CompanionSeriesResult companion_series_check(const FitnessModel& model, const WeightLaw& law,
                            double w, double lambda, int K, int n_samples,
                            Rng& rng) {
    GTilde gt(model, law);
    if (lambda < gt.sup() - 1e-12)
        throw PreconditionError("companion_series_check: lambda below sup of g~");
    CompanionSeriesResult res;
    res.rhs = safe_ratio(model.h(w), lambda - gt(w));
    res.tail_bound = companion_tail_bound(model, w, lambda, K);
    if (law.is_atomic()) {
        auto prods = companion_products_exact(model, law, w, lambda, K);
        double sum = 0.0;
        for (int k = 1; k <= K; ++k) sum += prods[static_cast<std::size_t>(k)];
        res.lhs_partial = sum;
        res.exact_path = true;
    } else {
        Welford acc;
        for (int s = 0; s < n_samples; ++s) {
            double fit = model.h(w);
            double prod = 1.0;
            double partial = 0.0;
            for (int k = 1; k <= K; ++k) {
                prod *= fit <= 0.0 ? 0.0 : fit / (fit + lambda);
                if (prod == 0.0) break;
                partial += prod;
                fit += model.g(w, law.sample(rng));
            }
            acc.add(partial);
        }
        res.lhs_partial = acc.mean;
        res.mc_std_error = acc.std_error();
    }
    res.gap = std::fabs(res.lhs_partial - res.rhs);
    return res;
}

double power_law_exponent(const FitnessModel& model, const WeightLaw& law, double w,
                          double lambda) {
    GTilde gt(model, law);
    double g = gt(w);
    if (g <= 0.0) return kInf;
    return 1.0 + lambda / g;
}

double growth_exponent(const FitnessModel& model, const WeightLaw& law, double w) {
    auto rep = classify_regime(model, law);
    GTilde gt(model, law);
    if (rep.regime == Regime::non_condensation)
        return gt(w) / malthusian(model, law);
    if (rep.regime == Regime::condensation) return gt(w) / gt.star();
    throw PreconditionError("growth exponent undefined at the regime boundary");
}

namespace {

// The exponential horizon is drawn by stratified inversion: the horizon's
// deep tail dominates the variance of the jump count (it is infinite for
// linearly growing rates), and one draw per equal-probability stratum
// removes the between-strata part while leaving the estimator unbiased.
CtOracleResult ct_run(const FitnessModel& model, const WeightLaw& law, double w,
                      double fixed_t, double exp_rate, int reps, Rng& rng) {
    Welford acc;
    for (int r = 0; r < reps; ++r) {
        double horizon;
        if (fixed_t > 0.0) {
            horizon = fixed_t;
        } else {
            double u = (static_cast<double>(r) + rng.uniform01()) / reps;
            horizon = -std::log1p(-u) / exp_rate;
        }
        double s = model.h(w);
        double tau = 0.0;
        long y = 0;
        while (s > 0.0) {
            tau += rng.exponential(s);
            if (tau > horizon) break;
            ++y;
            s += model.g(w, law.sample(rng));
        }
        acc.add(static_cast<double>(y));
    }
    // the i.i.d. formula overstates the error of the stratified estimator,
    // which keeps the +-3 sigma consumers conservative
    return {acc.mean, acc.std_error(), 0.0};
}

}  // namespace

CtOracleResult ct_oracle_fixed(const FitnessModel& model, const WeightLaw& law,
                               double w, double t, int reps, Rng& rng) {
    if (!(t > 0.0)) throw DomainError("ct_oracle_fixed: t must be > 0");
    auto res = ct_run(model, law, w, t, 0.0, reps, rng);
    GTilde gt(model, law);
    double g = gt(w);
    double h = model.h(w);
    res.predicted = g < 1e-12 ? h * t : (h / g) * std::expm1(g * t);
    return res;
}

CtOracleResult ct_oracle_exponential(const FitnessModel& model, const WeightLaw& law,
                                     double w, double lambda, int reps, Rng& rng) {
    GTilde gt(model, law);
    if (!(lambda > gt.sup()))
        throw PreconditionError("ct_oracle_exponential: rate must exceed sup of g~");
    auto res = ct_run(model, law, w, 0.0, lambda, reps, rng);
    res.predicted = safe_ratio(model.h(w), lambda - gt(w));
    return res;
}

}  // namespace pani
