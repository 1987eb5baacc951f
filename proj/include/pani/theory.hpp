#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pani/fitness.hpp"
#include "pani/rng.hpp"

namespace pani {

enum class Regime { non_condensation, condensation, boundary };

std::string regime_name(Regime r);

struct TheoryDiagnostics {
    int solver_iterations = 0;
    double solver_residual = 0.0;
    double quadrature_tol = 0.0;
    double boundary_tol = 0.0;
};

struct TheoryReport {
    Regime regime = Regime::boundary;
    double criterion_value = 0.0;  // +inf allowed
    std::optional<double> lambda_star;
    double g_tilde_star = 0.0;
    double condensate_mass = 0.0;
    TheoryDiagnostics diagnostics;
};

// Regime split on E[h(W)/(g~* - g~(W))]: below 1 the tree condenses, above 1
// (or divergent) it does not; within boundary_tol of 1 predictions are
// withheld.
TheoryReport classify_regime(const FitnessModel& model, const WeightLaw& law,
                             double boundary_tol = 1e-6);

// Root of E[h(W)/(lambda - g~(W))] = 1 above g~*. Requires the
// non-condensation regime.
double malthusian(const FitnessModel& model, const WeightLaw& law,
                  double tol = 1e-10, TheoryDiagnostics* diag = nullptr);

// classify + solve, fills lambda or condensate mass as the regime allows
TheoryReport full_report(const FitnessModel& model, const WeightLaw& law,
                         double boundary_tol = 1e-6, double solver_tol = 1e-10);

// E[h(W)/(lambda - g~(W)) 1_A(W)]
double psi_mass(const FitnessModel& model, const WeightLaw& law, const WeightSet& A,
                double lambda);

// limit of edge-pair counts over A x B, per unit time
double predicted_edge2(const FitnessModel& model, const WeightLaw& law,
                       const WeightSet& A, const WeightSet& B);

// 1 - psi mass of the full support at lambda = g~*; condensation regime only
double condensate_mass(const FitnessModel& model, const WeightLaw& law);

// Fitness trajectory of a weight-w vertex as i.i.d. children arrive.
struct CompanionPath {
    double w0 = 0.0;
    std::vector<double> values;  // S_0 .. S_k
};

CompanionPath companion_sample(const FitnessModel& model, const WeightLaw& law,
                               double w, int k, Rng& rng);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Monte-Carlo estimate of E[prod_{i<k} S_i(W0)/(S_i(W0)+lambda) 1_B(W0)]
McEstimate degree_limit_mc(const FitnessModel& model, const WeightLaw& law, int k,
                           const WeightSet& B, double lambda, int n_samples,
                           Rng& rng);

// Exact value of the same functional for atomic laws, by dynamic programming
// over the finitely many reachable fitness sums.
double degree_limit_exact(const FitnessModel& model, const WeightLaw& law, int k,
                          const WeightSet& B, double lambda);

// E[prod_{i<k} S_i(w)/(S_i(w)+lambda)] for fixed w and k = 0..k_max
std::vector<double> companion_products_exact(const FitnessModel& model,
                                             const WeightLaw& law, double w,
                                             double lambda, int k_max);

// bound on the sum of the product functional beyond K, from the worst-case
// linear-growth path S_i <= h(w) + i sup_y g(w,y)
double companion_tail_bound(const FitnessModel& model, double w, double lambda,
                            int K);

// smallest K (power-of-two search) whose tail bound is below target
int companion_series_pick_k(const FitnessModel& model, double w, double lambda,
                   double tail_target);

struct CompanionSeriesResult {
    double lhs_partial = 0.0;
    double tail_bound = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    double mc_std_error = 0.0;
    bool exact_path = false;
};

// Partial geometric-series identity for the companion process: the truncated
// sum plus its tail bound must bracket h(w)/(lambda - g~(w)).
CompanionSeriesResult companion_series_check(const FitnessModel& model, const WeightLaw& law,
                            double w, double lambda, int K, int n_samples,
                            Rng& rng);

// degree-law tail exponent 1 + lambda/g~(w); +inf in the geometric regime
double power_law_exponent(const FitnessModel& model, const WeightLaw& law, double w,
                          double lambda);

// g~(w)/lambda* resp. g~(w)/g~* depending on the regime
double growth_exponent(const FitnessModel& model, const WeightLaw& law, double w);

struct CtOracleResult {
    double mean_y = 0.0;
    double std_error = 0.0;
    double predicted = 0.0;
};

// jump process with rate equal to the companion fitness, run to a fixed
// horizon t; predicted mean is (h/g~)(e^{g~ t} - 1), h t in the g~ = 0 limit
CtOracleResult ct_oracle_fixed(const FitnessModel& model, const WeightLaw& law,
                               double w, double t, int reps, Rng& rng);

// same process run to an independent Exp(lambda) horizon; predicted mean is
// h(w)/(lambda - g~(w))
CtOracleResult ct_oracle_exponential(const FitnessModel& model, const WeightLaw& law,
                                     double w, double lambda, int reps, Rng& rng);

}  // namespace pani
