#pragma once

#include <functional>
#include <vector>

#include "pani/interval.hpp"
#include "pani/quadrature.hpp"
#include "pani/rng.hpp"

namespace pani {

enum class LawKind { atoms, uniform, beta_poly, piecewise_density };

// Weight distribution on [0, w*]. Immutable after construction; sampling
// takes an external stream, so instances are freely shared across workers.
class WeightLaw {
public:
    static WeightLaw atoms(std::vector<double> values, std::vector<double> probs);
    static WeightLaw uniform(double w_star);
    // density (alpha+1)(1-w)^alpha on [0,1]; alpha > -1
    static WeightLaw beta_poly(double alpha);
    // constant densities between consecutive breakpoints; breakpoints
    // ascending, starting at 0
    static WeightLaw piecewise(std::vector<double> breakpoints,
                               std::vector<double> densities);

    LawKind kind() const { return kind_; }
    double w_star() const { return w_star_; }
    bool is_atomic() const { return kind_ == LawKind::atoms; }

    double sample(Rng& rng) const;
    double cdf(double t) const;
    double density(double w) const;  // continuous kinds only

    // mu(A); A must lie within [0, w*]
    double measure(const WeightSet& A) const;
    double measure(const Interval& iv) const { return measure(WeightSet().add(iv)); }

    const std::vector<double>& atom_values() const { return values_; }
    const std::vector<double>& atom_probs() const { return probs_; }
    double alpha() const { return alpha_; }

    // segment boundaries between which the density is smooth
    std::vector<double> segments() const;

private:
    WeightLaw() = default;
    void validate_density() const;

    LawKind kind_ = LawKind::uniform;
    double w_star_ = 1.0;
    double alpha_ = 0.0;
    std::vector<double> values_, probs_, cum_;  // atoms
    std::vector<double> breaks_, dens_, seg_cum_;  // piecewise
};

struct ExpectOptions {
    double tol = 1e-9;           // target absolute accuracy
    double divergence_cap = 1e12;
};

// E[f(W)] for measurable f, nonnegative or bounded. Returns +inf when the
// monotone truncation toward the top of the support diverges past the cap.
// Throws QuadratureError for integrands that refuse to settle.
double expect(const WeightLaw& law, const std::function<double(double)>& f,
              const ExpectOptions& opts = {});

// E[f(W) 1_A(W)], integrating each interval of A separately so indicator
// edges never meet the quadrature.
double expect_over(const WeightLaw& law, const WeightSet& A,
                   const std::function<double(double)>& f,
                   const ExpectOptions& opts = {});

// Dyadic partition of [0, x] into 2^m cells, first closed, rest half-open.
struct DyadicPartition {
    int level = 0;
    double range = 1.0;

    int cell_count() const { return 1 << level; }

    Interval cell(int i) const;   // 0-based
    int locate(double v) const;   // 0-based; DomainError outside [0, range]
};

DyadicPartition dyadic_cells(int m, double x);

}  // namespace pani
