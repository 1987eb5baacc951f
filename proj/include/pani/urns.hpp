#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <vector>

#include "pani/fitness.hpp"
#include "pani/rng.hpp"
#include "pani/theory.hpp"

namespace pani {

// Finite cell structure approximating (g, h) from below and above. Atomic
// laws discretize exactly; product/separable forms use the dyadic preimage
// cells with interval bounds taken over the closed dyadic boxes.
struct DiscretizedModel {
    int level = 0;  // dyadic level m (0 for atomic-exact)
    bool atomic = false;
    std::vector<Interval> cells;      // partition of [0, w*]
    std::vector<double> cell_point;   // representative (atom or midpoint)
    Eigen::VectorXd p;                // mu(cell)
    Eigen::MatrixXd g_min, g_max;     // envelope bounds per cell pair
    Eigen::VectorXd h_min, h_max;
    Eigen::VectorXd g_tilde_minus, g_tilde_plus;
    Eigen::VectorXd g_star;           // per head-cell column max of g_max
    double g_tilde_plus_star = 0.0;   // sum_j p_j g_star(j)

    int dim() const { return static_cast<int>(p.size()); }
    int locate(double w) const;       // cell index containing w
};

DiscretizedModel discretize(const FitnessModel& model, const WeightLaw& law, int m);

// Generalized multitype urn in expectation form: replacement(x', x) is the
// activity-weighted expected count of x' added per draw of x.
struct UrnSpec {
    enum class Family { edge, degree };
    Family family = Family::edge;
    int d = 0;         // live cell count
    int k_prime = 0;   // tuple cap (degree urn)
    std::vector<std::vector<int>> types;  // overflow head stored as d
    Eigen::VectorXd activity;
    Eigen::VectorXd gamma;
    Eigen::MatrixXd replacement;
    std::vector<int> r_class, u1_class, u2_class;
    DiscretizedModel disc;

    int type_count() const { return static_cast<int>(types.size()); }
    bool is_overflow(int t) const { return types[static_cast<std::size_t>(t)][0] == d; }
    int singleton_id(int cell) const { return cell; }
    int find_type(const std::vector<int>& tuple) const;

    std::map<std::vector<int>, int> type_index;
};

UrnSpec build_urn_e(const DiscretizedModel& disc);
UrnSpec build_urn_d(const DiscretizedModel& disc, int k_prime);

struct EigResult {
    double lambda = 0.0;
    Eigen::VectorXd v;       // a.v = 1, U2 coordinates zero
    double residual = 0.0;   // max |(Mv - lambda v)| over live coordinates
    int iterations = 0;
};

// Leading eigen pair by shifted power iteration on the live class, extended
// to the zero-activity class by the block formula.
EigResult leading_eig(const UrnSpec& urn, double tol = 1e-13);

struct UrnEReport {
    double lambda = 0.0;
    double residual_singleton = 0.0;  // against p_l / lambda
    double residual_pair = 0.0;       // against the closed pair formula
    double b_m = 0.0;
    double e_m = 0.0;
    double residual_overflow_balance = 0.0;  // |B - g~+* /(lambda - g~+*) E|
};

UrnEReport check_urn_e_formulas(const UrnSpec& urn, const EigResult& eig);

struct UrnDReport {
    double lambda = 0.0;
    double residual_closed_form = 0.0;  // entrywise vs the tuple product formula
    double r_k = 0.0;
    double e_k = 0.0;
    double f_k = 0.0;
    double residual_overflow_balance = 0.0;  // |R - (E+F)/(lambda - g~+*)|
    double residual_degree_functional = 0.0; // marginal sums vs companion DP
};

UrnDReport check_urn_d_formulas(const UrnSpec& urn, const EigResult& eig);

// E[prod_{i<k} S^-_i(W)/(S^-_i(W)+lambda) 1_{cell}] for the lower companion
// process driven by the cell envelopes
double urn_d_degree_functional(const DiscretizedModel& disc, int cell, int k,
                               double lambda);

// Discrete urn simulation honoring the randomized replacement rule; the
// gamma split is realized by an auxiliary uniform.
class UrnSim {
public:
    UrnSim(const UrnSpec& urn, Rng& rng);
    void step(Rng& rng);
    const std::vector<std::int64_t>& composition() const { return counts_; }
    std::int64_t total_balls() const { return ball_count_; }
    std::int64_t steps() const { return steps_; }

private:
    const UrnSpec* urn_;
    std::vector<std::int64_t> counts_;
    double total_activity_ = 0.0;
    std::int64_t ball_count_ = 0;
    std::int64_t steps_ = 0;
};

// X_n / n after n draws
Eigen::VectorXd simulate_urn(const UrnSpec& urn, std::int64_t n, Rng& rng);

}  // namespace pani
