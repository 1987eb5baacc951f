#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <vector>

#include "pani/interval.hpp"
#include "pani/weight_law.hpp"

namespace pani {

// Registered scalar shapes for the decomposition witnesses. All are
// nondecreasing on [0, w*] with a known maximum, which is what the
// form-directed sup computations rely on.
struct Phi {
    enum class Kind { constant, identity, power };
    Kind kind = Kind::identity;
    double param = 1.0;  // constant value, or the exponent for power

    static Phi constant(double c) { return {Kind::constant, c}; }
    static Phi identity() { return {Kind::identity, 1.0}; }
    static Phi power(double p) { return {Kind::power, p}; }

    double operator()(double x) const;
    double sup(double w_star) const;
    // preimage of a value under the (strictly increasing) shape
    double inverse(double y, double w_star) const;
    bool is_constant() const { return kind == Kind::constant; }
};

enum class Form {
    constant,
    random_recursive,
    classic_pa,
    bianconi_barabasi,
    additive,
    product,
    separable_sum,
    table,
    regularized
};

class FitnessModel;

// Regularization overlay: on m_eps the row of g is replaced by the row at
// x_star (plus sign) or by that row minus eps*u (minus sign, floored at 0).
struct Regularization {
    std::shared_ptr<const FitnessModel> base;
    WeightSet m_eps;
    double x_star = 1.0;
    double eps = 0.0;
    int sign = +1;
    Phi u_phi;                    // u_eps = eps * u_phi (product form)
    std::vector<double> u_atoms;  // per-atom u values (table form)
};

// The attachment-rule pair (g, h) with its structural form tag. Immutable
// and freely shared after construction.
class FitnessModel {
public:
    static FitnessModel constant(double c_g, double c_h);
    static FitnessModel random_recursive(double c_h = 1.0);
    static FitnessModel classic_pa(double c);
    static FitnessModel bianconi_barabasi(double w_star);
    static FitnessModel additive(double w_star);
    static FitnessModel product(Phi phi1, Phi phi2, Phi h, double w_star);
    static FitnessModel separable_sum(double alpha, double beta, Phi phi1, Phi phi2,
                                      Phi h, double w_star);
    // g keyed to atom indices of an atomic law
    static FitnessModel table(Eigen::MatrixXd g, Eigen::VectorXd h,
                              std::vector<double> atom_values);
    static FitnessModel regularize(Regularization reg);

    Form form() const { return form_; }
    double h(double x) const;
    double g(double x, double y) const;
    double h_max() const { return h_max_; }
    double g_max() const { return g_max_; }
    double w_star_hint() const { return w_star_; }

    // product decomposition g(x,y) = phi1(x) phi2(y) when the form has one
    std::optional<std::pair<Phi, Phi>> product_view() const;

    bool is_table() const { return form_ == Form::table; }
    const Eigen::MatrixXd& table_g() const { return table_g_; }
    const Eigen::VectorXd& table_h() const { return table_h_; }
    const std::vector<double>& table_atoms() const { return atom_values_; }
    int atom_index(double x) const;

    const Regularization& regularization() const { return *reg_; }

    double phi1_sup() const;            // sup of the g-row shape
    double sup_g_row(double x) const;   // sup_y g(x, y)
    double sup_g_col(double y) const;   // sup_x g(x, y)

    // C2 decomposition bound J (forms are built from their decomposition)
    double c2_bound() const;

    // probe check: h in [0, h_max], g in [0, g_max], mu({h > 0}) > 0
    void validate(const WeightLaw& law, int probes = 10000) const;

    Phi phi1() const { return phi1_; }
    Phi phi2() const { return phi2_; }
    Phi h_shape() const { return h_; }
    double param_cg() const { return c_g_; }
    double param_ch() const { return c_h_; }
    double param_alpha() const { return alpha_; }
    double param_beta() const { return beta_; }

private:
    FitnessModel() = default;

    Form form_ = Form::constant;
    double c_g_ = 1.0, c_h_ = 1.0;
    double alpha_ = 0.0, beta_ = 0.0;
    Phi phi1_, phi2_, h_;
    Eigen::MatrixXd table_g_;
    Eigen::VectorXd table_h_;
    std::vector<double> atom_values_;
    std::shared_ptr<const Regularization> reg_;
    double w_star_ = 1.0;
    double h_max_ = 0.0, g_max_ = 0.0;
};

// g~(x) = E[g(x, W)]
double g_tilde(const FitnessModel& model, const WeightLaw& law, double x);

// g~* = E[sup_x g(x, W)]; form-directed, exact for the canonical forms
double g_tilde_star(const FitnessModel& model, const WeightLaw& law);

// sup_x g~(x); the canonical shapes are nondecreasing so this is cheap
double g_tilde_sup(const FitnessModel& model, const WeightLaw& law);

// Precomputed g~ context for hot loops (caches E[phi2(W)]).
class GTilde {
public:
    GTilde(const FitnessModel& model, const WeightLaw& law);
    double operator()(double x) const;
    double star() const { return star_; }
    double sup() const { return sup_; }

private:
    const FitnessModel* model_;
    const WeightLaw* law_;
    double e_phi2_ = 0.0;  // E[phi2(W)] where applicable
    double star_ = 0.0;
    double sup_ = 0.0;
    double base_e_phi2_ = 0.0;  // for regularized overlays
};

// A generic point of the dominating set plus the machinery to build the
// nested neighbourhoods around it.
struct DominatingStructure {
    double x_star = 1.0;
    double phi1_max = 1.0;
    Phi phi1;     // row shape (product forms)
    Phi u_phi;    // u_eps = eps * u_phi
    bool atomic = false;
    std::vector<double> r;  // per-atom row factors (table forms)
    std::vector<double> c;  // per-atom column factors, max-normalized
};

DominatingStructure make_dominating(const FitnessModel& model, const WeightLaw& law);

// sublevel neighbourhood {x : phi1(x*) - phi1(x) < eps}
WeightSet m_epsilon(const DominatingStructure& dom, const FitnessModel& model,
                    double eps);

}  // namespace pani
