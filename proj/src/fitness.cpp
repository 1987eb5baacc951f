#include "pani/fitness.hpp"

#include <cmath>

#include "pani/errors.hpp"

namespace pani {

double Phi::operator()(double x) const {
    switch (kind) {
        case Kind::constant: return param;
        case Kind::identity: return x;
        case Kind::power: return std::pow(x, param);
    }
    return 0.0;
}

double Phi::sup(double w_star) const {
    switch (kind) {
        case Kind::constant: return param;
        case Kind::identity: return w_star;
        case Kind::power: return std::pow(w_star, param);
    }
    return 0.0;
}

double Phi::inverse(double y, double w_star) const {
    switch (kind) {
        case Kind::constant:
            throw UnsupportedFormError("constant shape has no inverse");
        case Kind::identity:
            return y;
        case Kind::power:
            return std::pow(y, 1.0 / param);
    }
    return 0.0;
    (void)w_star;
}

FitnessModel FitnessModel::constant(double c_g, double c_h) {
    if (c_g < 0.0 || c_h < 0.0) throw DomainError("constant: negative rate");
    FitnessModel m;
    m.form_ = Form::constant;
    m.c_g_ = c_g;
    m.c_h_ = c_h;
    m.g_max_ = c_g;
    m.h_max_ = c_h;
    return m;
}

FitnessModel FitnessModel::random_recursive(double c_h) {
    auto m = constant(0.0, c_h);
    m.form_ = Form::random_recursive;
    return m;
}

FitnessModel FitnessModel::classic_pa(double c) {
    auto m = constant(c, c);
    m.form_ = Form::classic_pa;
    return m;
}

FitnessModel FitnessModel::bianconi_barabasi(double w_star) {
    FitnessModel m;
    m.form_ = Form::bianconi_barabasi;
    m.w_star_ = w_star;
    m.phi1_ = Phi::identity();
    m.phi2_ = Phi::constant(1.0);
    m.h_ = Phi::identity();
    m.g_max_ = w_star;
    m.h_max_ = w_star;
    return m;
}

FitnessModel FitnessModel::additive(double w_star) {
    FitnessModel m;
    m.form_ = Form::additive;
    m.w_star_ = w_star;
    m.phi1_ = Phi::constant(1.0);
    m.phi2_ = Phi::constant(1.0);
    m.h_ = Phi::identity();
    m.g_max_ = 1.0;
    m.h_max_ = w_star;
    return m;
}

FitnessModel FitnessModel::product(Phi phi1, Phi phi2, Phi h, double w_star) {
    FitnessModel m;
    m.form_ = Form::product;
    m.w_star_ = w_star;
    m.phi1_ = phi1;
    m.phi2_ = phi2;
    m.h_ = h;
    m.g_max_ = phi1.sup(w_star) * phi2.sup(w_star);
    m.h_max_ = h.sup(w_star);
    return m;
}

FitnessModel FitnessModel::separable_sum(double alpha, double beta, Phi phi1,
                                         Phi phi2, Phi h, double w_star) {
    if (alpha < 0.0 || beta < 0.0) throw DomainError("separable_sum: negative weight");
    FitnessModel m;
    m.form_ = Form::separable_sum;
    m.w_star_ = w_star;
    m.alpha_ = alpha;
    m.beta_ = beta;
    m.phi1_ = phi1;
    m.phi2_ = phi2;
    m.h_ = h;
    m.g_max_ = alpha * phi1.sup(w_star) + beta * phi2.sup(w_star);
    m.h_max_ = h.sup(w_star);
    return m;
}

FitnessModel FitnessModel::table(Eigen::MatrixXd g, Eigen::VectorXd h,
                                 std::vector<double> atom_values) {
    const auto s = static_cast<Eigen::Index>(atom_values.size());
    if (g.rows() != s || g.cols() != s || h.size() != s)
        throw DomainError("table: dimensions must match the atom count");
    if (g.minCoeff() < 0.0 || h.minCoeff() < 0.0)
        throw DomainError("table: negative entries");
    FitnessModel m;
    m.form_ = Form::table;
    m.table_g_ = std::move(g);
    m.table_h_ = std::move(h);
    m.atom_values_ = std::move(atom_values);
    m.w_star_ = *std::max_element(m.atom_values_.begin(), m.atom_values_.end());
    m.g_max_ = m.table_g_.size() ? m.table_g_.maxCoeff() : 0.0;
    m.h_max_ = m.table_h_.size() ? m.table_h_.maxCoeff() : 0.0;
    return m;
}

FitnessModel FitnessModel::regularize(Regularization reg) {
    if (!reg.base) throw DomainError("regularize: missing base model");
    FitnessModel m;
    m.form_ = Form::regularized;
    m.w_star_ = reg.base->w_star_hint();
    m.g_max_ = reg.base->g_max();
    m.h_max_ = reg.base->h_max();
    m.reg_ = std::make_shared<Regularization>(std::move(reg));
    return m;
}

int FitnessModel::atom_index(double x) const {
    for (std::size_t i = 0; i < atom_values_.size(); ++i)
        if (std::fabs(atom_values_[i] - x) <= 1e-12 * (1.0 + std::fabs(x)))
            return static_cast<int>(i);
    throw DomainError("table form: value is not an atom of the paired law");
}

double FitnessModel::h(double x) const {
    switch (form_) {
        case Form::constant:
        case Form::random_recursive:
            return c_h_;
        case Form::classic_pa:
            return c_g_;
        case Form::bianconi_barabasi:
        case Form::additive:
            return x;
        case Form::product:
        case Form::separable_sum:
            return h_(x);
        case Form::table:
            return table_h_(atom_index(x));
        case Form::regularized:
            return reg_->base->h(x);
    }
    return 0.0;
}

double FitnessModel::g(double x, double y) const {
    switch (form_) {
        case Form::constant:
        case Form::classic_pa:
            return c_g_;
        case Form::random_recursive:
            return 0.0;
        case Form::bianconi_barabasi:
            return x;
        case Form::additive:
            return 1.0;
        case Form::product:
            return phi1_(x) * phi2_(y);
        case Form::separable_sum:
            return alpha_ * phi1_(x) + beta_ * phi2_(y);
        case Form::table:
            return table_g_(atom_index(x), atom_index(y));
        case Form::regularized: {
            const auto& r = *reg_;
            if (!r.m_eps.contains(x)) return r.base->g(x, y);
            double v = r.base->g(r.x_star, y);
            if (r.sign < 0) {
                double u = r.base->is_table()
                               ? r.u_atoms[static_cast<std::size_t>(r.base->atom_index(y))]
                               : r.u_phi(y);
                v = std::max(0.0, v - r.eps * u);
            }
            return v;
        }
    }
    return 0.0;
}

std::optional<std::pair<Phi, Phi>> FitnessModel::product_view() const {
    switch (form_) {
        case Form::constant:
        case Form::classic_pa:
            return std::make_pair(Phi::constant(c_g_), Phi::constant(1.0));
        case Form::random_recursive:
            return std::make_pair(Phi::constant(0.0), Phi::constant(1.0));
        case Form::bianconi_barabasi:
            return std::make_pair(Phi::identity(), Phi::constant(1.0));
        case Form::additive:
            return std::make_pair(Phi::constant(1.0), Phi::constant(1.0));
        case Form::product:
            return std::make_pair(phi1_, phi2_);
        default:
            return std::nullopt;
    }
}

double FitnessModel::phi1_sup() const {
    if (auto pv = product_view()) return pv->first.sup(w_star_);
    throw UnsupportedFormError("phi1_sup: no product decomposition");
}

double FitnessModel::sup_g_row(double x) const {
    switch (form_) {
        case Form::constant:
        case Form::classic_pa:
            return c_g_;
        case Form::random_recursive:
            return 0.0;
        case Form::bianconi_barabasi:
            return x;
        case Form::additive:
            return 1.0;
        case Form::product:
            return phi1_(x) * phi2_.sup(w_star_);
        case Form::separable_sum:
            return alpha_ * phi1_(x) + beta_ * phi2_.sup(w_star_);
        case Form::table:
            return table_g_.row(atom_index(x)).maxCoeff();
        case Form::regularized: {
            const auto& r = *reg_;
            if (!r.m_eps.contains(x)) return r.base->sup_g_row(x);
            if (r.sign > 0) return r.base->sup_g_row(r.x_star);
            if (r.base->is_table()) {
                int is = r.base->atom_index(r.x_star);
                double best = 0.0;
                for (Eigen::Index j = 0; j < r.base->table_g().cols(); ++j)
                    best = std::max(best, std::max(0.0, r.base->table_g()(is, j) -
                                                            r.eps * r.u_atoms[j]));
                return best;
            }
            auto pv = r.base->product_view();
            double f1 = std::max(0.0, pv->first(r.x_star) - r.eps);
            return f1 * pv->second.sup(w_star_);
        }
    }
    return 0.0;
}

double FitnessModel::sup_g_col(double y) const {
    switch (form_) {
        case Form::constant:
        case Form::classic_pa:
            return c_g_;
        case Form::random_recursive:
            return 0.0;
        case Form::bianconi_barabasi:
            return w_star_;
        case Form::additive:
            return 1.0;
        case Form::product:
            return phi1_.sup(w_star_) * phi2_(y);
        case Form::separable_sum:
            return alpha_ * phi1_.sup(w_star_) + beta_ * phi2_(y);
        case Form::table:
            return table_g_.col(atom_index(y)).maxCoeff();
        case Form::regularized: {
            // rows on m_eps never exceed the base row at x_star
            return reg_->base->sup_g_col(y);
        }
    }
    return 0.0;
}

double FitnessModel::c2_bound() const {
    switch (form_) {
        case Form::product:
        case Form::separable_sum:
        case Form::bianconi_barabasi:
        case Form::additive:
            return std::max(phi1_.sup(w_star_), phi2_.sup(w_star_));
        case Form::constant:
        case Form::classic_pa:
            return c_g_;
        case Form::random_recursive:
            return 0.0;
        case Form::table:
            return g_max_;
        case Form::regularized:
            return reg_->base->c2_bound();
    }
    return 0.0;
}

void FitnessModel::validate(const WeightLaw& law, int probes) const {
    Rng rng(0x5eedf17ull);
    bool h_positive = false;
    if (law.is_atomic()) {
        const auto& vals = law.atom_values();
        const auto& ps = law.atom_probs();
        for (std::size_t i = 0; i < vals.size(); ++i)
            if (ps[i] > 0.0 && h(vals[i]) > 0.0) h_positive = true;
        for (double x : vals) {
            double hx = h(x);
            if (hx < 0.0 || hx > h_max_ * (1.0 + 1e-12))
                throw DomainError("h out of [0, h_max]");
            for (double y : vals) {
                double gx = g(x, y);
                if (gx < 0.0 || gx > g_max_ * (1.0 + 1e-12))
                    throw DomainError("g out of [0, g_max]");
            }
        }
    } else {
        for (int i = 0; i < probes; ++i) {
            double x = law.sample(rng);
            double y = law.sample(rng);
            double hx = h(x);
            double gx = g(x, y);
            if (hx < 0.0 || hx > h_max_ * (1.0 + 1e-12))
                throw DomainError("h out of [0, h_max]");
            if (gx < 0.0 || gx > g_max_ * (1.0 + 1e-12))
                throw DomainError("g out of [0, g_max]");
            if (hx > 0.0) h_positive = true;
        }
    }
    if (!h_positive)
        throw DegenerateLawError("mu({h > 0}) appears to be zero for this law");
}

namespace {

double mean_phi2(const FitnessModel& model, const WeightLaw& law) {
    Phi phi2;
    if (auto pv = model.product_view())
        phi2 = pv->second;
    else if (model.form() == Form::separable_sum)
        phi2 = model.phi2();
    else
        return 0.0;
    return phi2.is_constant() ? phi2.param
                              : expect(law, [phi2](double w) { return phi2(w); });
}

// g~ for the base model of a regularized overlay, with E[phi2] precomputed
double base_gtilde(const FitnessModel& base, const WeightLaw& law, double x,
                   double e_phi2) {
    switch (base.form()) {
        case Form::constant:
        case Form::classic_pa:
            return base.param_cg();
        case Form::random_recursive:
            return 0.0;
        case Form::bianconi_barabasi:
            return x;
        case Form::additive:
            return 1.0;
        case Form::product:
            return base.phi1()(x) * e_phi2;
        case Form::table:
            return g_tilde(base, law, x);
        default:
            throw UnsupportedFormError("regularized overlay on unsupported base form");
    }
}

}  // namespace

double g_tilde(const FitnessModel& model, const WeightLaw& law, double x) {
    switch (model.form()) {
        case Form::constant:
        case Form::classic_pa:
            return model.param_cg();
        case Form::random_recursive:
            return 0.0;
        case Form::bianconi_barabasi:
            return x;
        case Form::additive:
            return 1.0;
        case Form::product:
            return model.phi1()(x) * mean_phi2(model, law);
        case Form::separable_sum:
            return model.param_alpha() * model.phi1()(x) +
                   model.param_beta() * mean_phi2(model, law);
        case Form::table: {
            int i = model.atom_index(x);
            const auto& ps = law.atom_probs();
            double s = 0.0;
            for (std::size_t j = 0; j < ps.size(); ++j)
                s += ps[j] * model.table_g()(i, static_cast<Eigen::Index>(j));
            return s;
        }
        case Form::regularized: {
            GTilde gt(model, law);
            return gt(x);
        }
    }
    return 0.0;
}

double g_tilde_star(const FitnessModel& model, const WeightLaw& law) {
    switch (model.form()) {
        case Form::constant:
        case Form::classic_pa:
            return model.param_cg();
        case Form::random_recursive:
            return 0.0;
        case Form::bianconi_barabasi:
            return law.w_star();
        case Form::additive:
            return 1.0;
        case Form::product:
            return model.phi1().sup(law.w_star()) * mean_phi2(model, law);
        case Form::separable_sum:
            return model.param_alpha() * model.phi1().sup(law.w_star()) +
                   model.param_beta() * mean_phi2(model, law);
        case Form::table: {
            const auto& ps = law.atom_probs();
            double s = 0.0;
            for (std::size_t j = 0; j < ps.size(); ++j)
                s += ps[j] *
                     model.table_g().col(static_cast<Eigen::Index>(j)).maxCoeff();
            return s;
        }
        case Form::regularized: {
            // sup_x of the regularized row is attained on m_eps
            const auto& r = model.regularization();
            return expect(law, [&](double y) {
                return model.g(r.x_star, y);
            });
        }
    }
    return 0.0;
}

double g_tilde_sup(const FitnessModel& model, const WeightLaw& law) {
    GTilde gt(model, law);
    return gt.sup();
}

GTilde::GTilde(const FitnessModel& model, const WeightLaw& law)
    : model_(&model), law_(&law) {
    switch (model.form()) {
        case Form::product:
        case Form::separable_sum:
            e_phi2_ = mean_phi2(model, law);
            break;
        case Form::regularized: {
            const auto& base = *model.regularization().base;
            if (base.form() == Form::product || base.form() == Form::separable_sum ||
                base.form() == Form::bianconi_barabasi || base.form() == Form::additive)
                base_e_phi2_ = mean_phi2(base, law);
            break;
        }
        default:
            break;
    }
    star_ = g_tilde_star(model, law);
    // sup_x g~(x): the canonical row shapes are nondecreasing so the sup sits
    // at the top of the support; tables take a max over atoms
    if (model.form() == Form::table ||
        (model.form() == Form::regularized &&
         model.regularization().base->is_table())) {
        const auto& atoms = model.form() == Form::table
                                ? model.table_atoms()
                                : model.regularization().base->table_atoms();
        sup_ = 0.0;
        for (double a : atoms) sup_ = std::max(sup_, (*this)(a));
    } else if (model.form() == Form::regularized) {
        sup_ = (*this)(model.regularization().x_star);
    } else {
        sup_ = (*this)(law.w_star());
    }
}

double GTilde::operator()(double x) const {
    const auto& model = *model_;
    switch (model.form()) {
        case Form::constant:
        case Form::classic_pa:
            return model.param_cg();
        case Form::random_recursive:
            return 0.0;
        case Form::bianconi_barabasi:
            return x;
        case Form::additive:
            return 1.0;
        case Form::product:
            return model.phi1()(x) * e_phi2_;
        case Form::separable_sum:
            return model.param_alpha() * model.phi1()(x) +
                   model.param_beta() * e_phi2_;
        case Form::table:
            return g_tilde(model, *law_, x);
        case Form::regularized: {
            const auto& r = model.regularization();
            const auto& base = *r.base;
            if (!r.m_eps.contains(x)) return base_gtilde(base, *law_, x, base_e_phi2_);
            if (base.is_table()) {
                int is = base.atom_index(r.x_star);
                const auto& ps = law_->atom_probs();
                double s = 0.0;
                for (std::size_t j = 0; j < ps.size(); ++j) {
                    double v = base.table_g()(is, static_cast<Eigen::Index>(j));
                    if (r.sign < 0) v = std::max(0.0, v - r.eps * r.u_atoms[j]);
                    s += ps[j] * v;
                }
                return s;
            }
            auto pv = base.product_view();
            double f1 = pv->first(r.x_star);
            if (r.sign < 0) f1 = std::max(0.0, f1 - r.eps);
            return f1 * base_e_phi2_;
        }
    }
    return 0.0;
}

DominatingStructure make_dominating(const FitnessModel& model, const WeightLaw& law) {
    DominatingStructure dom;
    if (model.is_table()) {
        const auto& G = model.table_g();
        const auto& atoms = model.table_atoms();
        const auto s = G.rows();
        dom.atomic = true;
        dom.r.assign(static_cast<std::size_t>(s), 0.0);
        dom.c.assign(static_cast<std::size_t>(s), 0.0);
        double gmax = G.size() ? G.maxCoeff() : 0.0;
        if (gmax == 0.0) {
            dom.x_star = atoms.back();
            dom.phi1_max = 0.0;
            return dom;
        }
        Eigen::Index imax = 0, jmax = 0;
        G.maxCoeff(&imax, &jmax);
        for (Eigen::Index j = 0; j < s; ++j)
            dom.c[static_cast<std::size_t>(j)] = G(imax, j) / gmax;
        for (Eigen::Index i = 0; i < s; ++i)
            dom.r[static_cast<std::size_t>(i)] = G(i, jmax) / dom.c[static_cast<std::size_t>(jmax)];
        for (Eigen::Index i = 0; i < s; ++i)
            for (Eigen::Index j = 0; j < s; ++j)
                if (std::fabs(G(i, j) - dom.r[static_cast<std::size_t>(i)] *
                                            dom.c[static_cast<std::size_t>(j)]) >
                    1e-12 * (1.0 + gmax))
                    throw UnsupportedFormError(
                        "table form is not rank-one; no dominating construction");
        dom.phi1_max = *std::max_element(dom.r.begin(), dom.r.end());
        dom.x_star = atoms[static_cast<std::size_t>(
            std::max_element(dom.r.begin(), dom.r.end()) - dom.r.begin())];
        return dom;
    }
    auto pv = model.product_view();
    if (!pv) throw UnsupportedFormError("dominating structure needs product or table form");
    dom.phi1 = pv->first;
    dom.u_phi = pv->second;
    dom.x_star = law.w_star();
    dom.phi1_max = pv->first.sup(law.w_star());
    return dom;
}

WeightSet m_epsilon(const DominatingStructure& dom, const FitnessModel& model,
                    double eps) {
    if (!(eps > 0.0)) throw DomainError("m_epsilon: eps must be > 0");
    if (dom.atomic) {
        WeightSet s;
        const auto& atoms = model.table_atoms();
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (dom.phi1_max - dom.r[i] < eps) s.add({atoms[i], atoms[i], false, false});
        return s;
    }
    double w_star = model.w_star_hint();
    double range = dom.phi1_max - dom.phi1(0.0);
    if (eps >= range || dom.phi1.is_constant()) return WeightSet::full(w_star);
    double t = dom.phi1.inverse(dom.phi1_max - eps, w_star);
    return WeightSet::interval(t, w_star, true, false);
}

}  // namespace pani
