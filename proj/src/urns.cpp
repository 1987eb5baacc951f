#include "pani/urns.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "pani/errors.hpp"

namespace pani {

namespace {

constexpr double kTypeCapE = 2e5;   // matrix-free spectral work stays tractable
constexpr double kTypeCapD = 1e5;
constexpr int kDenseCap = 4096;     // dense replacement matrix kept below this

// kappa bounds over the closed dyadic box indexed by (i1, i2)
struct BoxBounds {
    double lo1, hi1, lo2, hi2;
};

}  // namespace

int DiscretizedModel::locate(double w) const {
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].contains(w)) return static_cast<int>(i);
    if (atomic) {
        for (std::size_t i = 0; i < cell_point.size(); ++i)
            if (std::fabs(cell_point[i] - w) <= 1e-12 * (1.0 + std::fabs(w)))
                return static_cast<int>(i);
    }
    throw DomainError("discretized model: weight outside every cell");
}

DiscretizedModel discretize(const FitnessModel& model, const WeightLaw& law, int m) {
    if (m < 0) throw DomainError("discretize: level must be >= 0");
    DiscretizedModel disc;
    disc.level = m;

    if (law.is_atomic()) {
        disc.atomic = true;
        const auto& vals = law.atom_values();
        const auto& probs = law.atom_probs();
        const int d = static_cast<int>(vals.size());
        disc.p = Eigen::VectorXd::Zero(d);
        disc.g_min.resize(d, d);
        disc.g_max.resize(d, d);
        disc.h_min.resize(d);
        disc.h_max.resize(d);
        for (int i = 0; i < d; ++i) {
            disc.cells.push_back({vals[static_cast<std::size_t>(i)],
                                  vals[static_cast<std::size_t>(i)], false, false});
            disc.cell_point.push_back(vals[static_cast<std::size_t>(i)]);
            disc.p[i] = probs[static_cast<std::size_t>(i)];
            double hv = model.h(vals[static_cast<std::size_t>(i)]);
            disc.h_min[i] = hv;
            disc.h_max[i] = hv;
            for (int j = 0; j < d; ++j) {
                double gv = model.g(vals[static_cast<std::size_t>(i)],
                                    vals[static_cast<std::size_t>(j)]);
                disc.g_min(i, j) = gv;
                disc.g_max(i, j) = gv;
            }
        }
    } else {
        const bool separable = model.form() == Form::separable_sum;
        auto pv = model.product_view();
        if (!pv && !separable)
            throw UnsupportedFormError(
                "discretize: continuous laws need a product or separable form");
        if (m > 8) throw CapError("discretize: level beyond the cell-count guard");

        Phi phi1 = pv ? pv->first : model.phi1();
        Phi phi2 = pv ? pv->second : model.phi2();
        const double w_star = law.w_star();
        const double h_bound = model.h_max();
        const double j_bound = std::max({phi1.sup(w_star), phi2.sup(w_star), 1e-300});

        // gather preimage breakpoints of the dyadic range cells
        std::vector<double> cuts{0.0, w_star};
        auto add_preimages = [&](const Phi& f, double bound) {
            if (f.is_constant()) return;
            for (int i = 1; i < (1 << m); ++i) {
                double y = std::ldexp(bound, -m) * i;
                if (y >= f(0.0) && y <= f(w_star)) {
                    double x = f.inverse(y, w_star);
                    if (x > 0.0 && x < w_star) cuts.push_back(x);
                }
            }
        };
        auto h_shape = model.h_shape();
        if (model.form() == Form::bianconi_barabasi || model.form() == Form::additive)
            h_shape = Phi::identity();
        add_preimages(h_shape, h_bound);
        add_preimages(phi1, j_bound);
        add_preimages(phi2, j_bound);
        for (int i = 1; i < (1 << m); ++i) cuts.push_back(std::ldexp(w_star, -m) * i);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(),
                               [&](double a, double b) {
                                   return std::fabs(a - b) <= 1e-12 * (1.0 + w_star);
                               }),
                   cuts.end());
        if (cuts.size() - 1 > 10000) throw CapError("discretize: cell count beyond 1e4");

        const int d = static_cast<int>(cuts.size()) - 1;
        auto hgrid = dyadic_cells(m, h_bound);
        auto jgrid = dyadic_cells(m, j_bound);
        std::vector<int> ih(static_cast<std::size_t>(d)), i1(static_cast<std::size_t>(d)),
            i2(static_cast<std::size_t>(d));
        disc.p = Eigen::VectorXd::Zero(d);
        for (int c = 0; c < d; ++c) {
            Interval cell{cuts[static_cast<std::size_t>(c)],
                          cuts[static_cast<std::size_t>(c) + 1], c > 0, false};
            disc.cells.push_back(cell);
            double mid = 0.5 * (cell.lo + cell.hi);
            disc.cell_point.push_back(mid);
            disc.p[c] = law.measure(WeightSet().add(cell));
            ih[static_cast<std::size_t>(c)] = hgrid.locate(std::min(model.h(mid), h_bound));
            i1[static_cast<std::size_t>(c)] = jgrid.locate(std::min(phi1(mid), j_bound));
            i2[static_cast<std::size_t>(c)] = jgrid.locate(std::min(phi2(mid), j_bound));
        }
        disc.g_min.resize(d, d);
        disc.g_max.resize(d, d);
        disc.h_min.resize(d);
        disc.h_max.resize(d);
        const double hw = std::ldexp(h_bound, -m);
        const double jw = std::ldexp(j_bound, -m);
        for (int a = 0; a < d; ++a) {
            disc.h_min[a] = hw * ih[static_cast<std::size_t>(a)];
            disc.h_max[a] = hw * (ih[static_cast<std::size_t>(a)] + 1);
            double lo1 = jw * i1[static_cast<std::size_t>(a)];
            double hi1 = lo1 + jw;
            for (int b = 0; b < d; ++b) {
                double lo2 = jw * i2[static_cast<std::size_t>(b)];
                double hi2 = lo2 + jw;
                if (separable) {
                    disc.g_min(a, b) =
                        model.param_alpha() * lo1 + model.param_beta() * lo2;
                    disc.g_max(a, b) =
                        model.param_alpha() * hi1 + model.param_beta() * hi2;
                } else {
                    disc.g_min(a, b) = lo1 * lo2;
                    disc.g_max(a, b) = hi1 * hi2;
                }
            }
        }
    }

    const int d = disc.dim();
    disc.g_tilde_minus = disc.g_min * disc.p;
    disc.g_tilde_plus = disc.g_max * disc.p;
    disc.g_star = disc.g_max.colwise().maxCoeff();
    disc.g_tilde_plus_star = disc.g_star.dot(disc.p);
    (void)d;
    return disc;
}

int UrnSpec::find_type(const std::vector<int>& tuple) const {
    auto it = type_index.find(tuple);
    if (it == type_index.end()) throw DomainError("urn: no such type");
    return it->second;
}

namespace {

void index_types(UrnSpec& urn) {
    for (int t = 0; t < urn.type_count(); ++t)
        urn.type_index[urn.types[static_cast<std::size_t>(t)]] = t;
}

}  // namespace

namespace {

void fill_dense(UrnSpec& urn) {
    const int T = urn.type_count();
    if (T > kDenseCap) return;
    const int d = urn.d;
    auto& M = urn.replacement;
    M = Eigen::MatrixXd::Zero(T, T);
    for (int x = 0; x < T; ++x) {
        double a = urn.activity[x];
        if (a <= 0.0) continue;
        double ga = urn.gamma[x] * a;
        const auto& tup = urn.types[static_cast<std::size_t>(x)];
        for (int l = 0; l < d; ++l) {
            double pl = urn.disc.p[l];
            if (pl <= 0.0) continue;
            M(l, x) += a * pl;  // new singleton
            if (urn.family == UrnSpec::Family::edge) {
                int head = tup[0];
                if (head < d && ga > 0.0)
                    M(d + head * d + l, x) += ga * pl;
                M(d + d * d + l, x) += (a - ga) * pl;
            } else {
                if (ga > 0.0) {
                    auto child = tup;
                    child.push_back(l);
                    M(urn.find_type(child), x) += ga * pl;
                }
                M(urn.find_type({d, l}), x) += (a - ga) * pl;
            }
        }
        if (urn.family == UrnSpec::Family::degree && ga > 0.0) M(x, x) -= ga;
    }
}

// reachability from the seed singletons over positive replacement entries;
// types with positive activity form the live class
void classify(UrnSpec& urn) {
    const int T = urn.type_count();
    const int d = urn.d;
    std::vector<char> reach(static_cast<std::size_t>(T), 0);
    std::queue<int> bfs;
    bool have_seed = false;
    for (int l = 0; l < d; ++l)
        if (urn.disc.p[l] > 0.0 && urn.activity[l] > 0.0) {
            reach[static_cast<std::size_t>(l)] = 1;
            bfs.push(l);
            have_seed = true;
        }
    if (!have_seed) throw SpectralError("urn: no seed type with positive mass and activity");

    auto push = [&](int t) {
        if (!reach[static_cast<std::size_t>(t)]) {
            reach[static_cast<std::size_t>(t)] = 1;
            bfs.push(t);
        }
    };
    while (!bfs.empty()) {
        int x = bfs.front();
        bfs.pop();
        double a = urn.activity[x];
        if (a <= 0.0) continue;
        double ga = urn.gamma[x] * a;
        const auto& tup = urn.types[static_cast<std::size_t>(x)];
        for (int l = 0; l < d; ++l) {
            if (urn.disc.p[l] <= 0.0) continue;
            push(l);
            if (urn.family == UrnSpec::Family::edge) {
                if (tup[0] < d && ga > 0.0) push(d + tup[0] * d + l);
                if (a - ga > 0.0) push(d + d * d + l);
            } else {
                if (ga > 0.0) {
                    auto child = tup;
                    child.push_back(l);
                    push(urn.find_type(child));
                }
                if (a - ga > 0.0) push(urn.find_type({d, l}));
            }
        }
    }
    for (int t = 0; t < T; ++t) {
        if (!reach[static_cast<std::size_t>(t)])
            urn.u2_class.push_back(t);
        else if (urn.activity[t] > 0.0)
            urn.r_class.push_back(t);
        else
            urn.u1_class.push_back(t);
    }
    // irreducibility of the live class: every live type feeds some seed
    // singleton directly, and the seeds reach everything by construction
    bool seed_ok = false;
    for (int l = 0; l < d; ++l)
        if (urn.disc.p[l] > 0.0 && urn.activity[l] > 0.0) seed_ok = true;
    if (!seed_ok || urn.r_class.empty())
        throw SpectralError("urn: live class is not irreducible");
}

}  // namespace

UrnSpec build_urn_e(const DiscretizedModel& disc) {
    const int d = disc.dim();
    if (static_cast<double>(d) * d + 2.0 * d > kTypeCapE)
        throw CapError("urn E: type count beyond cap");
    UrnSpec urn;
    urn.family = UrnSpec::Family::edge;
    urn.d = d;
    urn.disc = disc;
    const int T = d + d * d + d;
    urn.types.reserve(static_cast<std::size_t>(T));
    urn.activity = Eigen::VectorXd::Zero(T);
    urn.gamma = Eigen::VectorXd::Zero(T);
    for (int i = 0; i < d; ++i) {
        urn.types.push_back({i});
        urn.activity[i] = disc.h_max[i];
        urn.gamma[i] = disc.h_max[i] > 0.0 ? disc.h_min[i] / disc.h_max[i] : 0.0;
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            urn.types.push_back({i, j});
            int t = d + i * d + j;
            urn.activity[t] = disc.g_max(i, j);
            urn.gamma[t] =
                disc.g_max(i, j) > 0.0 ? disc.g_min(i, j) / disc.g_max(i, j) : 0.0;
        }
    for (int j = 0; j < d; ++j) {
        urn.types.push_back({d, j});
        urn.activity[d + d * d + j] = disc.g_star[j];
        urn.gamma[d + d * d + j] = 0.0;
    }
    index_types(urn);
    classify(urn);
    fill_dense(urn);
    return urn;
}

UrnSpec build_urn_d(const DiscretizedModel& disc, int k_prime) {
    const int d = disc.dim();
    if (k_prime < 1) throw DomainError("urn D: k_prime must be >= 1");
    double estimate = std::pow(static_cast<double>(d), k_prime + 1) * (k_prime + 2);
    if (estimate > kTypeCapD) throw CapError("urn D: type count beyond cap");

    UrnSpec urn;
    urn.family = UrnSpec::Family::degree;
    urn.d = d;
    urn.k_prime = k_prime;
    urn.disc = disc;

    // tuples of dimension 1..k_prime+1, then the overflow pairs
    std::vector<std::vector<int>> level{{}};
    for (int dim = 1; dim <= k_prime + 1; ++dim) {
        std::vector<std::vector<int>> next;
        for (const auto& base : level)
            for (int l = 0; l < d; ++l) {
                auto t = base;
                t.push_back(l);
                next.push_back(t);
                urn.types.push_back(next.back());
            }
        level = std::move(next);
    }
    for (int j = 0; j < d; ++j) urn.types.push_back({d, j});

    const int T = urn.type_count();
    urn.activity = Eigen::VectorXd::Zero(T);
    urn.gamma = Eigen::VectorXd::Zero(T);
    for (int t = 0; t < T; ++t) {
        const auto& tup = urn.types[static_cast<std::size_t>(t)];
        if (tup[0] == d) {  // overflow
            urn.activity[t] = disc.g_star[tup[1]];
            urn.gamma[t] = 0.0;
            continue;
        }
        double amax = disc.h_max[tup[0]];
        double amin = disc.h_min[tup[0]];
        for (std::size_t j = 1; j < tup.size(); ++j) {
            amax += disc.g_max(tup[0], tup[j]);
            amin += disc.g_min(tup[0], tup[j]);
        }
        urn.activity[t] = amax;
        bool frozen = static_cast<int>(tup.size()) == k_prime + 1;
        urn.gamma[t] = (!frozen && amax > 0.0) ? amin / amax : 0.0;
    }
    index_types(urn);
    classify(urn);
    fill_dense(urn);
    return urn;
}

namespace {

// matrix-free application of the expected replacement matrix
void apply_urn(const UrnSpec& urn, const Eigen::VectorXd& v, Eigen::VectorXd& out,
               const std::vector<int>& parent_of) {
    const int T = urn.type_count();
    const int d = urn.d;
    double s_a = 0.0, s_over = 0.0;
    out.setZero();
    if (urn.family == UrnSpec::Family::edge) {
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
        for (int x = 0; x < T; ++x) {
            double a = urn.activity[x];
            if (a == 0.0) continue;
            double ga = urn.gamma[x] * a;
            s_a += a * v[x];
            s_over += (a - ga) * v[x];
            int head = urn.types[static_cast<std::size_t>(x)][0];
            if (head < d) theta[head] += ga * v[x];
        }
        for (int l = 0; l < d; ++l) {
            double pl = urn.disc.p[l];
            if (pl <= 0.0) continue;
            out[l] = pl * s_a;
            for (int i = 0; i < d; ++i) out[d + i * d + l] = pl * theta[i];
            out[d + d * d + l] = pl * s_over;
        }
    } else {
        for (int x = 0; x < T; ++x) {
            double a = urn.activity[x];
            if (a == 0.0) continue;
            double ga = urn.gamma[x] * a;
            s_a += a * v[x];
            s_over += (a - ga) * v[x];
        }
        for (int x = 0; x < T; ++x) {
            const auto& tup = urn.types[static_cast<std::size_t>(x)];
            if (tup[0] == d) {  // overflow rows
                double pl = urn.disc.p[tup[1]];
                out[x] = pl * s_over;
                continue;
            }
            double acc = 0.0;
            if (tup.size() == 1) {
                acc = urn.disc.p[tup[0]] * s_a;
            } else {
                int par = parent_of[static_cast<std::size_t>(x)];
                acc = urn.disc.p[tup.back()] * urn.gamma[par] * urn.activity[par] *
                      v[par];
            }
            acc -= urn.gamma[x] * urn.activity[x] * v[x];
            out[x] = acc;
        }
    }
}

std::vector<int> build_parents(const UrnSpec& urn) {
    std::vector<int> parent_of(static_cast<std::size_t>(urn.type_count()), -1);
    if (urn.family != UrnSpec::Family::degree) return parent_of;
    std::map<std::vector<int>, int> index;
    for (int t = 0; t < urn.type_count(); ++t)
        index[urn.types[static_cast<std::size_t>(t)]] = t;
    for (int t = 0; t < urn.type_count(); ++t) {
        const auto& tup = urn.types[static_cast<std::size_t>(t)];
        if (tup[0] == urn.d || tup.size() < 2) continue;
        auto par = tup;
        par.pop_back();
        parent_of[static_cast<std::size_t>(t)] = index.at(par);
    }
    return parent_of;
}

}  // namespace

EigResult leading_eig(const UrnSpec& urn, double tol) {
    const int T = urn.type_count();
    auto parent_of = build_parents(urn);

    double shift = 1.0;
    for (int t = 0; t < T; ++t)
        shift = std::max(shift, 1.0 + urn.gamma[t] * urn.activity[t]);

    Eigen::VectorXd v = Eigen::VectorXd::Zero(T);
    for (int t : urn.r_class) v[t] = 1.0;
    v /= v.sum();

    Eigen::VectorXd mv(T), shifted(T);
    double lambda = 0.0;
    int it = 0;
    const int max_iter = 100000;
    for (; it < max_iter; ++it) {
        apply_urn(urn, v, mv, parent_of);
        shifted = mv + shift * v;
        double norm = shifted.lpNorm<1>();
        if (!(norm > 0.0)) throw SpectralError("urn: power iteration lost all mass");
        shifted /= norm;
        // Rayleigh estimate and residual on the unshifted matrix
        double num = v.dot(mv), den = v.dot(v);
        lambda = num / den;
        double resid = (mv - lambda * v).lpNorm<Eigen::Infinity>() /
                       v.lpNorm<Eigen::Infinity>();
        v = shifted;
        if (resid < tol && it > 4) break;
    }
    if (it >= max_iter) throw SpectralError("urn: power iteration did not converge");

    apply_urn(urn, v, mv, parent_of);
    lambda = v.dot(mv) / v.dot(v);
    // a.v = 1 normalization
    double av = urn.activity.dot(v);
    if (!(av > 0.0)) throw SpectralError("urn: eigenvector has no active mass");
    v /= av;

    EigResult res;
    res.lambda = lambda;
    res.v = v;
    res.iterations = it;
    apply_urn(urn, v, mv, parent_of);
    res.residual = (mv - lambda * v).lpNorm<Eigen::Infinity>();
    return res;
}

UrnEReport check_urn_e_formulas(const UrnSpec& urn, const EigResult& eig) {
    const int d = urn.d;
    const auto& disc = urn.disc;
    UrnEReport rep;
    rep.lambda = eig.lambda;
    for (int l = 0; l < d; ++l)
        rep.residual_singleton = std::max(
            rep.residual_singleton, std::fabs(eig.lambda * eig.v[l] - disc.p[l]));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double expected = disc.p[j] * disc.p[i] * disc.h_min[i] /
                              (eig.lambda - disc.g_tilde_minus[i]);
            double got = eig.lambda * eig.v[d + i * d + j];
            rep.residual_pair = std::max(rep.residual_pair, std::fabs(got - expected));
        }
    for (int l = 0; l < d; ++l) rep.b_m += disc.g_star[l] * eig.v[d + d * d + l];
    for (int i = 0; i < d; ++i) {
        rep.e_m += (disc.h_max[i] - disc.h_min[i]) * eig.v[i];
        for (int l = 0; l < d; ++l)
            rep.e_m += (disc.g_max(i, l) - disc.g_min(i, l)) * eig.v[d + i * d + l];
    }
    rep.residual_overflow_balance =
        std::fabs(rep.b_m - disc.g_tilde_plus_star /
                                (eig.lambda - disc.g_tilde_plus_star) * rep.e_m);
    return rep;
}

double urn_d_degree_functional(const DiscretizedModel& disc, int cell, int k,
                               double lambda) {
    // lower companion process over the cells: S^-_0 = h_min(cell), increments
    // g_min(cell, j) with probability p_j
    std::map<double, double> states{{disc.h_min[cell], 1.0}};
    double result = 0.0;
    for (int i = 0; i < k; ++i) {
        std::map<double, double> next;
        for (const auto& [s, m] : states) {
            double f = s <= 0.0 ? 0.0 : s / (s + lambda);
            double mm = m * f;
            if (mm == 0.0) continue;
            if (i + 1 == k) {
                result += mm;
                continue;
            }
            for (int j = 0; j < disc.dim(); ++j) {
                if (disc.p[j] <= 0.0) continue;
                next[s + disc.g_min(cell, j)] += mm * disc.p[j];
            }
        }
        states.swap(next);
        if (i + 1 == k) break;
    }
    if (k == 0) result = 1.0;
    return disc.p[cell] * result;
}

UrnDReport check_urn_d_formulas(const UrnSpec& urn, const EigResult& eig) {
    const int d = urn.d;
    const int kp = urn.k_prime;
    const auto& disc = urn.disc;
    UrnDReport rep;
    rep.lambda = eig.lambda;
    const double lambda = eig.lambda;

    for (int t = 0; t < urn.type_count(); ++t) {
        const auto& tup = urn.types[static_cast<std::size_t>(t)];
        if (tup[0] == d) continue;  // overflow handled by the balance below
        const int dim = static_cast<int>(tup.size());
        // prefix min-activities (gamma a')(u|_i)
        double prefix = disc.h_min[tup[0]];
        double closed = disc.p[tup[0]];
        for (int i = 1; i < dim; ++i) {
            closed *= disc.p[tup[static_cast<std::size_t>(i)]] * prefix /
                      (prefix + lambda);
            prefix += disc.g_min(tup[0], tup[static_cast<std::size_t>(i)]);
        }
        if (dim < kp + 1) closed *= lambda / (lambda + prefix);
        double got = lambda * eig.v[t];
        rep.residual_closed_form =
            std::max(rep.residual_closed_form, std::fabs(got - closed));
    }

    for (int t = 0; t < urn.type_count(); ++t) {
        const auto& tup = urn.types[static_cast<std::size_t>(t)];
        double a = urn.activity[t];
        double ga = urn.gamma[t] * a;
        if (tup[0] == d)
            rep.r_k += a * eig.v[t];
        else if (static_cast<int>(tup.size()) == kp + 1)
            rep.f_k += a * eig.v[t];
        else
            rep.e_k += (a - ga) * eig.v[t];
    }
    rep.residual_overflow_balance =
        std::fabs(rep.r_k - (rep.e_k + rep.f_k) /
                                (lambda - disc.g_tilde_plus_star));

    // degree functional: urn marginals against the companion DP
    for (int cell = 0; cell < d; ++cell) {
        if (disc.p[cell] <= 0.0) continue;
        for (int k = 0; k <= kp; ++k) {
            double marginal = 0.0;
            for (int t = 0; t < urn.type_count(); ++t) {
                const auto& tup = urn.types[static_cast<std::size_t>(t)];
                if (tup[0] != cell) continue;
                if (static_cast<int>(tup.size()) >= k + 1)
                    marginal += lambda * eig.v[t];
            }
            double dp = urn_d_degree_functional(disc, cell, k, lambda);
            rep.residual_degree_functional =
                std::max(rep.residual_degree_functional, std::fabs(marginal - dp));
        }
    }
    return rep;
}

UrnSim::UrnSim(const UrnSpec& urn, Rng& rng) : urn_(&urn) {
    counts_.assign(static_cast<std::size_t>(urn.type_count()), 0);
    // initial ball: a seed singleton drawn by cell mass
    double total = 0.0;
    for (int l = 0; l < urn.d; ++l)
        if (urn.disc.p[l] > 0.0 && urn.activity[l] > 0.0) total += urn.disc.p[l];
    if (!(total > 0.0)) throw SpectralError("urn sim: no viable initial ball");
    double u = rng.uniform01() * total;
    int pick = -1;
    for (int l = 0; l < urn.d; ++l) {
        if (urn.disc.p[l] <= 0.0 || urn.activity[l] <= 0.0) continue;
        u -= urn.disc.p[l];
        pick = l;
        if (u < 0.0) break;
    }
    counts_[static_cast<std::size_t>(pick)] = 1;
    total_activity_ = urn.activity[pick];
    ball_count_ = 1;
}

void UrnSim::step(Rng& rng) {
    const auto& urn = *urn_;
    const int T = urn.type_count();
    const int d = urn.d;
    if (!(total_activity_ > 0.0))
        throw ConstructionBugError("urn sim: live mass went extinct");

    // draw a ball proportional to activity
    double target = rng.uniform01() * total_activity_;
    int x = -1;
    for (int t = 0; t < T; ++t) {
        double mass = urn.activity[t] * static_cast<double>(counts_[static_cast<std::size_t>(t)]);
        if (mass <= 0.0) continue;
        target -= mass;
        x = t;
        if (target < 0.0) break;
    }

    // newcomer cell
    double u = rng.uniform01();
    int l = d - 1;
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
        acc += urn.disc.p[j];
        if (u < acc) {
            l = j;
            break;
        }
    }

    auto add = [&](int t) {
        counts_[static_cast<std::size_t>(t)] += 1;
        total_activity_ += urn.activity[t];
        ++ball_count_;
    };
    add(urn.singleton_id(l));

    bool live = rng.uniform01() < urn.gamma[x];
    const auto& tup = urn.types[static_cast<std::size_t>(x)];
    if (urn.family == UrnSpec::Family::edge) {
        if (live && tup[0] < d)
            add(d + tup[0] * d + l);
        else
            add(d + d * d + l);
    } else {
        if (live) {
            auto child = tup;
            child.push_back(l);
            counts_[static_cast<std::size_t>(x)] -= 1;
            total_activity_ -= urn.activity[x];
            --ball_count_;
            add(urn.find_type(child));
        } else {
            add(urn.find_type({d, l}));
        }
    }
    ++steps_;
    if (steps_ % 4096 == 0) {
        total_activity_ = 0.0;  // exact refresh of the running activity
        for (int t = 0; t < T; ++t)
            total_activity_ +=
                urn.activity[t] * static_cast<double>(counts_[static_cast<std::size_t>(t)]);
    }
}

Eigen::VectorXd simulate_urn(const UrnSpec& urn, std::int64_t n, Rng& rng) {
    UrnSim sim(urn, rng);
    for (std::int64_t i = 0; i < n; ++i) sim.step(rng);
    Eigen::VectorXd out(urn.type_count());
    for (int t = 0; t < urn.type_count(); ++t)
        out[t] = static_cast<double>(sim.composition()[static_cast<std::size_t>(t)]) /
                 static_cast<double>(n);
    return out;
}

}  // namespace pani
