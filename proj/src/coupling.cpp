#include "pani/coupling.hpp"

#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

#include "pani/errors.hpp"

namespace pani {

FitnessModel regularized(const FitnessModel& model, const DominatingStructure& dom,
                         double eps, int sign) {
    if (!(eps > 0.0)) throw DomainError("regularized: eps must be > 0");
    if (sign != 1 && sign != -1) throw DomainError("regularized: sign must be +-1");
    Regularization reg;
    reg.base = std::make_shared<FitnessModel>(model);
    reg.m_eps = m_epsilon(dom, model, eps);
    reg.x_star = dom.x_star;
    reg.eps = eps;
    reg.sign = sign;
    reg.u_phi = dom.u_phi;
    reg.u_atoms = dom.c;
    return FitnessModel::regularize(std::move(reg));
}

namespace {

// One of the three coupled trees: per-vertex state plus a full-index and an
// m_eps-restricted index for the fallback draw.
struct CoupledTree {
    const FitnessModel* model;
    std::vector<double> fitness;
    std::vector<std::int32_t> out_degree;
    FenwickSampler full;
    FenwickSampler restricted;
    double z = 0.0;

    CoupledTree(const FitnessModel& m, double w0, bool root_in_eps, std::size_t cap)
        : model(&m), full(cap), restricted(cap) {
        double f0 = m.h(w0);
        fitness.push_back(f0);
        out_degree.push_back(0);
        full.push_back(f0);
        restricted.push_back(root_in_eps ? f0 : 0.0);
        z = f0;
    }

    void attach(std::int64_t parent, double w_parent, double w_new, bool parent_in_eps,
                bool child_in_eps) {
        auto p = static_cast<std::size_t>(parent);
        double g_inc = model->g(w_parent, w_new);
        double h_new = model->h(w_new);
        fitness[p] += g_inc;
        full.add(p, g_inc);
        if (parent_in_eps) restricted.add(p, g_inc);
        out_degree[p] += 1;
        fitness.push_back(h_new);
        out_degree.push_back(0);
        full.push_back(h_new);
        restricted.push_back(child_in_eps ? h_new : 0.0);
        z += g_inc + h_new;
    }

    std::int64_t draw_full(Rng& rng) {
        return static_cast<std::int64_t>(full.sample(rng.uniform01()));
    }

    std::int64_t draw_restricted(Rng& rng) {
        if (restricted.total() <= 0.0)
            throw ConstructionBugError("coupling: fallback draw with empty m_eps mass");
        return static_cast<std::int64_t>(restricted.sample(rng.uniform01()));
    }
};

}  // namespace

CouplingResult coupled_grow(const FitnessModel& model, const DominatingStructure& dom,
                            const WeightLaw& law, double eps, std::int64_t n,
                            Rng& rng) {
    auto m_eps = m_epsilon(dom, model, eps);
    if (!(law.measure(m_eps) > 0.0))
        throw PreconditionError("coupled_grow: m_eps carries no mass");
    auto lower = regularized(model, dom, eps, -1);
    auto upper = regularized(model, dom, eps, +1);

    // shared root, conditioned on h > 0
    double w0 = 0.0;
    bool ok = false;
    for (int i = 0; i < 1000000; ++i) {
        w0 = law.sample(rng);
        if (model.h(w0) > 0.0) {
            ok = true;
            break;
        }
    }
    if (!ok) throw DegenerateLawError("coupled_grow: no weight with h > 0");

    std::vector<double> weights{w0};
    std::vector<char> in_eps{static_cast<char>(m_eps.contains(w0))};
    auto cap = static_cast<std::size_t>(n) + 1;
    CoupledTree t_minus(lower, w0, in_eps[0], cap);
    CoupledTree t_mid(model, w0, in_eps[0], cap);
    CoupledTree t_plus(upper, w0, in_eps[0], cap);

    CouplingResult result;
    result.n = n;

    auto check_vertex = [&](std::int64_t v) {
        if (in_eps[static_cast<std::size_t>(v)]) return;  // no pathwise claim on m_eps
        auto i = static_cast<std::size_t>(v);
        double slack = 1e-9 * (1.0 + std::fabs(t_mid.fitness[i]));
        if (t_plus.fitness[i] > t_mid.fitness[i] + slack) ++result.violations;
        if (t_mid.fitness[i] > t_minus.fitness[i] + slack) ++result.violations;
        if (t_plus.out_degree[i] > t_mid.out_degree[i]) ++result.violations;
        if (t_mid.out_degree[i] > t_minus.out_degree[i]) ++result.violations;
    };
    auto check_z = [&]() {
        double slack = 1e-9 * (1.0 + std::fabs(t_mid.z));
        if (t_minus.z > t_mid.z + slack) ++result.violations;
        if (t_mid.z > t_plus.z + slack) ++result.violations;
    };

    for (std::int64_t s = 1; s <= n; ++s) {
        double w_new = law.sample(rng);
        bool child_eps = m_eps.contains(w_new);

        // lower tree picks by its own law
        std::int64_t v_minus = t_minus.draw_full(rng);
        bool vm_eps = in_eps[static_cast<std::size_t>(v_minus)];

        // middle tree: accept, otherwise redraw among m_eps vertices
        std::int64_t v_mid;
        if (!vm_eps) {
            double ratio = (t_minus.z * t_mid.fitness[static_cast<std::size_t>(v_minus)]) /
                           (t_mid.z * t_minus.fitness[static_cast<std::size_t>(v_minus)]);
            if (ratio > 1.0 + 1e-12 || !(ratio >= 0.0))
                throw ConstructionBugError("coupling: lower acceptance ratio outside [0,1]");
            v_mid = rng.uniform01() <= ratio ? v_minus : t_mid.draw_restricted(rng);
        } else {
            v_mid = t_mid.draw_restricted(rng);
        }
        bool v0_eps = in_eps[static_cast<std::size_t>(v_mid)];

        // upper tree: accept from the middle choice, otherwise redraw
        std::int64_t v_plus;
        if (!v0_eps) {
            double ratio = (t_mid.z * t_plus.fitness[static_cast<std::size_t>(v_mid)]) /
                           (t_plus.z * t_mid.fitness[static_cast<std::size_t>(v_mid)]);
            if (ratio > 1.0 + 1e-12 || !(ratio >= 0.0))
                throw ConstructionBugError("coupling: upper acceptance ratio outside [0,1]");
            v_plus = rng.uniform01() <= ratio ? v_mid : t_plus.draw_restricted(rng);
        } else {
            v_plus = t_plus.draw_restricted(rng);
        }

        t_minus.attach(v_minus, weights[static_cast<std::size_t>(v_minus)], w_new,
                       vm_eps, child_eps);
        t_mid.attach(v_mid, weights[static_cast<std::size_t>(v_mid)], w_new, v0_eps,
                     child_eps);
        t_plus.attach(v_plus, weights[static_cast<std::size_t>(v_plus)], w_new,
                      in_eps[static_cast<std::size_t>(v_plus)], child_eps);
        weights.push_back(w_new);
        in_eps.push_back(static_cast<char>(child_eps));

        check_z();
        check_vertex(v_minus);
        check_vertex(v_mid);
        check_vertex(v_plus);
        check_vertex(static_cast<std::int64_t>(weights.size()) - 1);
    }

    // full sweep at the end
    for (std::int64_t v = 0; v < static_cast<std::int64_t>(weights.size()); ++v)
        check_vertex(v);
    check_z();

    result.z_minus = t_minus.z;
    result.z_mid = t_mid.z;
    result.z_plus = t_plus.z;
    return result;
}

std::vector<CondensateRow> condensate_probe(const FitnessModel& model,
                                            const DominatingStructure& dom,
                                            const WeightLaw& law,
                                            const std::vector<double>& eps_list,
                                            const std::vector<std::int64_t>& n_list,
                                            int replicas, std::uint64_t master_seed,
                                            int threads) {
    if (eps_list.empty() || n_list.empty())
        throw DomainError("condensate_probe: empty grid");
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
        if (n_list[i + 1] <= n_list[i])
            throw DomainError("condensate_probe: n grid must ascend");

    auto rep = classify_regime(model, law);
    double lambda_for_prediction;
    if (rep.regime == Regime::condensation)
        lambda_for_prediction = rep.g_tilde_star;
    else if (rep.regime == Regime::non_condensation)
        lambda_for_prediction = malthusian(model, law);
    else
        throw PreconditionError("condensate_probe: boundary regime");

    std::vector<WeightSet> sets;
    std::vector<double> predicted;
    for (double eps : eps_list) {
        sets.push_back(m_epsilon(dom, model, eps));
        if (!(law.measure(sets.back()) > 0.0))
            throw PreconditionError("condensate_probe: m_eps carries no mass");
        predicted.push_back(psi_mass(model, law, sets.back(), lambda_for_prediction));
    }

    const std::int64_t horizon = n_list.back();
    const std::size_t ne = eps_list.size(), nn = n_list.size();
    // counts[replica][eps][n]
    std::vector<std::vector<std::vector<std::int64_t>>> counts(
        static_cast<std::size_t>(replicas),
        std::vector<std::vector<std::int64_t>>(ne, std::vector<std::int64_t>(nn, 0)));

    auto run_replica = [&](int r) {
        Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(r)));
        GrowthTree tree(model, law, rng, static_cast<std::size_t>(horizon) + 1);
        std::vector<std::int64_t> tally(ne, 0);
        std::size_t ni = 0;
        for (std::int64_t s = 1; s <= horizon; ++s) {
            auto rec = tree.step(model, law, rng);
            double wt = tree.weight(rec.parent);
            for (std::size_t e = 0; e < ne; ++e)
                if (sets[e].contains(wt)) ++tally[e];
            if (s == n_list[ni]) {
                for (std::size_t e = 0; e < ne; ++e)
                    counts[static_cast<std::size_t>(r)][e][ni] = tally[e];
                ++ni;
            }
        }
    };

    int nthreads = threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency())
                                : threads;
    nthreads = std::max(1, std::min(nthreads, replicas));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int r = next.fetch_add(1);
            if (r >= replicas) return;
            run_replica(r);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::vector<CondensateRow> rows;
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t i = 0; i < nn; ++i) {
            CondensateRow row;
            row.eps = eps_list[e];
            row.n = n_list[i];
            double total = 0.0;
            for (int r = 0; r < replicas; ++r)
                total += static_cast<double>(counts[static_cast<std::size_t>(r)][e][i]);
            row.empirical = total / (static_cast<double>(replicas) *
                                     static_cast<double>(n_list[i]));
            row.predicted = predicted[e];
            row.excess = row.predicted > 0.0 ? row.empirical / row.predicted : 0.0;
            rows.push_back(row);
        }
    return rows;
}

}  // namespace pani
