#include "pani/measures.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "pani/errors.hpp"

namespace pani {

void RunConfig::validate() const {
    if (n_steps < 1) throw DomainError("run: n_steps must be >= 1");
    if (replicas < 1) throw DomainError("run: replicas must be >= 1");
    if (bins < 1) throw DomainError("run: bins must be >= 1");
    if (k_max < 1) throw DomainError("run: k_max must be >= 1");
    if (stride < 0) throw DomainError("run: stride must be >= 0");
    if (threads < 0) throw DomainError("run: threads must be >= 0");
}

EmpiricalMeasures::EmpiricalMeasures(int bins_, double w_star_, int k_max_)
    : bins(bins_), w_star(w_star_), k_max(k_max_) {
    xi = ArrayXi64::Zero(bins);
    xi2 = ArrayXXi64::Zero(bins, bins);
    n_geq = ArrayXXi64::Zero(k_max + 1, bins);
    deg_over = ArrayXi64::Zero(bins);
}

int EmpiricalMeasures::bin_of(double w) const {
    auto b = static_cast<int>(w / w_star * bins);
    if (b < 0) b = 0;
    if (b >= bins) b = bins - 1;
    return b;
}

void EmpiricalMeasures::merge(const EmpiricalMeasures& other) {
    if (other.bins != bins || other.k_max != k_max)
        throw DomainError("merge: measure shapes differ");
    xi += other.xi;
    xi2 += other.xi2;
    n_geq += other.n_geq;
    deg_over += other.deg_over;
    if (z_checkpoints.empty()) {
        z_checkpoints = other.z_checkpoints;
        z_over_n = other.z_over_n;
    } else {
        if (z_checkpoints != other.z_checkpoints)
            throw DomainError("merge: z-path checkpoints differ");
        for (std::size_t i = 0; i < z_over_n.size(); ++i)
            z_over_n[i] += other.z_over_n[i];
    }
    n_total = other.n_total;  // same per replica
    replicas_merged += other.replicas_merged;
}

EmpiricalMeasures grow_one(const FitnessModel& model, const WeightLaw& law,
                           const RunConfig& cfg, std::uint64_t seed,
                           GrowthTree* out_tree) {
    Rng rng(seed);
    GrowthTree tree(model, law, rng, static_cast<std::size_t>(cfg.n_steps) + 1);
    EmpiricalMeasures m(cfg.bins, law.w_star(), cfg.k_max);
    std::int64_t stride = cfg.stride > 0 ? cfg.stride : std::max<std::int64_t>(1, cfg.n_steps / 64);
    for (std::int64_t s = 1; s <= cfg.n_steps; ++s) {
        auto rec = tree.step(model, law, rng);
        int bt = m.bin_of(tree.weight(rec.parent));
        int bh = m.bin_of(rec.weight);
        m.xi[bt] += 1;
        m.xi2(bt, bh) += 1;
        if (s % stride == 0 || s == cfg.n_steps) {
            m.z_checkpoints.push_back(s);
            m.z_over_n.push_back(tree.z() / static_cast<double>(s));
        }
    }
    for (std::int64_t v = 0; v < tree.vertex_count(); ++v) {
        int b = m.bin_of(tree.weight(v));
        std::int32_t d = tree.out_degree(v);
        int top = std::min<std::int32_t>(d, cfg.k_max);
        for (int k = 0; k <= top; ++k) m.n_geq(k, b) += 1;
        if (d > cfg.k_max) m.deg_over[b] += d - cfg.k_max;
    }
    m.n_total = cfg.n_steps;
    m.replicas_merged = 1;
    if (out_tree) *out_tree = std::move(tree);
    return m;
}

EmpiricalMeasures grow(const FitnessModel& model, const WeightLaw& law,
                       const RunConfig& cfg) {
    cfg.validate();
    int threads = cfg.threads;
    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, cfg.replicas));

    std::vector<EmpiricalMeasures> slots(static_cast<std::size_t>(cfg.replicas));
    if (threads == 1) {
        for (int r = 0; r < cfg.replicas; ++r)
            slots[static_cast<std::size_t>(r)] =
                grow_one(model, law, cfg, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                int r = next.fetch_add(1);
                if (r >= cfg.replicas) return;
                slots[static_cast<std::size_t>(r)] =
                    grow_one(model, law, cfg, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    // fold in replica order so the result is independent of scheduling
    EmpiricalMeasures out = std::move(slots[0]);
    for (std::size_t r = 1; r < slots.size(); ++r) out.merge(slots[r]);
    return out;
}

MartingaleSeries martingale_probe(const FitnessModel& model, const WeightLaw& law,
                                  std::int64_t v,
                                  const std::vector<std::int64_t>& checkpoints,
                                  int replicas, std::uint64_t master_seed,
                                  int threads) {
    if (checkpoints.empty()) throw DomainError("martingale_probe: no checkpoints");
    std::int64_t horizon = checkpoints.back();
    if (v > horizon) throw DomainError("martingale_probe: v beyond horizon");

    for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i)
        if (checkpoints[i + 1] <= checkpoints[i] || checkpoints[i] < v)
            throw DomainError("martingale_probe: checkpoints must ascend from v");

    const std::size_t nc = checkpoints.size();
    std::vector<double> sum(nc, 0.0), sumsq(nc, 0.0);
    GTilde gt(model, law);

    auto run_replica = [&](std::uint64_t seed, std::vector<double>& vals) {
        Rng rng(seed);
        GrowthTree tree(model, law, rng, static_cast<std::size_t>(horizon) + 1);
        double g_v = 0.0;
        double norm = 1.0;
        std::size_t ci = 0;
        for (std::int64_t t = 0; t <= horizon; ++t) {
            if (t == v) g_v = gt(tree.weight(v));
            if (t >= v) {
                while (ci < nc && checkpoints[ci] == t) {
                    vals[ci] = tree.fitness(v) / norm;
                    ++ci;
                }
                norm *= (tree.z() + g_v) / tree.z();
            }
            if (t < horizon) tree.step(model, law, rng);
        }
    };

    int nthreads = threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency())
                                : threads;
    nthreads = std::max(1, std::min(nthreads, replicas));
    std::vector<std::vector<double>> results(
        static_cast<std::size_t>(replicas), std::vector<double>(nc, 0.0));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int r = next.fetch_add(1);
            if (r >= replicas) return;
            run_replica(derive_seed(master_seed, static_cast<std::uint64_t>(r)),
                        results[static_cast<std::size_t>(r)]);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (const auto& vals : results)
        for (std::size_t i = 0; i < nc; ++i) {
            sum[i] += vals[i];
            sumsq[i] += vals[i] * vals[i];
        }

    MartingaleSeries series;
    series.checkpoints = checkpoints;
    for (std::size_t i = 0; i < nc; ++i) {
        double mean = sum[i] / replicas;
        double var = std::max(0.0, sumsq[i] / replicas - mean * mean);
        series.mean.push_back(mean);
        series.std_error.push_back(std::sqrt(var / replicas));
    }
    return series;
}

}  // namespace pani
