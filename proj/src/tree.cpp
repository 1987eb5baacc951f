#include "pani/tree.hpp"

#include <cmath>

#include "pani/errors.hpp"

namespace pani {

namespace {

double kahan_sum(const std::vector<double>& xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace

FenwickSampler::FenwickSampler(std::size_t capacity_hint) {
    cap_ = 1;
    while (cap_ < std::max<std::size_t>(capacity_hint, 1)) cap_ <<= 1;
    tree_.assign(cap_ + 1, 0.0);
    values_.reserve(cap_);
}

void FenwickSampler::grow_capacity(std::size_t want) {
    if (want <= cap_) return;
    while (cap_ < want) cap_ <<= 1;
    tree_.assign(cap_ + 1, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t j = i + 1;
        while (j <= cap_) {
            tree_[j] += values_[i];
            j += j & (~j + 1);
        }
    }
}

void FenwickSampler::push_back(double v) {
    grow_capacity(n_ + 1);
    values_.push_back(0.0);
    ++n_;
    add(n_ - 1, v);
}

void FenwickSampler::add(std::size_t i, double delta) {
    values_[i] += delta;
    total_ += delta;
    std::size_t j = i + 1;
    while (j <= cap_) {
        tree_[j] += delta;
        j += j & (~j + 1);
    }
}

std::size_t FenwickSampler::sample(double u) const {
    double target = u * total_;
    std::size_t pos = 0;
    for (std::size_t bit = cap_; bit; bit >>= 1) {
        std::size_t next = pos + bit;
        if (next <= cap_ && tree_[next] < target) {
            pos = next;
            target -= tree_[next];
        }
    }
    std::size_t idx = pos < n_ ? pos : n_ - 1;
    // float-edge landing on a zero-weight slot: walk to a live neighbour
    if (values_[idx] <= 0.0) {
        for (std::size_t k = 1; k < n_; ++k) {
            if (idx >= k && values_[idx - k] > 0.0) return idx - k;
            if (idx + k < n_ && values_[idx + k] > 0.0) return idx + k;
        }
    }
    return idx;
}

void FenwickSampler::rebuild() {
    std::fill(tree_.begin(), tree_.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t j = i + 1;
        while (j <= cap_) {
            tree_[j] += values_[i];
            j += j & (~j + 1);
        }
    }
    total_ = kahan_sum(values_);
}

GrowthTree::GrowthTree(const FitnessModel& model, const WeightLaw& law, Rng& rng,
                       std::size_t capacity_hint)
    : index_(capacity_hint + 1) {
    double w0 = 0.0;
    bool found = false;
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        w0 = law.sample(rng);
        if (model.h(w0) > 0.0) {
            found = true;
            break;
        }
    }
    if (!found) throw DegenerateLawError("init: no weight with h > 0 after 1e6 draws");
    weight_.reserve(capacity_hint + 1);
    fitness_.reserve(capacity_hint + 1);
    parent_.reserve(capacity_hint + 1);
    out_degree_.reserve(capacity_hint + 1);
    weight_.push_back(w0);
    fitness_.push_back(model.h(w0));
    parent_.push_back(-1);
    out_degree_.push_back(0);
    index_.push_back(fitness_[0]);
    z_ = fitness_[0];
}

StepRecord GrowthTree::step(const FitnessModel& model, const WeightLaw& law,
                            Rng& rng) {
    std::size_t j = index_.sample(rng.uniform01());
    double w_new = law.sample(rng);
    double g_inc = model.g(weight_[j], w_new);
    double h_new = model.h(w_new);

    fitness_[j] += g_inc;
    index_.add(j, g_inc);
    out_degree_[j] += 1;

    weight_.push_back(w_new);
    fitness_.push_back(h_new);
    parent_.push_back(static_cast<std::int32_t>(j));
    out_degree_.push_back(0);
    index_.push_back(h_new);
    z_ += g_inc + h_new;

    if (++steps_ % kRebuildPeriod == 0) {
        index_.rebuild();
        z_ = index_.total();
    }
    return {static_cast<std::int64_t>(j), w_new};
}

double GrowthTree::recompute_z() const { return kahan_sum(fitness_); }

std::vector<double> GrowthTree::recompute_fitness(const FitnessModel& model) const {
    std::vector<double> f(weight_.size());
    for (std::size_t v = 0; v < weight_.size(); ++v) f[v] = model.h(weight_[v]);
    for (std::size_t v = 1; v < weight_.size(); ++v) {
        auto p = static_cast<std::size_t>(parent_[v]);
        f[p] += model.g(weight_[p], weight_[v]);
    }
    return f;
}

}  // namespace pani
