#pragma once

#include <cstdint>
#include <vector>

#include "pani/fitness.hpp"
#include "pani/rng.hpp"
#include "pani/weight_law.hpp"

namespace pani {

// Flat binary-indexed prefix-sum tree over nonnegative weights: point update
// and inverse-cdf draw both O(log n).
class FenwickSampler {
public:
    explicit FenwickSampler(std::size_t capacity_hint = 0);

    void push_back(double v);
    void add(std::size_t i, double delta);
    double value(std::size_t i) const { return values_[i]; }
    double total() const { return total_; }
    std::size_t size() const { return n_; }

    // index with prefix(i-1) <= u*total < prefix(i); u in [0,1)
    std::size_t sample(double u) const;

    // exact rebuild from stored values; resets additive float drift
    void rebuild();

private:
    void grow_capacity(std::size_t want);

    std::size_t n_ = 0;
    std::size_t cap_ = 0;  // power of two
    std::vector<double> tree_;    // 1-based
    std::vector<double> values_;  // 0-based mirror
    double total_ = 0.0;
};

struct StepRecord {
    std::int64_t parent = 0;
    double weight = 0.0;
};

// The evolving tree: one vertex appended per step, parent chosen with
// probability fitness/Z. Mutated by exactly one worker at a time.
class GrowthTree {
public:
    // root weight drawn from mu conditioned on h(W0) > 0 by rejection
    GrowthTree(const FitnessModel& model, const WeightLaw& law, Rng& rng,
               std::size_t capacity_hint = 0);

    StepRecord step(const FitnessModel& model, const WeightLaw& law, Rng& rng);

    std::int64_t vertex_count() const { return static_cast<std::int64_t>(weight_.size()); }
    std::int64_t edge_count() const { return vertex_count() - 1; }
    double weight(std::int64_t v) const { return weight_[static_cast<std::size_t>(v)]; }
    double fitness(std::int64_t v) const { return fitness_[static_cast<std::size_t>(v)]; }
    std::int32_t out_degree(std::int64_t v) const {
        return out_degree_[static_cast<std::size_t>(v)];
    }
    std::int32_t parent(std::int64_t v) const {
        return parent_[static_cast<std::size_t>(v)];
    }
    double z() const { return z_; }

    const std::vector<double>& weights() const { return weight_; }
    const std::vector<double>& fitness_values() const { return fitness_; }
    const std::vector<std::int32_t>& parents() const { return parent_; }
    const std::vector<std::int32_t>& out_degrees() const { return out_degree_; }

    // recompute Z and every fitness from the edge list (verification path)
    double recompute_z() const;
    std::vector<double> recompute_fitness(const FitnessModel& model) const;

    FenwickSampler& sampler() { return index_; }

private:
    std::vector<double> weight_, fitness_;
    std::vector<std::int32_t> parent_, out_degree_;
    FenwickSampler index_;
    double z_ = 0.0;
    std::uint64_t steps_ = 0;
    static constexpr std::uint64_t kRebuildPeriod = 1ull << 16;
};

}  // namespace pani
