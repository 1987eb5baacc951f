#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "pani/tree.hpp"

namespace pani {

struct RunConfig {
    std::int64_t n_steps = 0;
    int replicas = 1;
    std::uint64_t master_seed = 0;
    int bins = 64;
    int k_max = 64;
    std::int64_t stride = 0;  // 0: n_steps/64
    int threads = 1;

    void validate() const;
};

using ArrayXi64 = Eigen::Array<std::int64_t, Eigen::Dynamic, 1>;
using ArrayXXi64 = Eigen::Array<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Binned counting measures for the edge/degree statistics. Merging is
// componentwise addition, so replica results fold in any order.
struct EmpiricalMeasures {
    int bins = 0;
    double w_star = 1.0;
    int k_max = 0;
    std::int64_t n_total = 0;   // steps per replica
    int replicas_merged = 0;

    ArrayXi64 xi;        // edge tail weight counts, [bins]
    ArrayXXi64 xi2;      // edge (tail, head) weight counts, [bins x bins]
    ArrayXXi64 n_geq;    // vertices with out-degree >= k, [(k_max+1) x bins]
    ArrayXi64 deg_over;  // sum over vertices of (out_degree - k_max)+, [bins]
    std::vector<std::int64_t> z_checkpoints;
    std::vector<double> z_over_n;  // summed across replicas at each checkpoint

    EmpiricalMeasures() = default;
    EmpiricalMeasures(int bins_, double w_star_, int k_max_);

    int bin_of(double w) const;
    void merge(const EmpiricalMeasures& other);

    // sum_k>=1 N_{>=k} double-count identity helpers
    std::int64_t xi_total() const { return xi.sum(); }
    std::int64_t degree_sum() const { return n_geq.bottomRows(n_geq.rows() - 1).sum() + deg_over.sum(); }
};

// Grow `replicas` independent trees with seeds derived from the master seed
// and fold their measures. Bit-reproducible for a fixed (master_seed,
// replicas) pair regardless of thread count.
EmpiricalMeasures grow(const FitnessModel& model, const WeightLaw& law,
                       const RunConfig& cfg);

// single replica, exposed for tests; the final tree is written to *out_tree
// when retain is requested
EmpiricalMeasures grow_one(const FitnessModel& model, const WeightLaw& law,
                           const RunConfig& cfg, std::uint64_t seed,
                           GrowthTree* out_tree = nullptr);

struct MartingaleSeries {
    std::vector<std::int64_t> checkpoints;
    std::vector<double> mean;
    std::vector<double> std_error;
};

// Track M_v(n) = f_v(n) / prod_{s=v}^{n-1} (Z_s + g~(w_v))/Z_s across
// replicas; a martingale, so the checkpoint means must agree.
MartingaleSeries martingale_probe(const FitnessModel& model, const WeightLaw& law,
                                  std::int64_t v,
                                  const std::vector<std::int64_t>& checkpoints,
                                  int replicas, std::uint64_t master_seed,
                                  int threads = 1);

}  // namespace pani
