#pragma once

#include <cstdint>
#include <vector>

#include "pani/measures.hpp"
#include "pani/theory.hpp"

namespace pani {

// g_eps (sign=+1) or g_{-eps} (sign=-1) overlay on a product/table model;
// h is unchanged.
FitnessModel regularized(const FitnessModel& model, const DominatingStructure& dom,
                         double eps, int sign);

struct CouplingResult {
    std::int64_t violations = 0;
    double z_minus = 0.0;
    double z_mid = 0.0;
    double z_plus = 0.0;
    std::int64_t n = 0;
};

// Grow the sandwich (T^-eps, T, T^+eps) on a shared weight sequence, with
// acceptance/fallback parent selection; every step asserts the partition
// function sandwich, and the fitness/degree sandwich for vertices outside
// m_eps. Violations are counted (a correct build reports zero).
CouplingResult coupled_grow(const FitnessModel& model, const DominatingStructure& dom,
                            const WeightLaw& law, double eps, std::int64_t n,
                            Rng& rng);

struct CondensateRow {
    double eps = 0.0;
    std::int64_t n = 0;
    double empirical = 0.0;  // edge-tail mass in m_eps per unit time
    double predicted = 0.0;  // psi mass of m_eps at lambda* resp. g~*
    double excess = 0.0;     // empirical / predicted
};

// Edge mass accumulating in the shrinking neighbourhoods of the dominating
// set, against the fixed-measure prediction. In the condensation regime the
// excess grows with n; in the non-condensation control it stays near 1.
std::vector<CondensateRow> condensate_probe(const FitnessModel& model,
                                            const DominatingStructure& dom,
                                            const WeightLaw& law,
                                            const std::vector<double>& eps_list,
                                            const std::vector<std::int64_t>& n_list,
                                            int replicas, std::uint64_t master_seed,
                                            int threads = 1);

}  // namespace pani
