#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pani/fitness.hpp"
#include "pani/measures.hpp"
#include "pani/weight_law.hpp"

namespace pani {

struct CondensationSection {
    std::vector<double> eps_grid;
    std::vector<std::int64_t> n_grid;
};

struct UrnSection {
    int m = 2;
    int k_prime = 4;
};

struct SweepSection {
    std::string parameter;  // currently "alpha" (beta_poly laws)
    double from = 0.0;
    double to = 0.0;
    int count = 0;
};

// One declarative experiment: law + model + run parameters, plus the
// optional condensation / urn / sweep sections. Parsing is strict; unknown
// keys are rejected with their location.
struct ExperimentConfig {
    WeightLaw law = WeightLaw::uniform(1.0);
    FitnessModel model = FitnessModel::classic_pa(1.0);
    std::optional<RunConfig> run;
    std::optional<CondensationSection> condensation;
    std::optional<UrnSection> urn;
    std::optional<SweepSection> sweep;
    std::uint64_t config_hash = 0;
    std::string canonical_text;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace pani
