#pragma once

#include <string>
#include <vector>

#include "pani/config.hpp"
#include "pani/coupling.hpp"
#include "pani/theory.hpp"
#include "pani/urns.hpp"

namespace pani {

// shortest-reasonable decimal rendering used by every artifact writer
std::string fmt_double(double v);

std::string theory_report_json(const TheoryReport& rep);
std::string urn_report_json(const UrnEReport& e, const EigResult& eig_e, int types_e,
                            const UrnDReport& d, const EigResult& eig_d, int types_d);

void write_degrees_csv(const std::string& path, const EmpiricalMeasures& m);
void write_edges_csv(const std::string& path, const EmpiricalMeasures& m);
void write_zpath_csv(const std::string& path, const EmpiricalMeasures& m);
void write_condensate_csv(const std::string& path,
                          const std::vector<CondensateRow>& rows);
void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                    std::uint64_t master_seed, int replicas,
                    const std::vector<std::string>& artifacts);

struct SweepRow {
    double param = 0.0;
    double criterion = 0.0;  // +inf rendered as "inf"
    std::string regime;
    double lambda_or_gstar = 0.0;
    double condensate_mass = 0.0;
};

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace pani
