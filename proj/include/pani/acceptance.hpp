#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pani {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct AcceptanceOptions {
    int threads = 0;  // 0: hardware concurrency
    std::uint64_t seed = 20240901ull;
    std::map<std::string, double> tolerance_override;
};

using CheckFn = CheckResult (*)(const AcceptanceOptions&);

// ordered registry of the acceptance criteria
const std::vector<std::pair<std::string, CheckFn>>& acceptance_checks();

// run the named checks (all when names is empty); unknown names throw
std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opts,
                                        const std::vector<std::string>& names = {});

std::string format_check_line(const CheckResult& r, int index);

}  // namespace pani
