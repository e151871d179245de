#pragma once

#include <string>
#include <vector>

namespace nfdm {

enum class Fault { none, glme_tolerance };

Fault fault_from_string(const std::string& name);

struct InvariantResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::vector<InvariantResult> invariants;
    double wall_time_s = 0.0;

    bool passed() const;
};

std::vector<SuiteResult> run_selftest(Fault fault = Fault::none);

}  // namespace nfdm
