// verify.hpp - named checks run against a BrachSolution
#pragma once

#include "laxqsl/bvp.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace laxqsl {

struct Measurement {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;  // pass iff value < threshold
    bool passed() const { return value < threshold; }
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string note;  // set when the check could not run
    std::vector<Measurement> measurements;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool passed() const;
    nlohmann::json to_json() const;
};

struct VerifyOptions {
    double tol = 1e-12;             // integration tolerance of every re-run
    int samples_per_period = 200;   // uniform sampling of tau
    int oracle_samples = 50;
    double dominance_threshold = 0.9;
    int threads = 1;
};

// invariants, oracle, transfer, spectrum, phase, profile
const std::vector<std::string>& check_names();

// Throws std::invalid_argument for unknown names.
VerifyReport verify_solution(const BrachSolution& sol, const std::vector<std::string>& checks,
                            const VerifyOptions& opts = {});

}  // namespace laxqsl
