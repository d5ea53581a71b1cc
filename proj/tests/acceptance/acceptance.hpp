#pragma once

#include <string>

namespace acceptance {

struct CriterionResult {
    int id = 0;
    bool pass = false;
    std::string detail;
};

// Samplers and oracles (seconds).
CriterionResult criterion_gradient_oracle();       // 1
CriterionResult criterion_sampler_statistics();    // 2
CriterionResult criterion_analytic_residuals();    // 3

// Linear solver case studies.
CriterionResult criterion_reinsurance();           // 4
CriterionResult criterion_ruin();                  // 5

// Deep splitting case studies.
CriterionResult criterion_regulator();             // 6
CriterionResult criterion_insurance_unconstrained();  // 7
CriterionResult criterion_insurance_constrained();    // 8

// Infrastructure.
CriterionResult criterion_reproducibility();       // 9
CriterionResult criterion_mc_calibration();        // 10

CriterionResult run_criterion(int id);

}  // namespace acceptance
