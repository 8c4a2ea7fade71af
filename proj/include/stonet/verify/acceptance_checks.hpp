/**
 * @file acceptance_checks.hpp
 * @brief The numbered acceptance criteria as callable checks.
 */
#pragma once

#include "stonet/operator_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace stonet::verify {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    bool evaluated = true;
    std::string detail;
    double seconds = 0.0;

    std::string line() const;
};

CriterionResult check_permeability_oracle();   // 1
CriterionResult check_hydrostatic_no_flow();   // 2
CriterionResult check_pressure_convergence();  // 3
CriterionResult check_diffusion_oracle();      // 4
CriterionResult check_solute_balance();        // 5
CriterionResult check_bookkeeping();           // 6
CriterionResult check_gradients();             // 7
CriterionResult check_rollout_identity();      // 8
/// 9 and 10 read the artifacts of a `repro --desk` run.
CriterionResult check_architecture_trend(const std::filesystem::path& repro_dir);
CriterionResult check_error_flatness(const std::filesystem::path& repro_dir);
/// 11 compares the deterministic artifacts of two runs byte for byte.
CriterionResult check_determinism(const std::filesystem::path& run_a, const std::filesystem::path& run_b);

/// Largest relative difference between tape gradients and central finite
/// differences (step h) over `samples` randomly chosen parameter entries.
/// Relative error is |g - fd| / max(|g|, |fd|, abs_floor).
struct GradientCheck {
    double max_relative_error = 0.0;
    double max_abs_error = 0.0;
    int checked = 0;
};
GradientCheck gradient_check(const OperatorConfig& config, int samples, std::uint64_t seed, double h = 1e-6,
                             int batch = 8, double abs_floor = 0.0);

} // namespace stonet::verify
