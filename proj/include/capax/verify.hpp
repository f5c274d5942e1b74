#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capax/capacity.hpp"

namespace capax {

/**
 * Shared parameters of the inequality checks. Instances are continuum
 * specifications drawn from the seed and realized on both the base grid and
 * its h/2 refinement; a check passes when every measured constant is finite
 * and the refinement ratio of the worst constant stays inside the band.
 */
struct VerifyConfig {
    std::uint64_t seed = 7;
    int dim = 1;
    double h = 1.0 / 64.0;
    double box = 2.0;  // the grid covers [-box, box] per axis
    double rho = 0.5;
    double alpha = 0.5;
    double p = 2.0;
    double q = 1.0;             // Choquet exponent of the maximal_choquet check
    std::size_t instances = 0;  // 0 means the per-check default
    double band_lo = 0.5;
    double band_hi = 2.0;
    SolverParams solver{1e-3, 1500, 20};
};

struct CheckInstance {
    std::string descriptor;
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;  // lhs / rhs
};

struct CheckReport {
    std::string check_id;
    std::uint64_t seed = 0;
    double h = 0.0;
    double h_fine = 0.0;
    std::vector<CheckInstance> instances;  // base resolution rows
    double constant_h = 0.0;
    double constant_h2 = 0.0;
    double refinement_ratio = 0.0;
    double band_lo = 0.5;
    double band_hi = 2.0;
    bool pass = false;
    std::string note;  // extra trend conditions folded into the verdict
};

const std::vector<std::string>& check_ids();

CheckReport run_check(const std::string& id, const VerifyConfig& cfg);
std::vector<CheckReport> run_all(const VerifyConfig& cfg);

std::string reports_to_json(const std::vector<CheckReport>& reports);
void write_reports(const std::string& path,
                   const std::vector<CheckReport>& reports);

}  // namespace capax
