#pragma once

#include <functional>
#include <map>
#include <vector>

#include "capax/capacity.hpp"

namespace capax {

/**
 * Memoizing wrapper around a capacity set function C(E). Capacity solves
 * dominate the cost of a Choquet integral, and the nested level sets of one
 * field hit the cache on reuse. Monotonicity is audited opportunistically on
 * nested query pairs, with a slack for solver tolerance.
 */
class CapacityOracle {
public:
    using SetFunction = std::function<double(const TargetSet&)>;

    CapacityOracle(Grid grid, SetFunction fn, double slack = 1e-5);

    double operator()(const TargetSet& E);

    std::size_t solves() const { return solves_; }
    bool monotonicity_ok() const { return monotone_ok_; }

private:
    Grid grid_;
    SetFunction fn_;
    double slack_;
    std::map<std::vector<std::size_t>, double> memo_;
    std::size_t solves_ = 0;
    bool monotone_ok_ = true;
};

// Layer-cake integral int_0^inf C({f^q > t}) dt over the distinct levels of
// the cellwise-constant f; exact for step functions. Level sets are strict.
double choquet_integral(const Field& f, double q, CapacityOracle& C);

// sup_t t C({f > t})^{1/q}, attained at a finite threshold of the discrete f.
double weak_quasinorm(const Field& f, double q, CapacityOracle& C);

// Obstacle functional: the capacity-type minimum with obstacle phi^{1/p} on
// the support of phi; comparable with the Choquet integral of phi at q = 1.
double c_functional(const Field& phi, const Field& omega,
                    const PointKernel& kernel, double p,
                    const SolverParams& params = {});

// Oracle over the truncated-Riesz capacity, the default set function here.
CapacityOracle riesz_capacity_oracle(const Grid& grid, const Field& omega,
                                     double alpha, double p, double rho,
                                     const SolverParams& params = {});

}  // namespace capax
