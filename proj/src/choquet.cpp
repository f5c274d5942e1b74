#include "capax/choquet.hpp"

#include <algorithm>
#include <cmath>

namespace capax {

CapacityOracle::CapacityOracle(Grid grid, SetFunction fn, double slack)
    : grid_(std::move(grid)), fn_(std::move(fn)), slack_(slack) {}

double CapacityOracle::operator()(const TargetSet& E) {
    if (!E.grid.same_layout(grid_))
        throw usage_error("capacity oracle queried on a different grid");
    auto it = memo_.find(E.cells);
    if (it != memo_.end()) return it->second;
    const double v = fn_(E);
    ++solves_;
    for (const auto& [key, val] : memo_) {
        // audit C(subset) <= C(superset) against every cached nested set
        if (key.size() <= E.cells.size() &&
            std::includes(E.cells.begin(), E.cells.end(), key.begin(),
                          key.end())) {
            if (val > v * (1.0 + slack_) + 1e-300) monotone_ok_ = false;
        } else if (key.size() > E.cells.size() &&
                   std::includes(key.begin(), key.end(), E.cells.begin(),
                                 E.cells.end())) {
            if (v > val * (1.0 + slack_) + 1e-300) monotone_ok_ = false;
        }
    }
    memo_.emplace(E.cells, v);
    return v;
}

namespace {

// distinct positive values of f in increasing order
std::vector<double> positive_levels(const Field& f) {
    std::vector<double> v;
    v.reserve(f.values.size());
    for (double x : f.values) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw usage_error("field must be nonnegative and finite");
        if (x > 0.0) v.push_back(x);
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

double choquet_integral(const Field& f, double q, CapacityOracle& C) {
    if (!(q > 0.0)) throw usage_error("choquet integral needs q > 0");
    double sum = 0.0;
    double prev = 0.0;
    for (double v : positive_levels(f)) {
        const TargetSet S = TargetSet::from_indicator(f, prev);
        sum += (std::pow(v, q) - std::pow(prev, q)) * C(S);
        prev = v;
    }
    return sum;
}

double weak_quasinorm(const Field& f, double q, CapacityOracle& C) {
    if (!(q > 0.0)) throw usage_error("weak quasi-norm needs q > 0");
    double best = 0.0;
    double prev = 0.0;
    for (double v : positive_levels(f)) {
        const TargetSet S = TargetSet::from_indicator(f, prev);
        best = std::max(best, v * std::pow(C(S), 1.0 / q));
        prev = v;
    }
    return best;
}

double c_functional(const Field& phi, const Field& omega,
                    const PointKernel& kernel, double p,
                    const SolverParams& params) {
    if (!(p > 1.0)) throw usage_error("obstacle functional needs p > 1");
    for (double x : phi.values)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw usage_error("field must be nonnegative and finite");
    const TargetSet E = TargetSet::from_indicator(phi, 0.0);
    std::vector<double> obstacle;
    obstacle.reserve(E.cells.size());
    for (std::size_t i : E.cells)
        obstacle.push_back(std::pow(phi.values[i], 1.0 / p));
    return capacity_primal(E, omega, kernel, p, obstacle, params).value;
}

CapacityOracle riesz_capacity_oracle(const Grid& grid, const Field& omega,
                                     double alpha, double p, double rho,
                                     const SolverParams& params) {
    const double slack = std::max(1e-5, 10.0 * params.tol);
    return CapacityOracle(
        grid,
        [omega, alpha, p, rho, params](const TargetSet& E) {
            return capacity_primal(E, omega, LocalRieszKernel{alpha, rho}, p,
                                   {}, params)
                .value;
        },
        slack);
}

}  // namespace capax
