#pragma once

#include <functional>
#include <vector>

#include "capax/grid.hpp"
#include "capax/potentials.hpp"

namespace capax {

/** Finite set of grid cells standing in for a compact set E. */
struct TargetSet {
    Grid grid;
    std::vector<std::size_t> cells;  // strictly increasing cell indices

    bool empty() const { return cells.empty(); }

    // Cells whose centers lie in the closed box [lo, hi] per axis.
    static TargetSet from_box(const Grid& g, const Point& lo, const Point& hi);
    static TargetSet from_cells(const Grid& g, std::vector<std::size_t> idx);
    // Cells where ind > threshold; the level-set constructor.
    static TargetSet from_indicator(const Field& ind, double threshold);
};

// Cells of E whose centers lie strictly inside the cube (same membership rule
// as cube_mass).
TargetSet intersect_cube(const TargetSet& E, const CubeSpec& q);
TargetSet unite(const TargetSet& a, const TargetSet& b);

// Scalar kernel of the center distance, (dist, dim, h) -> value. Both
// LocalRieszKernel and BesselKernelApprox convert to this.
using PointKernel = std::function<double(double, int, double)>;

/**
 * Constraint system of one obstacle problem: minimize sum_i u_i f_i^p over
 * f >= 0 subject to (B f)_j >= g_j. Implementations supply the norm weights
 * u and matrix-free applies of B and B^T.
 */
class KernelOp {
public:
    virtual ~KernelOp() = default;
    virtual std::size_t unknowns() const = 0;
    virtual std::size_t constraints() const = 0;
    virtual const std::vector<double>& norm_weights() const = 0;
    virtual void apply(const std::vector<double>& f, std::vector<double>& out) const = 0;
    virtual void apply_adjoint(const std::vector<double>& nu, std::vector<double>& out) const = 0;
};

/**
 * Pointwise kernel against L^p(omega): unknowns are all grid cells with
 * u_i = omega_i h^n, and B_ji = K(|x_j - x_i|_inf) h^n for constraint cells j.
 */
class DenseLagKernel : public KernelOp {
public:
    DenseLagKernel(const Grid& grid, std::vector<std::size_t> constraint_cells,
                   const Field& omega, const PointKernel& kernel);

    std::size_t unknowns() const override { return grid_.cell_count(); }
    std::size_t constraints() const override { return rows_.size(); }
    const std::vector<double>& norm_weights() const override { return u_; }
    void apply(const std::vector<double>& f, std::vector<double>& out) const override;
    void apply_adjoint(const std::vector<double>& nu, std::vector<double>& out) const override;

private:
    Grid grid_;
    std::vector<std::size_t> rows_;  // constraint cell indices
    std::vector<double> u_;
    std::vector<double> table_;  // kernel values by axis lag, shape of the grid
};

/**
 * Space-time kernel of the scale-resolved capacity. Unknowns live on
 * grid x LogTimeGrid with u_{ik} = w'_i h^n w_k (the measure w' dy dt/t);
 * the potential is sum_k w_k t_k^{-(n-alpha)} int_{|x-y|<t_k} w'(y) f(y,t_k) dy
 * with exact cell-window overlap. Unknown (i,k) has linear index k*N + i.
 */
class SpaceTimeKernel : public KernelOp {
public:
    SpaceTimeKernel(const Grid& grid, std::vector<std::size_t> constraint_cells,
                    const Field& omega, double alpha, double p,
                    const LogTimeGrid& tgrid);

    std::size_t unknowns() const override { return u_.size(); }
    std::size_t constraints() const override { return rows_.size(); }
    const std::vector<double>& norm_weights() const override { return u_; }
    void apply(const std::vector<double>& f, std::vector<double>& out) const override;
    void apply_adjoint(const std::vector<double>& nu, std::vector<double>& out) const override;

    const std::vector<LogTimeGrid::Node>& nodes() const { return nodes_; }

private:
    Grid grid_;
    std::vector<std::size_t> rows_;
    std::vector<double> u_;
    std::vector<double> wdual_;
    std::vector<LogTimeGrid::Node> nodes_;
    std::vector<std::vector<double>> overlap_;  // per node: 1d cell-window overlap by axis lag
    std::vector<int> reach_;                    // per node: max axis lag with overlap > 0
    std::vector<double> tker_;                  // per node: t^{-(n-alpha)}

    double window_sum(const std::vector<double>& cellvals, std::size_t center,
                      std::size_t node) const;
    void scatter_window(double amount, std::size_t center, std::size_t node,
                        std::vector<double>& out) const;
};

struct SolverParams {
    double tol = 1e-6;           // relative duality gap target
    std::size_t max_iter = 50000;
    std::size_t polish_every = 20;  // iterations between primal feasibility polishes
};

struct CapacitySolution {
    double value = 0.0;        // certified upper bound (feasible primal energy)
    double value_lower = 0.0;  // certified lower bound (best admissible dual measure)
    Field primal_f;            // feasible minimizer; for the space-time kernel,
                               // its dt/t marginal (full vector in primal_raw)
    std::vector<double> primal_raw;
    std::vector<double> dual_raw;  // normalized dual masses, one per constraint row
    DiscreteMeasure dual_mu;   // admissible: ||K^T mu||_{L^{p'}(w')} <= 1
    double gap = 0.0;          // (value^{1/p} - value_lower^{1/p}) / value^{1/p}
    std::size_t iterations = 0;
    bool converged = true;
};

// Accelerated projected-gradient ascent on the dual; both bounds certified.
// obstacle has one entry per constraint row of op.
CapacitySolution solve_capacity(const KernelOp& op, double p,
                                const std::vector<double>& obstacle,
                                const SolverParams& params = {});

// R-type capacity: inf sum f^p w h^n over (K f) >= obstacle on E. An empty
// obstacle means the constant 1. Zero solution when E is empty.
CapacitySolution capacity_primal(const TargetSet& E, const Field& omega,
                                 const PointKernel& kernel, double p,
                                 const std::vector<double>& obstacle = {},
                                 const SolverParams& params = {});

// The dual program solved standalone: reports the best admissible measure;
// its mass to the p-th power is value_lower.
CapacitySolution capacity_dual(const TargetSet& E, const Field& omega,
                               const PointKernel& kernel, double p,
                               const SolverParams& params = {});

struct EquilibriumMeasure {
    DiscreteMeasure mu;  // rescaled so mu(E) equals the capacity value
    double capacity = 0.0;
    double max_potential_on_support = 0.0;
    double min_potential_on_set = 0.0;
};

// Optimal dual measure of the truncated-Riesz capacity together with the
// extremal-potential diagnostics (V ~ 1 on E, <= 1 on the support).
EquilibriumMeasure equilibrium_measure(const TargetSet& E, const Field& omega,
                                       double alpha, double p, double rho,
                                       const SolverParams& params = {});

// Closed cube-capacity formula: quadrature of
// int_r^{2 rho} w'(Q_t(a)) / t^{(n-alpha)p'} dt/t raised to 1-p. Returns the
// +infinity marker when the range is empty (r = 2 rho).
double capacity_cube_formula(const Point& a, double r, const Field& omega,
                             double alpha, double p, double rho);

// Scale-resolved capacity over the space-time kernel.
CapacitySolution capacity_variant_R(const TargetSet& E, const Field& omega,
                                    double alpha, double p, double rho,
                                    const SolverParams& params = {});

// Bessel capacity: untruncated matched kernel, limited to the grid box.
CapacitySolution bessel_capacity(const TargetSet& E, const Field& omega,
                                 double p, double alpha,
                                 const SolverParams& params = {});

struct ThinnessReport {
    Point a{0.0, 0.0};
    std::vector<double> scales;              // t_k = 2^{-k} rho, k = 0..kmax
    std::vector<double> capacities;          // R(E intersect Q_{t_k}(a))
    std::vector<double> divergence_partial;  // partial sums of the Wiener-type integral
    std::vector<double> thinness_partial;    // partial sums of the dyadic capacity series
};

// Both thinness criteria at the point a: the weight-only divergence integral
// int (t^{alpha p}/w(Q_t(a)))^{p'-1} dt/t accumulated per octave from rho
// downward, and the dyadic sum over (2^{-alpha p k} R(E cap Q_{t_k}(a)) /
// w(Q_{t_k}(a)))^{p'-1}.
ThinnessReport thinness_diagnostic(const TargetSet& E, const Point& a,
                                   const Field& omega, double alpha, double p,
                                   double rho, int kmax,
                                   const SolverParams& params = {});

}  // namespace capax
