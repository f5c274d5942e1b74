#pragma once

#include "capax/grid.hpp"

namespace capax {

/**
 * Truncated sup-norm Riesz kernel |x|_inf^{alpha-n} chi_{|x|_inf < rho}.
 * At lag zero the value is the exact cell average of the kernel over one
 * cell, n (h/2)^{alpha-n} / alpha, the consistent quadrature weight for the
 * integrable singularity.
 */
struct LocalRieszKernel {
    double alpha;
    double rho;

    double operator()(double dist, int dim, double h) const {
        if (dist >= rho) return 0.0;
        if (dist == 0.0) return dim * std::pow(0.5 * h, alpha - dim) / alpha;
        return std::pow(dist, alpha - dim);
    }
};

/**
 * Matched two-branch Bessel kernel: |x|_inf^{alpha-n} inside the matching
 * radius 1, and e^{1-|x|} |x|_inf^{-(n+1-alpha)/2} beyond it (the continuity
 * factor e folded into the far branch). Positive and continuous.
 */
struct BesselKernelApprox {
    double alpha;

    double operator()(double dist, int dim, double h) const {
        if (dist == 0.0) return dim * std::pow(0.5 * h, alpha - dim) / alpha;
        if (dist <= 1.0) return std::pow(dist, alpha - dim);
        return std::exp(1.0 - dist) * std::pow(dist, -0.5 * (dim + 1.0 - alpha));
    }
};

// (I_{alpha,rho} * mu)(x) summed over cell-center lags.
Field riesz_convolve(const DiscreteMeasure& mu, double alpha, double rho);

// Same kernel applied to a density: masses f_i h^n.
Field riesz_convolve(const Field& f, double alpha, double rho);

Field bessel_convolve(const DiscreteMeasure& mu, double alpha);
Field bessel_convolve(const Field& f, double alpha);

// V = I * ((I * mu)^{p'-1} w'), the nonlinear potential of mu.
Field nonlinear_potential_V(const DiscreteMeasure& mu, const Field& omega,
                            double alpha, double p, double rho);

// Wolff potential: integral over (0, rho] of
// (t^{alpha p} mu(Q_t(x)) / w(Q_t(x)))^{1/(p-1)} dt/t. Quadrature on the
// given log grid; below t_min the cube ratio is frozen at its smallest-cell
// value and the power of t integrated in closed form.
Field wolff_cal(const DiscreteMeasure& mu, const Field& omega, double alpha,
                double p, double rho, const LogTimeGrid& tgrid);

// Variant with Lebesgue normalization and the dual-weight average factor:
// integrand (mu(Q_t)/t^{n-alpha p})^{1/(p-1)} Avg_{Q_t} w' dt/t.
Field wolff_variant(const DiscreteMeasure& mu, const Field& omega, double alpha,
                    double p, double rho, const LogTimeGrid& tgrid);

// Space-time potential: integral over (0, rho] and {|x-y|_inf < t} of
// (mu(Q_t(y))/t^{n-alpha})^{1/(p-1)} w(y)^{-1/(p-1)} t^{-(n-alpha)} dy dt/t.
Field nonlinear_V_cal(const DiscreteMeasure& mu, const Field& omega, double alpha,
                      double p, double rho, const LogTimeGrid& tgrid);

}  // namespace capax
