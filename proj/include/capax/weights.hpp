#pragma once

#include <limits>
#include <utility>

#include "capax/grid.hpp"

namespace capax {

/** Measured Muckenhoupt constant with the cube that attains it. */
struct ApReport {
    double p = 1.0;  // infinity() marks the A-infinity report
    double rho = 0.0;
    double constant = 1.0;
    CubeSpec argmax_cube;
};

/** Reverse Holder certificate: (Avg_Q w^{1+gamma})^{1/(1+gamma)} <= C Avg_Q w. */
struct ReverseHolderCert {
    double gamma = 0.0;  // 0 with validated == false when the ladder is exhausted
    double constant = 1.0;
    double rho = 0.0;
    bool validated = false;
};

struct A1Decomposition {
    Field k;        // bounded factor, <= 1 on the grid
    Field f;        // w^{1/epsilon}
    double epsilon; // 1/(1+gamma)
};

Field weight_power(const Grid& grid, double a);  // w(x) = |x|_inf^a
Field weight_exp(const Grid& grid, double c);    // w(x) = e^{c |x|_inf}
Field weight_product(const Field& w1, const Field& w2, double p);  // w1 w2^{1-p}
Field weight_truncate(const Field& w, double k);                   // min(w, k)

// w^{1/p} = w0^{(1-theta)/p0} w1^{theta/p1} with 1/p = (1-theta)/p0 + theta/p1.
std::pair<Field, double> weight_interpolate(const Field& w0, double p0,
                                            const Field& w1, double p1, double theta);

// w' = w^{1-p'} = w^{-1/(p-1)}; requires p > 1.
Field dual_weight(const Field& w, double p);

double conjugate_exponent(double p);  // p' = p/(p-1)

// Max over lattice cubes of Avg_Q w (Avg_Q w^{-1/(p-1)})^{p-1} for p > 1, or
// Avg_Q w times the grid max of w^{-1} over Q for p = 1.
ApReport ap_loc_constant(const Field& w, double p, const CubeLattice& lattice);

// Max over cubes of Avg_Q w exp(Avg_Q log w^{-1}).
ApReport ainf_loc_constant(const Field& w, const CubeLattice& lattice);

// Largest gamma on the ladder {2^0, ..., 2^-12} whose certificate holds on all
// lattice cubes with l(Q) <= rho/3, with C computed from the measured
// A_{p;rho} constant. An exhausted ladder returns gamma 0, validated false.
ReverseHolderCert reverse_holder_search(const Field& w, double p,
                                        const CubeLattice& lattice);

// The certificate constant as a function of the measured A_p constant.
double reverse_holder_constant(double ap_constant, double p, int dim);

// Input defined exactly on the cube [origin, origin + rho]^n of its own grid;
// output on `target`: even reflection across each axis then 2 rho periodic.
Field extend_periodic(const Field& w_on_cube, double rho, const Grid& target);

// w = k (M_rho^loc f)^epsilon with f = w^{1/epsilon}, epsilon = 1/(1+gamma)
// from the reverse Holder search at p = 1 and scale 3 rho.
A1Decomposition decompose_a1(const Field& w, double rho);

}  // namespace capax
