#pragma once

#include "capax/grid.hpp"

namespace capax {

// Uncentered local maximal: at each cell center, the max of Avg_Q |f| over
// lattice cubes with l(Q) <= rho containing the center, always including the
// cell itself (so the output dominates |f|).
Field uncentered_local_maximal(const Field& f, double rho, const CubeLattice& lattice);

// Centered local maximal: max over dyadic r in {h, 2h, ...} with 2r <= rho of
// Avg over Q_r(x).
Field centered_local_maximal(const Field& f, double rho);

// Fractional maximal of a measure: max over dyadic r <= rho of
// mu(Q_r(x)) / r^{n - alpha}; requires 0 < alpha < dim.
Field fractional_local_maximal(const DiscreteMeasure& mu, double alpha, double rho);

// Uncentered maximal with respect to the measure mu: sup over admissible cubes
// of the mu-average of |f|; cubes with mu(Q) = 0 are skipped. Cells where no
// cube has positive mass get value 0 (flagged via the return's second member).
struct MeasureMaximalResult {
    Field field;
    bool all_cubes_empty_somewhere = false;
};
MeasureMaximalResult measure_weighted_maximal(const Field& f, const DiscreteMeasure& mu,
                                              double rho);

}  // namespace capax
