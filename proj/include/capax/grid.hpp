#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "capax/common.hpp"

namespace capax {

using Point = std::array<double, 2>;  // second coordinate unused when dim == 1

/**
 * Uniform lattice of cells over a box in R^n, n in {1,2}. Cells are closed
 * cubes of side h; cell (ix,iy) has center origin + (i+1/2)h per axis and
 * linear index iy*shape[0] + ix.
 */
struct Grid {
    int dim = 1;
    double h = 1.0;
    Point origin{0.0, 0.0};        // lower corner of the box
    std::array<int, 2> shape{1, 1};  // cells per axis; shape[1] == 1 when dim == 1

    std::size_t cell_count() const {
        return static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]);
    }
    double cell_volume() const { return dim == 1 ? h : h * h; }

    Point center(std::size_t i) const {
        const int ix = static_cast<int>(i % static_cast<std::size_t>(shape[0]));
        const int iy = static_cast<int>(i / static_cast<std::size_t>(shape[0]));
        return {origin[0] + (ix + 0.5) * h, origin[1] + (iy + 0.5) * h};
    }

    Point box_lo() const { return origin; }
    Point box_hi() const {
        return {origin[0] + shape[0] * h, origin[1] + shape[1] * h};
    }

    bool same_layout(const Grid& other) const {
        return dim == other.dim && h == other.h && shape == other.shape &&
               origin == other.origin;
    }
};

/** Sup-norm cube Q_r(x): the set of y with |y - center|_inf < half_len. */
struct CubeSpec {
    Point center{0.0, 0.0};
    double half_len = 0.0;  // r, so the side length l(Q) is 2r

    bool contains(const Point& y, int dim) const {
        double d = std::abs(y[0] - center[0]);
        if (dim == 2) d = std::max(d, std::abs(y[1] - center[1]));
        return d < half_len;
    }
};

/** Finite cube family standing in for "all cubes with l(Q) <= rho". */
struct CubeLattice {
    std::vector<CubeSpec> cubes;
    double rho = 0.0;
};

enum class CubePolicy { centered, aligned };

/**
 * Geometric quadrature grid for integrals d t / t: midpoint nodes in log t,
 * equal log-spacing, nodes_per_octave nodes per factor of two.
 */
struct LogTimeGrid {
    double t_min = 0.0;
    double t_max = 0.0;
    int nodes_per_octave = 8;

    struct Node {
        double t;
        double w;  // weight for the d t / t measure (the log-step size)
    };
    std::vector<Node> nodes() const;

    static LogTimeGrid standard(double h, double rho) { return {0.5 * h, rho, 8}; }
};

/** Scalar samples per cell. Weights, maximal outputs, and potentials live here. */
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    Field(const Grid& g, double fill = 0.0) : grid(g), values(g.cell_count(), fill) {}
};

/** Nonnegative mass per cell. */
struct DiscreteMeasure {
    Grid grid;
    std::vector<double> masses;

    DiscreteMeasure() = default;
    explicit DiscreteMeasure(const Grid& g) : grid(g), masses(g.cell_count(), 0.0) {}

    double total() const;
};

// Builds the grid covering [lo, hi] per axis exactly; every side length must
// be an integer multiple of h. Throws usage_error otherwise or when the cell
// count would exceed cell_cap.
Grid make_grid(int dim, double h, const Point& lo, const Point& hi,
               std::size_t cell_cap = std::size_t{1} << 22);

// Grid-aligned cube family with dyadic half-lengths {h, 2h, 4h, ...} up to
// rho/2. Policy centered: one cube per cell center per half-length (may stick
// out of the box; averages clip). Policy aligned: cubes that are exact unions
// of cells, fully inside the box. Requires rho >= 2h.
CubeLattice enumerate_cubes(const Grid& grid, double rho, CubePolicy policy);

// Average of the field over Q intersected with the box; partial cells weighted
// by their exact overlap volume. Throws usage_error if Q misses the box.
double cube_average(const Field& field, const CubeSpec& cube);

// Integral of the field over Q intersected with the box (exact overlap), i.e.
// the weighted volume w(Q) when the field is a weight.
double cube_weighted_volume(const Field& field, const CubeSpec& cube);

// Total mass of cells whose centers lie strictly inside Q.
double cube_mass(const DiscreteMeasure& measure, const CubeSpec& cube);

}  // namespace capax
