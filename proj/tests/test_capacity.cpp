#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "capax/capacity.hpp"
#include "capax/common.hpp"
#include "capax/grid.hpp"
#include "capax/potentials.hpp"
#include "capax/weights.hpp"
#include "oracles.hpp"

using namespace capax;

namespace {

Field random_weight(Rng& rng, const Grid& g) {
    Field w(g);
    const double c = rng.uniform(-1.5, 1.5);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        double r = 0.0;
        for (int a = 0; a < g.dim; ++a)
            r = std::max(r, std::abs(g.center(i)[a]));
        w.values[i] = std::exp(c * r) * rng.uniform(0.8, 1.25);
    }
    return w;
}

TargetSet random_target(Rng& rng, const Grid& g, std::size_t count) {
    std::vector<std::size_t> cells;
    while (cells.size() < count) {
        const std::size_t c = rng.uniform_int(g.cell_count());
        if (std::find(cells.begin(), cells.end(), c) == cells.end())
            cells.push_back(c);
    }
    std::sort(cells.begin(), cells.end());
    return TargetSet::from_cells(g, cells);
}

}  // namespace

TEST_CASE("empty target sets have zero capacity") {
    const Grid g = make_grid(1, 1.0 / 16, {-1.0, 0.0}, {1.0, 0.0});
    const Field w(g, 1.0);
    const TargetSet empty = TargetSet::from_cells(g, {});
    const LocalRieszKernel ker{0.5, 0.5};

    for (const CapacitySolution& sol :
         {capacity_primal(empty, w, ker, 2.0),
          capacity_dual(empty, w, ker, 2.0),
          capacity_variant_R(empty, w, 0.5, 2.0, 0.5),
          bessel_capacity(empty, w, 2.0, 0.5)}) {
        CHECK(sol.value == 0.0);
        CHECK(sol.value_lower == 0.0);
        CHECK(sol.converged);
        for (double v : sol.primal_f.values) CHECK(v == 0.0);
    }
}

TEST_CASE("single-cell capacity matches the closed form") {
    const Grid g = make_grid(1, 0.125, {-1.0, 0.0}, {1.0, 0.0});
    const LocalRieszKernel ker{0.5, 1.0};
    for (double p : {1.5, 2.0, 3.0}) {
        Rng rng(100 + static_cast<std::uint64_t>(10 * p));
        const Field w = random_weight(rng, g);
        const TargetSet E = TargetSet::from_cells(g, {5});
        const CapacitySolution sol = capacity_primal(E, w, ker, p);
        const double exact = oracle::single_cell_capacity(g, 5, w, ker, p);
        CHECK(sol.value == doctest::Approx(exact).epsilon(1e-4));
        CHECK(sol.value_lower == doctest::Approx(exact).epsilon(1e-4));
        CHECK(sol.value_lower <= exact * (1.0 + 1e-9));
        CHECK(sol.value >= exact * (1.0 - 1e-9));
    }
}

TEST_CASE("solver agrees with the generic subgradient oracle") {
    Rng rng(71);
    const Grid g = make_grid(1, 0.125, {-1.0, 0.0}, {1.0, 0.0});
    const LocalRieszKernel ker{0.5, 0.75};
    for (int trial = 0; trial < 3; ++trial) {
        const Field w = random_weight(rng, g);
        const double p = trial == 0 ? 2.0 : rng.uniform(1.6, 2.8);
        const TargetSet E = random_target(rng, g, 3 + trial);
        const CapacitySolution sol = capacity_primal(E, w, ker, p);
        const auto ref =
            oracle::subgradient_capacity(g, E.cells, w, ker, p, 1e-6, 50000);
        CHECK(ref.gap < 1e-4);
        const double mid = 0.5 * (ref.upper + ref.lower);
        CHECK(sol.value == doctest::Approx(mid).epsilon(1e-4));
        // certified intervals must overlap
        CHECK(sol.value_lower <= ref.upper * (1.0 + 1e-9));
        CHECK(ref.lower <= sol.value * (1.0 + 1e-9));
    }
}

TEST_CASE("dual certificates survive an independent recheck") {
    Rng rng(73);
    const Grid g = make_grid(1, 0.125, {-1.0, 0.0}, {1.0, 0.0});
    const LocalRieszKernel ker{0.5, 0.75};
    const Field w = random_weight(rng, g);
    const TargetSet E = random_target(rng, g, 4);
    const CapacitySolution sol = capacity_primal(E, w, ker, 2.0);
    CHECK(sol.converged);
    CHECK(sol.gap <= 1e-3);
    CHECK(sol.value_lower <= sol.value * (1.0 + 1e-12));  // weak duality

    const auto re =
        oracle::recheck_certificates(g, E.cells, w, ker, 2.0, sol.dual_raw);
    CHECK(re.lower == doctest::Approx(sol.value_lower).epsilon(1e-9));
    CHECK(re.upper >= sol.value_lower * (1.0 - 1e-9));
    CHECK(sol.value <= re.upper * (1.0 + 1e-9));

    // the reported measure is admissible and consistent with dual_raw
    double mass = 0.0;
    for (double m : sol.dual_mu.masses) mass += m;
    CHECK(mass ==
          doctest::Approx(std::pow(sol.value_lower, 0.5)).epsilon(1e-9));
}

TEST_CASE("obstacle scaling moves the value by the p-th power") {
    const Grid g = make_grid(1, 0.125, {-1.0, 0.0}, {1.0, 0.0});
    const Field w(g, 1.0);
    const LocalRieszKernel ker{0.5, 0.75};
    const TargetSet E = TargetSet::from_cells(g, {4, 9, 12});
    const CapacitySolution base = capacity_primal(E, w, ker, 2.0);
    const std::vector<double> obstacle(E.cells.size(), 3.0);
    const CapacitySolution scaled = capacity_primal(E, w, ker, 2.0, obstacle);
    CHECK(scaled.value == doctest::Approx(9.0 * base.value).epsilon(1e-6));

    CHECK_THROWS_AS(capacity_primal(E, w, ker, 1.0), usage_error);
    CHECK_THROWS_AS(capacity_primal(E, w, ker, 2.0, {1.0}), usage_error);
    CHECK_THROWS_AS(capacity_primal(E, w, ker, 2.0, {1.0, -1.0, 1.0}),
                    usage_error);
}

TEST_CASE("equilibrium measure of a single cell") {
    const Grid g = make_grid(1, 0.125, {-2.0, 0.0}, {2.0, 0.0});
    const Field w(g, 1.0);
    const TargetSet E = TargetSet::from_cells(g, {12});
    const EquilibriumMeasure eq = equilibrium_measure(E, w, 0.5, 2.0, 0.5);
    double mass = 0.0;
    for (double m : eq.mu.masses) mass += m;
    CHECK(mass == doctest::Approx(eq.capacity).epsilon(1e-12));
    CHECK(eq.min_potential_on_set == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(eq.max_potential_on_support == doctest::Approx(1.0).epsilon(1e-8));
    // the mass sits on the constraint cell
    CHECK(eq.mu.masses[12] == doctest::Approx(mass).epsilon(1e-12));

    CHECK_THROWS_AS(
        equilibrium_measure(TargetSet::from_cells(g, {}), w, 0.5, 2.0, 0.5),
        solver_error);
}

TEST_CASE("flat-weight capacity is translation invariant") {
    const Grid g = make_grid(1, 0.125, {-2.0, 0.0}, {2.0, 0.0});
    const Field w(g, 1.0);
    const LocalRieszKernel ker{0.5, 0.5};
    // both sets keep a full rho-neighborhood inside the box
    const CapacitySolution a =
        capacity_primal(TargetSet::from_cells(g, {8, 10}), w, ker, 2.0);
    const CapacitySolution b =
        capacity_primal(TargetSet::from_cells(g, {18, 20}), w, ker, 2.0);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-10));
    CHECK(a.value_lower == doctest::Approx(b.value_lower).epsilon(1e-10));
}

TEST_CASE("cube capacity formula has the logarithmic closed form") {
    const Grid g = make_grid(1, 1.0 / 64, {-2.0, 0.0}, {2.0, 0.0});
    const Field w(g, 1.0);
    const double rho = 0.5;
    for (double r : {0.125, 0.25, 0.5, 0.9}) {
        const double got = capacity_cube_formula({0.0, 0.0}, r, w, 0.5, 2.0, rho);
        CHECK(got ==
              doctest::Approx(1.0 / (2.0 * std::log(2.0 * rho / r)))
                  .epsilon(1e-12));
    }
    CHECK(std::isinf(capacity_cube_formula({0.0, 0.0}, 2.0 * rho, w, 0.5, 2.0, rho)));
    CHECK_THROWS_AS(capacity_cube_formula({0.0, 0.0}, 2.5 * rho, w, 0.5, 2.0, rho),
                    usage_error);
    CHECK_THROWS_AS(capacity_cube_formula({0.0, 0.0}, 0.25, w, 0.5, 1.0, rho),
                    usage_error);
}

TEST_CASE("cube capacities track the weight-over-scale ratio") {
    const double rho = 0.5;
    const double alpha = 0.5, p = 2.0;
    double band[2];
    int slot = 0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        const Grid g = make_grid(1, h, {-2.0, 0.0}, {2.0, 0.0});
        const Field w = weight_exp(g, 1.0);
        const TargetSet E = TargetSet::from_box(g, {-rho, 0.0}, {rho, 0.0});
        const CapacitySolution sol =
            capacity_primal(E, w, LocalRieszKernel{alpha, rho}, p);
        double wq = 0.0;
        for (std::size_t i = 0; i < g.cell_count(); ++i)
            if (std::abs(g.center(i)[0]) < rho)
                wq += w.values[i] * g.cell_volume();
        band[slot++] = sol.value * std::pow(rho, alpha * p) / wq;
    }
    CHECK(band[0] > 1e-2);
    CHECK(band[0] < 1e2);
    CHECK(band[1] / band[0] > 0.5);
    CHECK(band[1] / band[0] < 2.0);
    // the quadrature formula lands within a modest factor of the solver
    const Grid g = make_grid(1, 1.0 / 64, {-2.0, 0.0}, {2.0, 0.0});
    const Field w = weight_exp(g, 1.0);
    const TargetSet E = TargetSet::from_box(g, {-0.25, 0.0}, {0.25, 0.0});
    const double solver =
        capacity_primal(E, w, LocalRieszKernel{alpha, rho}, p).value;
    const double formula =
        capacity_cube_formula({0.0, 0.0}, 0.25, w, alpha, p, rho);
    CHECK(solver / formula > 0.1);
    CHECK(solver / formula < 10.0);
}

TEST_CASE("space-time capacity is comparable to the pointwise one") {
    const Grid g = make_grid(1, 1.0 / 16, {-1.0, 0.0}, {1.0, 0.0});
    const Field w = weight_exp(g, -1.0);
    const TargetSet E = TargetSet::from_cells(g, {14, 15, 16, 20});
    const CapacitySolution rv = capacity_variant_R(E, w, 0.5, 2.0, 0.25);
    CHECK(rv.converged);
    CHECK(rv.value > 0.0);
    CHECK(rv.value_lower <= rv.value * (1.0 + 1e-12));
    CHECK(rv.gap <= 1e-3);
    const CapacitySolution r =
        capacity_primal(E, w, LocalRieszKernel{0.5, 0.25}, 2.0);
    const double ratio = rv.value / r.value;
    CHECK(ratio > 1e-2);
    CHECK(ratio < 1e2);
}

TEST_CASE("bessel capacity is comparable to riesz for a flat weight") {
    const Grid g = make_grid(1, 1.0 / 16, {-1.0, 0.0}, {1.0, 0.0});
    const Field w(g, 1.0);
    const TargetSet E = TargetSet::from_box(g, {-0.25, 0.0}, {0.25, 0.0});
    const CapacitySolution b = bessel_capacity(E, w, 2.0, 0.5);
    const CapacitySolution r =
        capacity_primal(E, w, LocalRieszKernel{0.5, 0.5}, 2.0);
    CHECK(b.converged);
    CHECK(b.value > 0.0);
    const double ratio = b.value / r.value;
    CHECK(ratio > 1e-2);
    CHECK(ratio < 1e2);
}

TEST_CASE("capacity is monotone and subadditive") {
    Rng rng(79);
    const Grid g = make_grid(1, 0.125, {-1.0, 0.0}, {1.0, 0.0});
    const LocalRieszKernel ker{0.5, 0.5};
    for (int trial = 0; trial < 3; ++trial) {
        const Field w = random_weight(rng, g);
        const TargetSet small = random_target(rng, g, 2);
        const TargetSet extra = random_target(rng, g, 3);
        const TargetSet big = unite(small, extra);
        const double vs = capacity_primal(small, w, ker, 2.0).value;
        const double ve = capacity_primal(extra, w, ker, 2.0).value;
        const double vb = capacity_primal(big, w, ker, 2.0).value;
        CHECK(vs <= vb * (1.0 + 1e-4));
        CHECK(vb <= (vs + ve) * (1.0 + 1e-4));
    }
}

TEST_CASE("larger interaction radius can only lower the capacity") {
    Rng rng(83);
    const Grid g = make_grid(1, 0.125, {-2.0, 0.0}, {2.0, 0.0});
    const Field w = random_weight(rng, g);
    const TargetSet E = random_target(rng, g, 4);
    const double v1 = capacity_primal(E, w, LocalRieszKernel{0.5, 0.25}, 2.0).value;
    const double v2 = capacity_primal(E, w, LocalRieszKernel{0.5, 0.5}, 2.0).value;
    const double v4 = capacity_primal(E, w, LocalRieszKernel{0.5, 1.0}, 2.0).value;
    CHECK(v2 <= v1 * (1.0 + 1e-4));
    CHECK(v4 <= v2 * (1.0 + 1e-4));
    // and the drop is a bounded factor on generic instances
    CHECK(v1 <= 50.0 * v4);
}

TEST_CASE("thinness diagnostic partial sums") {
    const Grid g = make_grid(1, 1.0 / 64, {-1.0, 0.0}, {1.0, 0.0});
    const Field w(g, 1.0);
    const double rho = 0.5;

    const TargetSet empty = TargetSet::from_cells(g, {});
    const ThinnessReport re =
        thinness_diagnostic(empty, {0.0, 0.0}, w, 0.5, 2.0, rho, 3);
    for (double c : re.capacities) CHECK(c == 0.0);
    CHECK(re.thinness_partial.back() == 0.0);

    const TargetSet full = TargetSet::from_box(g, {-rho, 0.0}, {rho, 0.0});
    const ThinnessReport rf =
        thinness_diagnostic(full, {0.0, 0.0}, w, 0.5, 2.0, rho, 4);
    REQUIRE(rf.capacities.size() == 5);
    for (std::size_t k = 1; k < rf.capacities.size(); ++k)
        CHECK(rf.capacities[k] <= rf.capacities[k - 1] * (1.0 + 1e-4));
    for (std::size_t k = 1; k < rf.thinness_partial.size(); ++k)
        CHECK(rf.thinness_partial[k] >=
              rf.thinness_partial[k - 1] * (1.0 - 1e-12));
    CHECK(rf.thinness_partial.back() > rf.thinness_partial.front());
    CHECK(std::isfinite(rf.divergence_partial.back()));

    // a point far from the set: every intersection is empty
    const TargetSet corner = TargetSet::from_cells(g, {0, 1});
    const ThinnessReport rc =
        thinness_diagnostic(corner, {0.9, 0.0}, w, 0.5, 2.0, rho, 3);
    for (double c : rc.capacities) CHECK(c == 0.0);
    CHECK(std::isfinite(rc.thinness_partial.back()));
    CHECK(rc.thinness_partial.back() == 0.0);

    CHECK_THROWS_AS(
        thinness_diagnostic(full, {0.0, 0.0}, w, 0.5, 2.0, rho, 12),
        usage_error);
}
