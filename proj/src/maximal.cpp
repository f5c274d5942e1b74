#include "capax/maximal.hpp"

#include <cmath>

namespace capax {

namespace {

Field abs_field(const Field& f) {
    Field out = f;
    for (double& v : out.values) v = std::abs(v);
    return out;
}

std::vector<double> dyadic_radii(double h, double r_max) {
    std::vector<double> radii;
    for (double r = h; r <= r_max * (1.0 + 1e-12); r *= 2.0) radii.push_back(r);
    return radii;
}

}  // namespace

Field uncentered_local_maximal(const Field& f, double rho, const CubeLattice& lattice) {
    const Field g = abs_field(f);
    const Grid& gr = g.grid;
    Field out = g;  // the single-cell cube gives |f| as the floor

    // One pass per cube: push its average to every cell center it contains.
    for (const CubeSpec& q : lattice.cubes) {
        if (2.0 * q.half_len > rho * (1.0 + 1e-12)) continue;
        double avg;
        try {
            avg = cube_average(g, q);
        } catch (const usage_error&) {
            continue;  // cube entirely outside the box
        }
        int lo[2] = {0, 0}, hi[2] = {0, 0};
        bool empty = false;
        for (int a = 0; a < gr.dim; ++a) {
            const double lo_coord = q.center[a] - q.half_len;
            const double hi_coord = q.center[a] + q.half_len;
            int i_lo = static_cast<int>(std::floor((lo_coord - gr.origin[a]) / gr.h - 0.5)) + 1;
            int i_hi = static_cast<int>(std::ceil((hi_coord - gr.origin[a]) / gr.h - 0.5)) - 1;
            while (gr.origin[a] + (i_lo + 0.5) * gr.h <= lo_coord) ++i_lo;
            while (i_lo > 0 && gr.origin[a] + (i_lo - 0.5) * gr.h > lo_coord) --i_lo;
            while (gr.origin[a] + (i_hi + 0.5) * gr.h >= hi_coord) --i_hi;
            while (i_hi + 1 < gr.shape[a] && gr.origin[a] + (i_hi + 1.5) * gr.h < hi_coord)
                ++i_hi;
            lo[a] = std::max(i_lo, 0);
            hi[a] = std::min(i_hi, gr.shape[a] - 1);
            if (hi[a] < lo[a]) empty = true;
        }
        if (empty) continue;
        if (gr.dim == 1) {
            for (int ix = lo[0]; ix <= hi[0]; ++ix) {
                double& v = out.values[static_cast<std::size_t>(ix)];
                v = std::max(v, avg);
            }
        } else {
            for (int iy = lo[1]; iy <= hi[1]; ++iy) {
                const std::size_t row = static_cast<std::size_t>(iy) * gr.shape[0];
                for (int ix = lo[0]; ix <= hi[0]; ++ix) {
                    double& v = out.values[row + ix];
                    v = std::max(v, avg);
                }
            }
        }
    }
    return out;
}

Field centered_local_maximal(const Field& f, double rho) {
    const Field g = abs_field(f);
    const Grid& gr = g.grid;
    const auto radii = dyadic_radii(gr.h, 0.5 * rho);
    Field out = g;
    parallel_for(gr.cell_count(), [&](std::size_t i) {
        const Point c = gr.center(i);
        double best = g.values[i];
        for (double r : radii) {
            best = std::max(best, cube_average(g, {c, r}));
        }
        out.values[i] = best;
    });
    return out;
}

Field fractional_local_maximal(const DiscreteMeasure& mu, double alpha, double rho) {
    const Grid& gr = mu.grid;
    if (!(alpha > 0.0 && alpha < gr.dim))
        throw usage_error("fractional maximal needs 0 < alpha < dim");
    const auto radii = dyadic_radii(gr.h, rho);
    Field out(gr, 0.0);
    parallel_for(gr.cell_count(), [&](std::size_t i) {
        const Point c = gr.center(i);
        double best = 0.0;
        for (double r : radii) {
            const double m = cube_mass(mu, {c, r});
            if (m > 0.0) best = std::max(best, m / std::pow(r, gr.dim - alpha));
        }
        out.values[i] = best;
    });
    return out;
}

MeasureMaximalResult measure_weighted_maximal(const Field& f, const DiscreteMeasure& mu,
                                              double rho) {
    if (!f.grid.same_layout(mu.grid))
        throw usage_error("measure_weighted_maximal: grid mismatch");
    const Field g = abs_field(f);
    const Grid& gr = g.grid;

    // mu-weighted integrand as a measure, so cube sums share the strict
    // center-inside membership with mu itself.
    DiscreteMeasure fmu(gr);
    for (std::size_t i = 0; i < fmu.masses.size(); ++i)
        fmu.masses[i] = g.values[i] * mu.masses[i];

    const auto radii = dyadic_radii(gr.h, 0.5 * rho);
    MeasureMaximalResult res;
    res.field = Field(gr, 0.0);
    std::vector<char> hit(gr.cell_count(), 0);
    parallel_for(gr.cell_count(), [&](std::size_t i) {
        // Uncentered family realized as all centered cubes that contain this
        // cell center; on the lattice those are cubes centered at nearby cells.
        const Point c = gr.center(i);
        double best = 0.0;
        bool any = false;
        if (mu.masses[i] > 0.0) {
            best = g.values[i];
            any = true;
        }
        for (double r : radii) {
            // Candidate centers are cell centers within r of c (strict).
            int lo[2] = {0, 0}, hi[2] = {0, 0};
            const int reach = static_cast<int>(std::ceil(r / gr.h)) ;
            const int ix = static_cast<int>(i % static_cast<std::size_t>(gr.shape[0]));
            const int iy = static_cast<int>(i / static_cast<std::size_t>(gr.shape[0]));
            lo[0] = std::max(ix - reach, 0);
            hi[0] = std::min(ix + reach, gr.shape[0] - 1);
            lo[1] = gr.dim == 2 ? std::max(iy - reach, 0) : 0;
            hi[1] = gr.dim == 2 ? std::min(iy + reach, gr.shape[1] - 1) : 0;
            for (int cy = lo[1]; cy <= hi[1]; ++cy) {
                for (int cx = lo[0]; cx <= hi[0]; ++cx) {
                    const std::size_t j =
                        static_cast<std::size_t>(cy) * gr.shape[0] + cx;
                    const CubeSpec q{gr.center(j), r};
                    if (!q.contains(c, gr.dim)) continue;
                    const double mass = cube_mass(mu, q);
                    if (!(mass > 0.0)) continue;
                    any = true;
                    best = std::max(best, cube_mass(fmu, q) / mass);
                }
            }
        }
        res.field.values[i] = best;
        hit[i] = any ? 1 : 0;
    });
    for (char c : hit)
        if (!c) res.all_cubes_empty_somewhere = true;
    return res;
}

}  // namespace capax
