#include "capax/potentials.hpp"

#include <cmath>

#include "capax/weights.hpp"

namespace capax {

namespace {

// Dense convolution against a kernel of the center-to-center sup distance,
// via a per-axis lag table.
template <typename Kernel>
Field convolve_masses(const Grid& g, const std::vector<double>& masses,
                      const Kernel& kernel) {
    const int nx = g.shape[0];
    const int ny = g.shape[1];
    std::vector<double> table;
    if (g.dim == 1) {
        table.resize(static_cast<std::size_t>(nx));
        for (int d = 0; d < nx; ++d) table[d] = kernel(d * g.h, 1, g.h);
    } else {
        table.resize(static_cast<std::size_t>(nx) * ny);
        for (int dy = 0; dy < ny; ++dy)
            for (int dx = 0; dx < nx; ++dx)
                table[static_cast<std::size_t>(dy) * nx + dx] =
                    kernel(std::max(dx, dy) * g.h, 2, g.h);
    }
    Field out(g, 0.0);
    if (g.dim == 1) {
        parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
            double s = 0.0;
            for (int j = 0; j < nx; ++j)
                s += table[static_cast<std::size_t>(std::abs(static_cast<int>(i) - j))] *
                     masses[static_cast<std::size_t>(j)];
            out.values[i] = s;
        });
    } else {
        parallel_for(g.cell_count(), [&](std::size_t i) {
            const int ix = static_cast<int>(i % static_cast<std::size_t>(nx));
            const int iy = static_cast<int>(i / static_cast<std::size_t>(nx));
            double s = 0.0;
            for (int jy = 0; jy < ny; ++jy) {
                const std::size_t trow =
                    static_cast<std::size_t>(std::abs(iy - jy)) * nx;
                const std::size_t mrow = static_cast<std::size_t>(jy) * nx;
                for (int jx = 0; jx < nx; ++jx)
                    s += table[trow + std::abs(ix - jx)] * masses[mrow + jx];
            }
            out.values[i] = s;
        });
    }
    return out;
}

std::vector<double> density_masses(const Field& f) {
    std::vector<double> m(f.values.size());
    const double vol = f.grid.cell_volume();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = f.values[i] * vol;
    return m;
}

void check_alpha(double alpha, int dim) {
    if (!(alpha > 0.0 && alpha < dim))
        throw usage_error("kernel order alpha must satisfy 0 < alpha < dim");
}

}  // namespace

Field riesz_convolve(const DiscreteMeasure& mu, double alpha, double rho) {
    check_alpha(alpha, mu.grid.dim);
    return convolve_masses(mu.grid, mu.masses, LocalRieszKernel{alpha, rho});
}

Field riesz_convolve(const Field& f, double alpha, double rho) {
    check_alpha(alpha, f.grid.dim);
    return convolve_masses(f.grid, density_masses(f), LocalRieszKernel{alpha, rho});
}

Field bessel_convolve(const DiscreteMeasure& mu, double alpha) {
    check_alpha(alpha, mu.grid.dim);
    return convolve_masses(mu.grid, mu.masses, BesselKernelApprox{alpha});
}

Field bessel_convolve(const Field& f, double alpha) {
    check_alpha(alpha, f.grid.dim);
    return convolve_masses(f.grid, density_masses(f), BesselKernelApprox{alpha});
}

Field nonlinear_potential_V(const DiscreteMeasure& mu, const Field& omega,
                            double alpha, double p, double rho) {
    if (!(p > 1.0)) throw usage_error("nonlinear potential needs p > 1");
    const Field u = riesz_convolve(mu, alpha, rho);
    const Field wdual = dual_weight(omega, p);
    Field g(u.grid);
    const double e = conjugate_exponent(p) - 1.0;
    for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] = std::pow(u.values[i], e) * wdual.values[i];
    return riesz_convolve(g, alpha, rho);
}

Field wolff_cal(const DiscreteMeasure& mu, const Field& omega, double alpha,
                double p, double rho, const LogTimeGrid& tgrid) {
    if (!(p > 1.0)) throw usage_error("wolff potential needs p > 1");
    if (tgrid.t_max > rho * (1.0 + 1e-12))
        throw usage_error("wolff quadrature exceeds rho");
    const Grid& g = mu.grid;
    check_alpha(alpha, g.dim);
    const auto nodes = tgrid.nodes();
    const double inv_pm1 = 1.0 / (p - 1.0);
    const double ap = alpha * p;
    const double vol = g.cell_volume();

    Field out(g, 0.0);
    parallel_for(g.cell_count(), [&](std::size_t i) {
        const Point c = g.center(i);
        double s = 0.0;
        for (const auto& nd : nodes) {
            const CubeSpec q{c, nd.t};
            const double m = cube_mass(mu, q);
            if (!(m > 0.0)) continue;
            const double wq = cube_weighted_volume(omega, q);
            s += std::pow(std::pow(nd.t, ap) * m / wq, inv_pm1) * nd.w;
        }
        // Below t_min the ratio mu(Q_t)/w(Q_t) is the cell's own density
        // ratio; the remaining factor integrates to (p-1)/(alpha p) t^{ap/(p-1)}.
        if (mu.masses[i] > 0.0) {
            s += std::pow(mu.masses[i] / (omega.values[i] * vol), inv_pm1) *
                 (p - 1.0) / ap * std::pow(tgrid.t_min, ap * inv_pm1);
        }
        out.values[i] = s;
    });
    return out;
}

Field wolff_variant(const DiscreteMeasure& mu, const Field& omega, double alpha,
                    double p, double rho, const LogTimeGrid& tgrid) {
    if (!(p > 1.0)) throw usage_error("wolff potential needs p > 1");
    if (tgrid.t_max > rho * (1.0 + 1e-12))
        throw usage_error("wolff quadrature exceeds rho");
    const Grid& g = mu.grid;
    check_alpha(alpha, g.dim);
    const Field wdual = dual_weight(omega, p);
    const auto nodes = tgrid.nodes();
    const double inv_pm1 = 1.0 / (p - 1.0);
    const double ap = alpha * p;
    const int n = g.dim;

    Field out(g, 0.0);
    parallel_for(g.cell_count(), [&](std::size_t i) {
        const Point c = g.center(i);
        double s = 0.0;
        for (const auto& nd : nodes) {
            const CubeSpec q{c, nd.t};
            const double m = cube_mass(mu, q);
            if (!(m > 0.0)) continue;
            s += std::pow(m / std::pow(nd.t, n - ap), inv_pm1) *
                 cube_average(wdual, q) * nd.w;
        }
        // Mass uniform within the cell below t_min: mu(Q_t) = m (2t)^n / h^n,
        // so the integrand is (m 2^n/h^n)^{1/(p-1)} w'(x) t^{ap/(p-1) - 1}.
        if (mu.masses[i] > 0.0) {
            const double dens = mu.masses[i] * std::pow(2.0, n) / std::pow(g.h, n);
            s += std::pow(dens, inv_pm1) * wdual.values[i] * (p - 1.0) / ap *
                 std::pow(tgrid.t_min, ap * inv_pm1);
        }
        out.values[i] = s;
    });
    return out;
}

Field nonlinear_V_cal(const DiscreteMeasure& mu, const Field& omega, double alpha,
                      double p, double rho, const LogTimeGrid& tgrid) {
    if (!(p > 1.0)) throw usage_error("space-time potential needs p > 1");
    const Grid& g = mu.grid;
    check_alpha(alpha, g.dim);
    const auto nodes = tgrid.nodes();
    const double inv_pm1 = 1.0 / (p - 1.0);
    const int n = g.dim;

    Field out(g, 0.0);
    // Per node: build the spatial profile, then integrate it over the moving
    // window {|x - y|_inf < t} with exact cell overlap.
    Field profile(g, 0.0);
    for (const auto& nd : nodes) {
        const double tker = std::pow(nd.t, -(n - alpha));
        parallel_for(g.cell_count(), [&](std::size_t j) {
            const double m = cube_mass(mu, {g.center(j), nd.t});
            profile.values[j] =
                m > 0.0 ? std::pow(m * tker, inv_pm1) *
                              std::pow(omega.values[j], -inv_pm1)
                        : 0.0;
        });
        parallel_for(g.cell_count(), [&](std::size_t i) {
            const double inner =
                cube_weighted_volume(profile, {g.center(i), nd.t});
            out.values[i] += inner * tker * nd.w;
        });
    }
    return out;
}

}  // namespace capax
