#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace capax::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_1d(const Grid& g, const char* what) {
    if (g.dim != 1) throw usage_error(std::string(what) + ": 1d oracle");
}

}  // namespace

double ap_all_intervals(const Field& w, double p, double rho) {
    require_1d(w.grid, "ap_all_intervals");
    const std::size_t n = w.values.size();
    const double h = w.grid.h;
    const std::size_t max_cells = static_cast<std::size_t>(
        std::floor(rho / h * (1.0 + 1e-12)));
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sw = 0.0, ss = 0.0, smax = 0.0;
        for (std::size_t j = i; j < n && j - i < max_cells; ++j) {
            const double v = w.values[j];
            sw += v;
            const double len = static_cast<double>(j - i + 1);
            double prod;
            if (p > 1.0) {
                ss += std::pow(v, -1.0 / (p - 1.0));
                prod = (sw / len) * std::pow(ss / len, p - 1.0);
            } else {
                smax = std::max(smax, 1.0 / v);
                prod = (sw / len) * smax;
            }
            best = std::max(best, prod);
        }
    }
    return best;
}

double ainf_all_intervals(const Field& w, double rho) {
    require_1d(w.grid, "ainf_all_intervals");
    const std::size_t n = w.values.size();
    const double h = w.grid.h;
    const std::size_t max_cells = static_cast<std::size_t>(
        std::floor(rho / h * (1.0 + 1e-12)));
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sw = 0.0, sl = 0.0;
        for (std::size_t j = i; j < n && j - i < max_cells; ++j) {
            sw += w.values[j];
            sl += -std::log(w.values[j]);
            const double len = static_cast<double>(j - i + 1);
            best = std::max(best, (sw / len) * std::exp(sl / len));
        }
    }
    return best;
}

namespace {

// overlap-weighted average of |f| over the cube clipped to the box,
// recomputed cell by cell
double clipped_average(const Field& f, const CubeSpec& q) {
    const Grid& g = f.grid;
    double lo[2], hi[2];
    for (int a = 0; a < g.dim; ++a) {
        lo[a] = std::max(q.center[a] - q.half_len, g.origin[a]);
        hi[a] = std::min(q.center[a] + q.half_len, g.origin[a] + g.shape[a] * g.h);
        if (!(hi[a] > lo[a])) return 0.0;
    }
    double sum = 0.0, vol = 1.0;
    for (int a = 0; a < g.dim; ++a) vol *= hi[a] - lo[a];
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const Point c = g.center(i);
        double cover = 1.0;
        for (int a = 0; a < g.dim; ++a) {
            const double w = std::min(c[a] + 0.5 * g.h, hi[a]) -
                             std::max(c[a] - 0.5 * g.h, lo[a]);
            cover *= std::max(w, 0.0);
        }
        sum += std::abs(f.values[i]) * cover;
    }
    return sum / vol;
}

bool center_strictly_inside(const Point& c, const CubeSpec& q, int dim) {
    for (int a = 0; a < dim; ++a)
        if (!(std::abs(c[a] - q.center[a]) < q.half_len)) return false;
    return true;
}

}  // namespace

Field uncentered_rescan(const Field& f, double rho, const CubeLattice& lattice) {
    const Grid& g = f.grid;
    Field out(g, 0.0);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const Point c = g.center(i);
        double best = std::abs(f.values[i]);
        for (const CubeSpec& q : lattice.cubes) {
            if (2.0 * q.half_len > rho * (1.0 + 1e-12)) continue;
            if (!center_strictly_inside(c, q, g.dim)) continue;
            best = std::max(best, clipped_average(f, q));
        }
        out.values[i] = best;
    }
    return out;
}

Field measure_weighted_rescan(const Field& f, const DiscreteMeasure& mu,
                              double rho) {
    const Grid& g = f.grid;
    std::vector<double> radii;
    for (double r = g.h; r <= 0.5 * rho * (1.0 + 1e-12); r *= 2.0)
        radii.push_back(r);
    Field out(g, 0.0);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const Point c = g.center(i);
        double best = mu.masses[i] > 0.0 ? std::abs(f.values[i]) : 0.0;
        for (double r : radii) {
            for (std::size_t j = 0; j < g.cell_count(); ++j) {
                const CubeSpec q{g.center(j), r};
                if (!center_strictly_inside(c, q, g.dim)) continue;
                double num = 0.0, den = 0.0;
                for (std::size_t k = 0; k < g.cell_count(); ++k) {
                    if (!center_strictly_inside(g.center(k), q, g.dim)) continue;
                    num += std::abs(f.values[k]) * mu.masses[k];
                    den += mu.masses[k];
                }
                if (den > 0.0) best = std::max(best, num / den);
            }
        }
        out.values[i] = best;
    }
    return out;
}

double one_hot_centered_best(const Grid& g, std::size_t hot_cell,
                             std::size_t eval_cell, double rho) {
    require_1d(g, "one_hot_centered_best");
    const double x = g.center(eval_cell)[0];
    const double a = g.center(hot_cell)[0] - 0.5 * g.h;
    const double b = a + g.h;
    const double box_lo = g.origin[0];
    const double box_hi = g.origin[0] + g.shape[0] * g.h;
    double best = hot_cell == eval_cell ? 1.0 : 0.0;
    for (double r = g.h; r <= 0.5 * rho * (1.0 + 1e-12); r *= 2.0) {
        const double lo = std::max(x - r, box_lo);
        const double hi = std::min(x + r, box_hi);
        const double cover = std::max(0.0, std::min(b, hi) - std::max(a, lo));
        best = std::max(best, cover / (hi - lo));
    }
    return best;
}

double single_cell_capacity(const Grid& g, std::size_t cell, const Field& omega,
                            const PointKernel& kernel, double p) {
    const double pp = p / (p - 1.0);
    const double vol = g.cell_volume();
    const int nx = g.shape[0];
    const int jx = static_cast<int>(cell % static_cast<std::size_t>(nx));
    const int jy = static_cast<int>(cell / static_cast<std::size_t>(nx));
    double s = 0.0;
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        const int ix = static_cast<int>(i % static_cast<std::size_t>(nx));
        const int iy = static_cast<int>(i / static_cast<std::size_t>(nx));
        const int lag = std::max(std::abs(ix - jx), std::abs(iy - jy));
        const double b = kernel(lag * g.h, g.dim, g.h) * vol;
        if (b > 0.0)
            s += std::pow(b, pp) * std::pow(omega.values[i] * vol, 1.0 - pp);
    }
    return std::pow(s, 1.0 - p);
}

namespace {

// explicit constraint matrix: row j, column i is K(|c_j - c_i|_sup) h^n
std::vector<double> dense_matrix(const Grid& g,
                                 const std::vector<std::size_t>& rows,
                                 const PointKernel& kernel) {
    const int nx = g.shape[0];
    const double vol = g.cell_volume();
    const std::size_t n = g.cell_count();
    std::vector<double> B(rows.size() * n);
    for (std::size_t jj = 0; jj < rows.size(); ++jj) {
        const int jx = static_cast<int>(rows[jj] % static_cast<std::size_t>(nx));
        const int jy = static_cast<int>(rows[jj] / static_cast<std::size_t>(nx));
        for (std::size_t i = 0; i < n; ++i) {
            const int ix = static_cast<int>(i % static_cast<std::size_t>(nx));
            const int iy = static_cast<int>(i / static_cast<std::size_t>(nx));
            const int lag = std::max(std::abs(ix - jx), std::abs(iy - jy));
            B[jj * n + i] = kernel(lag * g.h, g.dim, g.h) * vol;
        }
    }
    return B;
}

struct DualEval {
    double G = 0.0, S = 0.0;
    std::vector<double> a, bf;
    double min_ratio = kInf;
};

void eval_dual(const std::vector<double>& B, std::size_t m, std::size_t n,
               const std::vector<double>& u, double p,
               const std::vector<double>& nu, DualEval& ev) {
    const double pp = p / (p - 1.0);
    ev.a.assign(n, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (nu[j] == 0.0) continue;
        const double* row = &B[j * n];
        for (std::size_t i = 0; i < n; ++i) ev.a[i] += row[i] * nu[j];
    }
    ev.G = 0.0;
    for (std::size_t j = 0; j < m; ++j) ev.G += nu[j];
    ev.S = 0.0;
    std::vector<double> f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (ev.a[i] > 0.0) {
            ev.S += std::pow(u[i], 1.0 - pp) * std::pow(ev.a[i], pp);
            f[i] = std::pow(ev.a[i] / u[i], pp - 1.0);
        }
    }
    ev.bf.assign(m, 0.0);
    ev.min_ratio = kInf;
    for (std::size_t j = 0; j < m; ++j) {
        const double* row = &B[j * n];
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += row[i] * f[i];
        ev.bf[j] = s;
        ev.min_ratio = std::min(ev.min_ratio, s);
    }
}

}  // namespace

SubgradientBounds subgradient_capacity(const Grid& g,
                                       const std::vector<std::size_t>& rows,
                                       const Field& omega,
                                       const PointKernel& kernel, double p,
                                       double tol, std::size_t max_iter) {
    const std::size_t m = rows.size();
    const std::size_t n = g.cell_count();
    const std::vector<double> B = dense_matrix(g, rows, kernel);
    const double vol = g.cell_volume();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = omega.values[i] * vol;

    std::vector<double> nu(m, 1.0);
    DualEval ev;
    SubgradientBounds out;
    for (std::size_t k = 1; k <= max_iter; ++k) {
        eval_dual(B, m, n, u, p, nu, ev);
        if (!(ev.S > 0.0) || !(ev.G > 0.0)) break;

        // snap the iterate onto its optimal ray; there F(nu) = -lower
        const double c = std::pow(ev.G / ev.S, p - 1.0);
        for (auto& v : nu) v *= c;
        const double lower = std::pow(ev.G, p) * std::pow(ev.S, 1.0 - p);
        out.lower = std::max(out.lower, lower);
        if (ev.min_ratio > 0.0) {
            // scale free: the rescaled primal from the pre-snap point
            const double up = ev.S / std::pow(ev.min_ratio, p);
            out.upper = out.upper == 0.0 ? up : std::min(out.upper, up);
        }
        out.iterations = k;
        if (out.upper > 0.0 && out.lower > 0.0) {
            out.gap = 1.0 - std::pow(out.lower / out.upper, 1.0 / p);
            if (out.gap <= tol) break;
        }

        // Polyak step toward F_hat = -best_upper, with the gradient taken
        // at the rescaled point (grad scales by c^{1/(p-1)} through Bf).
        const double cf = std::pow(c, 1.0 / (p - 1.0));
        double gnorm2 = 0.0;
        std::vector<double> grad(m);
        for (std::size_t j = 0; j < m; ++j) {
            grad[j] = p * (ev.bf[j] * cf - 1.0);
            gnorm2 += grad[j] * grad[j];
        }
        if (!(gnorm2 > 0.0)) break;
        const double fcur = -lower;
        const double ftarget = out.upper > 0.0 ? -out.upper : fcur - 1.0;
        double step = 0.7 * (fcur - ftarget) / gnorm2;
        if (!(step > 0.0)) step = 1.0 / (p * gnorm2 * std::sqrt(double(k)));
        for (std::size_t j = 0; j < m; ++j)
            nu[j] = std::max(0.0, nu[j] - step * grad[j]);
        bool alive = false;
        for (double v : nu) alive = alive || v > 0.0;
        if (!alive) nu.assign(m, 1.0);
    }
    if (out.upper == 0.0) out.upper = kInf;
    return out;
}

SubgradientBounds recheck_certificates(const Grid& g,
                                       const std::vector<std::size_t>& rows,
                                       const Field& omega,
                                       const PointKernel& kernel, double p,
                                       const std::vector<double>& nu) {
    const std::size_t m = rows.size();
    const std::size_t n = g.cell_count();
    const std::vector<double> B = dense_matrix(g, rows, kernel);
    const double vol = g.cell_volume();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = omega.values[i] * vol;
    DualEval ev;
    eval_dual(B, m, n, u, p, nu, ev);
    SubgradientBounds out;
    if (ev.S > 0.0 && ev.G > 0.0)
        out.lower = std::pow(ev.G, p) * std::pow(ev.S, 1.0 - p);
    out.upper = ev.S > 0.0 && ev.min_ratio > 0.0
                    ? ev.S / std::pow(ev.min_ratio, p)
                    : kInf;
    if (out.upper > 0.0 && out.lower > 0.0 && out.upper < kInf)
        out.gap = 1.0 - std::pow(out.lower / out.upper, 1.0 / p);
    return out;
}

double layer_cake_descending(const Field& f, double q,
                             const std::function<double(const TargetSet&)>& C) {
    std::vector<double> levels;
    for (double v : f.values)
        if (v > 0.0) levels.push_back(v);
    std::sort(levels.begin(), levels.end(), std::greater<double>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double top = levels[k];
        const double next = k + 1 < levels.size() ? levels[k + 1] : 0.0;
        sum += C(TargetSet::from_indicator(f, next)) *
               (std::pow(top, q) - std::pow(next, q));
    }
    return sum;
}

}  // namespace capax::oracle
