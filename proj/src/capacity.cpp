#include "capax/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "capax/weights.hpp"

namespace capax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_layout(const Field& f, const Grid& g, const char* what) {
    if (!f.grid.same_layout(g))
        throw usage_error(std::string(what) + " lives on a different grid");
}

CapacitySolution zero_solution(const Grid& g) {
    CapacitySolution sol;
    sol.primal_f = Field(g, 0.0);
    sol.primal_raw.assign(g.cell_count(), 0.0);
    sol.dual_mu = DiscreteMeasure(g);
    sol.converged = true;
    return sol;
}

}  // namespace

TargetSet TargetSet::from_box(const Grid& g, const Point& lo, const Point& hi) {
    TargetSet e;
    e.grid = g;
    const double slack = 1e-12 * std::max(1.0, g.h);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        const Point c = g.center(i);
        bool in = c[0] >= lo[0] - slack && c[0] <= hi[0] + slack;
        if (g.dim == 2) in = in && c[1] >= lo[1] - slack && c[1] <= hi[1] + slack;
        if (in) e.cells.push_back(i);
    }
    return e;
}

TargetSet TargetSet::from_cells(const Grid& g, std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    if (!idx.empty() && idx.back() >= g.cell_count())
        throw usage_error("target cell index outside the grid");
    TargetSet e;
    e.grid = g;
    e.cells = std::move(idx);
    return e;
}

TargetSet TargetSet::from_indicator(const Field& ind, double threshold) {
    TargetSet e;
    e.grid = ind.grid;
    for (std::size_t i = 0; i < ind.values.size(); ++i)
        if (ind.values[i] > threshold) e.cells.push_back(i);
    return e;
}

TargetSet intersect_cube(const TargetSet& E, const CubeSpec& q) {
    TargetSet out;
    out.grid = E.grid;
    for (std::size_t i : E.cells)
        if (q.contains(E.grid.center(i), E.grid.dim)) out.cells.push_back(i);
    return out;
}

TargetSet unite(const TargetSet& a, const TargetSet& b) {
    if (!a.grid.same_layout(b.grid))
        throw usage_error("cannot unite target sets on different grids");
    TargetSet out;
    out.grid = a.grid;
    out.cells.resize(a.cells.size() + b.cells.size());
    std::merge(a.cells.begin(), a.cells.end(), b.cells.begin(), b.cells.end(),
               out.cells.begin());
    out.cells.erase(std::unique(out.cells.begin(), out.cells.end()),
                    out.cells.end());
    return out;
}

DenseLagKernel::DenseLagKernel(const Grid& grid,
                               std::vector<std::size_t> constraint_cells,
                               const Field& omega, const PointKernel& kernel)
    : grid_(grid), rows_(std::move(constraint_cells)) {
    check_layout(omega, grid, "weight");
    const std::size_t nc = grid.cell_count();
    for (std::size_t r : rows_)
        if (r >= nc) throw usage_error("constraint cell outside the grid");
    const double vol = grid.cell_volume();
    u_.resize(nc);
    for (std::size_t i = 0; i < nc; ++i) u_[i] = omega.values[i] * vol;
    // kernel values by axis lag, with the quadrature volume folded in
    const int nx = grid.shape[0];
    const int ny = grid.shape[1];
    table_.resize(nc);
    for (int dy = 0; dy < ny; ++dy)
        for (int dx = 0; dx < nx; ++dx)
            table_[static_cast<std::size_t>(dy) * nx + dx] =
                kernel(std::max(dx, dy) * grid.h, grid.dim, grid.h) * vol;
}

void DenseLagKernel::apply(const std::vector<double>& f,
                           std::vector<double>& out) const {
    out.resize(rows_.size());
    const int nx = grid_.shape[0];
    const int ny = grid_.shape[1];
    parallel_for(rows_.size(), [&](std::size_t jj) {
        const std::size_t j = rows_[jj];
        const int jx = static_cast<int>(j % static_cast<std::size_t>(nx));
        const int jy = static_cast<int>(j / static_cast<std::size_t>(nx));
        double s = 0.0;
        std::size_t i = 0;
        for (int iy = 0; iy < ny; ++iy) {
            const double* trow =
                &table_[static_cast<std::size_t>(std::abs(iy - jy)) * nx];
            for (int ix = 0; ix < nx; ++ix, ++i)
                s += trow[std::abs(ix - jx)] * f[i];
        }
        out[jj] = s;
    });
}

void DenseLagKernel::apply_adjoint(const std::vector<double>& nu,
                                   std::vector<double>& out) const {
    out.resize(grid_.cell_count());
    const int nx = grid_.shape[0];
    parallel_for(grid_.cell_count(), [&](std::size_t i) {
        const int ix = static_cast<int>(i % static_cast<std::size_t>(nx));
        const int iy = static_cast<int>(i / static_cast<std::size_t>(nx));
        double s = 0.0;
        for (std::size_t jj = 0; jj < rows_.size(); ++jj) {
            const std::size_t j = rows_[jj];
            const int jx = static_cast<int>(j % static_cast<std::size_t>(nx));
            const int jy = static_cast<int>(j / static_cast<std::size_t>(nx));
            s += table_[static_cast<std::size_t>(std::abs(iy - jy)) * nx +
                        std::abs(ix - jx)] *
                 nu[jj];
        }
        out[i] = s;
    });
}

SpaceTimeKernel::SpaceTimeKernel(const Grid& grid,
                                 std::vector<std::size_t> constraint_cells,
                                 const Field& omega, double alpha, double p,
                                 const LogTimeGrid& tgrid)
    : grid_(grid), rows_(std::move(constraint_cells)) {
    if (!(p > 1.0)) throw usage_error("space-time kernel needs p > 1");
    if (!(alpha > 0.0 && alpha < grid.dim))
        throw usage_error("kernel order alpha must satisfy 0 < alpha < dim");
    check_layout(omega, grid, "weight");
    const std::size_t nc = grid.cell_count();
    for (std::size_t r : rows_)
        if (r >= nc) throw usage_error("constraint cell outside the grid");
    wdual_ = dual_weight(omega, p).values;
    nodes_ = tgrid.nodes();
    const double vol = grid.cell_volume();
    const double h = grid.h;
    u_.resize(nc * nodes_.size());
    overlap_.resize(nodes_.size());
    reach_.resize(nodes_.size());
    tker_.resize(nodes_.size());
    const int span = std::max(grid.shape[0], grid.shape[1]);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const double t = nodes_[k].t;
        tker_[k] = std::pow(t, -(grid.dim - alpha));
        // 1d overlap of the cell at axis lag d with the open window (-t, t)
        auto& ov = overlap_[k];
        for (int d = 0; d <= span; ++d) {
            const double o = std::min(d * h + 0.5 * h, t) -
                             std::max(d * h - 0.5 * h, -t);
            if (o <= 0.0) break;
            ov.push_back(o);
        }
        if (ov.empty()) ov.push_back(0.0);
        reach_[k] = static_cast<int>(ov.size()) - 1;
        for (std::size_t i = 0; i < nc; ++i)
            u_[k * nc + i] = wdual_[i] * vol * nodes_[k].w;
    }
}

double SpaceTimeKernel::window_sum(const std::vector<double>& cellvals,
                                   std::size_t center, std::size_t node) const {
    const auto& ov = overlap_[node];
    const int R = reach_[node];
    const int nx = grid_.shape[0];
    const int ny = grid_.shape[1];
    const int cx = static_cast<int>(center % static_cast<std::size_t>(nx));
    const int cy = static_cast<int>(center / static_cast<std::size_t>(nx));
    double s = 0.0;
    if (grid_.dim == 1) {
        const int x0 = std::max(0, cx - R);
        const int x1 = std::min(nx - 1, cx + R);
        for (int x = x0; x <= x1; ++x) s += ov[std::abs(x - cx)] * cellvals[x];
        return s;
    }
    const int y0 = std::max(0, cy - R);
    const int y1 = std::min(ny - 1, cy + R);
    const int x0 = std::max(0, cx - R);
    const int x1 = std::min(nx - 1, cx + R);
    for (int y = y0; y <= y1; ++y) {
        const double wy = ov[std::abs(y - cy)];
        const std::size_t row = static_cast<std::size_t>(y) * nx;
        for (int x = x0; x <= x1; ++x)
            s += wy * ov[std::abs(x - cx)] * cellvals[row + x];
    }
    return s;
}

void SpaceTimeKernel::scatter_window(double amount, std::size_t center,
                                     std::size_t node,
                                     std::vector<double>& out) const {
    const auto& ov = overlap_[node];
    const int R = reach_[node];
    const int nx = grid_.shape[0];
    const int ny = grid_.shape[1];
    const int cx = static_cast<int>(center % static_cast<std::size_t>(nx));
    const int cy = static_cast<int>(center / static_cast<std::size_t>(nx));
    if (grid_.dim == 1) {
        const int x0 = std::max(0, cx - R);
        const int x1 = std::min(nx - 1, cx + R);
        for (int x = x0; x <= x1; ++x) out[x] += amount * ov[std::abs(x - cx)];
        return;
    }
    const int y0 = std::max(0, cy - R);
    const int y1 = std::min(ny - 1, cy + R);
    const int x0 = std::max(0, cx - R);
    const int x1 = std::min(nx - 1, cx + R);
    for (int y = y0; y <= y1; ++y) {
        const double wy = amount * ov[std::abs(y - cy)];
        const std::size_t row = static_cast<std::size_t>(y) * nx;
        for (int x = x0; x <= x1; ++x) out[row + x] += wy * ov[std::abs(x - cx)];
    }
}

void SpaceTimeKernel::apply(const std::vector<double>& f,
                            std::vector<double>& out) const {
    const std::size_t nc = grid_.cell_count();
    out.assign(rows_.size(), 0.0);
    std::vector<double> tmp(nc);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const double* fk = &f[k * nc];
        for (std::size_t i = 0; i < nc; ++i) tmp[i] = wdual_[i] * fk[i];
        const double c = nodes_[k].w * tker_[k];
        parallel_for(rows_.size(), [&](std::size_t jj) {
            out[jj] += c * window_sum(tmp, rows_[jj], k);
        });
    }
}

void SpaceTimeKernel::apply_adjoint(const std::vector<double>& nu,
                                    std::vector<double>& out) const {
    const std::size_t nc = grid_.cell_count();
    out.resize(nc * nodes_.size());
    std::vector<double> tmp(nc);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (std::size_t jj = 0; jj < rows_.size(); ++jj)
            scatter_window(nu[jj], rows_[jj], k, tmp);
        const double c = nodes_[k].w * tker_[k];
        double* ok = &out[k * nc];
        for (std::size_t i = 0; i < nc; ++i) ok[i] = tmp[i] * wdual_[i] * c;
    }
}

CapacitySolution solve_capacity(const KernelOp& op, double p,
                                const std::vector<double>& obstacle,
                                const SolverParams& params) {
    if (!(p > 1.0)) throw usage_error("capacity solver needs p > 1");
    const std::size_t m = op.constraints();
    const std::size_t n = op.unknowns();
    if (obstacle.size() != m)
        throw usage_error("obstacle size does not match the constraint count");
    CapacitySolution sol;
    sol.primal_raw.assign(n, 0.0);
    sol.dual_raw.assign(m, 0.0);
    if (m == 0) return sol;
    for (double gj : obstacle)
        if (!(gj > 0.0) || !std::isfinite(gj))
            throw usage_error("obstacle entries must be positive and finite");

    const double pp = p / (p - 1.0);  // conjugate exponent
    const std::vector<double>& u = op.norm_weights();
    const std::vector<double>& g = obstacle;
    std::vector<double> uexp(n);
    for (std::size_t i = 0; i < n; ++i) uexp[i] = std::pow(u[i], 1.0 - pp);

    // Dual pieces at nu: a = B^T nu, G = <g,nu>, S = sum u^{1-p'} max(a,0)^{p'}.
    // We minimize F = -p G + (p-1) S over nu >= 0 by accelerated projected
    // gradient with backtracking. Any nu >= 0 certifies the lower bound
    // G^p S^{1-p}; the recovered primal f = (max(a,0)/u)^{p'-1} has energy S
    // and, after rescaling by its worst constraint ratio, certifies an upper
    // bound S / min_j((Bf)_j/g_j)^p.
    struct Eval {
        double G = 0.0, S = 0.0, F = 0.0;
    };
    auto reduce = [&](const std::vector<double>& nu, const std::vector<double>& a,
                      Eval& ev) {
        double G = 0.0;
        for (std::size_t j = 0; j < m; ++j) G += g[j] * nu[j];
        double S = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (a[i] > 0.0) S += uexp[i] * std::pow(a[i], pp);
        ev.G = G;
        ev.S = S;
        ev.F = -p * G + (p - 1.0) * S;
    };

    std::vector<double> nu(m, 1.0), nu_prev(m), y(m), cand(m);
    std::vector<double> a(n), a_prev(n), ay(n), acand(n);
    std::vector<double> fbuf(n), bf(m), grad(m);

    op.apply_adjoint(nu, a);
    Eval ev;
    reduce(nu, a, ev);
    if (!(ev.S > 0.0))
        throw solver_error("kernel degenerate: zero potential on every cell");
    {
        // optimal rescale of the starting point: max of F along the ray c*nu
        const double c = std::pow(ev.G / ev.S, p - 1.0);
        for (auto& v : nu) v *= c;
        for (auto& v : a) v *= c;
        reduce(nu, a, ev);
    }

    double best_lower = 0.0;
    double best_upper = kInf;
    std::vector<double> best_f, best_nu;
    auto record_lower = [&](const std::vector<double>& pt, const Eval& e) {
        if (!(e.S > 0.0) || !(e.G > 0.0)) return;
        const double lb = std::pow(e.G, p) * std::pow(e.S, 1.0 - p);
        if (lb > best_lower) {
            best_lower = lb;
            best_nu = pt;
            const double norm = std::pow(e.S, 1.0 / pp);
            for (auto& v : best_nu) v /= norm;
        }
    };
    auto record_upper = [&](const std::vector<double>& apt, const Eval& e) {
        if (!(e.S > 0.0)) return;
        for (std::size_t i = 0; i < n; ++i)
            fbuf[i] = std::pow(std::max(apt[i], 0.0) / u[i], pp - 1.0);
        op.apply(fbuf, bf);
        double mr = kInf;
        for (std::size_t j = 0; j < m; ++j) mr = std::min(mr, bf[j] / g[j]);
        if (!(mr > 0.0)) return;
        const double up = e.S / std::pow(mr, p);
        if (up < best_upper) {
            best_upper = up;
            best_f = fbuf;
            for (auto& v : best_f) v /= mr;
        }
    };

    record_lower(nu, ev);
    record_upper(a, ev);

    y = nu;
    ay = a;
    Eval evy = ev;
    Eval ev_acc = ev;  // eval at the current accepted point (nu, a)
    double t_mom = 1.0;
    double L = 1.0;
    const std::size_t pe = std::max<std::size_t>(1, params.polish_every);
    bool converged = false;
    std::size_t iter = 0;
    Eval evc;

    for (iter = 1; iter <= params.max_iter && !converged; ++iter) {
        // gradient of F at the extrapolated point y
        for (std::size_t i = 0; i < n; ++i)
            fbuf[i] = std::pow(std::max(ay[i], 0.0) / u[i], pp - 1.0);
        op.apply(fbuf, bf);
        for (std::size_t j = 0; j < m; ++j) grad[j] = p * (bf[j] - g[j]);

        bool accepted = false;
        for (int bt = 0; bt < 80 && !accepted; ++bt) {
            double quad = evy.F;
            for (std::size_t j = 0; j < m; ++j) {
                cand[j] = std::max(0.0, y[j] - grad[j] / L);
                const double d = cand[j] - y[j];
                quad += grad[j] * d + 0.5 * L * d * d;
            }
            op.apply_adjoint(cand, acand);
            reduce(cand, acand, evc);
            if (evc.F <= quad + 1e-12 * (std::abs(evy.F) + 1.0))
                accepted = true;
            else
                L *= 2.0;
        }
        if (!accepted) break;  // curvature estimate exploded; keep best bounds
        L = std::max(L * 0.95, 1e-12);

        const double F_old = ev_acc.F;
        nu_prev.swap(nu);
        nu.swap(cand);
        a_prev.swap(a);
        a.swap(acand);
        ev_acc = evc;

        record_lower(nu, ev_acc);
        if (iter % pe == 0) record_upper(a, ev_acc);

        if (best_upper < kInf && best_lower > 0.0) {
            const double gap = 1.0 - std::pow(best_lower / best_upper, 1.0 / p);
            if (gap < params.tol) {
                converged = true;
                break;
            }
        }

        if (ev_acc.F > F_old) {
            // momentum overshot; restart from the new point
            t_mom = 1.0;
            y = nu;
            ay = a;
            evy = ev_acc;
        } else {
            const double t_next =
                0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
            const double beta = (t_mom - 1.0) / t_next;
            t_mom = t_next;
            for (std::size_t j = 0; j < m; ++j)
                y[j] = nu[j] + beta * (nu[j] - nu_prev[j]);
            // a is linear in nu, so the extrapolated adjoint is free
            for (std::size_t i = 0; i < n; ++i)
                ay[i] = a[i] + beta * (a[i] - a_prev[i]);
            reduce(y, ay, evy);
        }
    }

    record_upper(a, ev_acc);
    if (best_upper < kInf && best_lower > 0.0) {
        const double gap = 1.0 - std::pow(best_lower / best_upper, 1.0 / p);
        if (gap < params.tol) converged = true;
    }
    if (!(best_upper < kInf))
        throw solver_error("no feasible primal point found");

    sol.value = best_upper;
    sol.value_lower = std::min(best_lower, best_upper);
    sol.gap = best_upper > 0.0
                  ? std::max(0.0, 1.0 - std::pow(sol.value_lower / best_upper,
                                                 1.0 / p))
                  : 0.0;
    sol.primal_raw = std::move(best_f);
    sol.dual_raw = std::move(best_nu);
    sol.iterations = std::min(iter, params.max_iter);
    sol.converged = converged;
    return sol;
}

namespace {

CapacitySolution solve_on_grid(const Grid& grid, const KernelOp& op,
                               const std::vector<std::size_t>& rows, double p,
                               const std::vector<double>& obstacle,
                               const SolverParams& params) {
    CapacitySolution sol = solve_capacity(op, p, obstacle, params);
    sol.primal_f = Field(grid, 0.0);
    if (sol.primal_raw.size() == grid.cell_count()) {
        sol.primal_f.values = sol.primal_raw;
    }
    sol.dual_mu = DiscreteMeasure(grid);
    for (std::size_t k = 0; k < rows.size(); ++k)
        sol.dual_mu.masses[rows[k]] = sol.dual_raw[k];
    return sol;
}

}  // namespace

CapacitySolution capacity_primal(const TargetSet& E, const Field& omega,
                                 const PointKernel& kernel, double p,
                                 const std::vector<double>& obstacle,
                                 const SolverParams& params) {
    if (!(p > 1.0)) throw usage_error("capacity needs p > 1");
    check_layout(omega, E.grid, "weight");
    if (!obstacle.empty() && obstacle.size() != E.cells.size())
        throw usage_error("obstacle must have one entry per target cell");
    std::vector<std::size_t> rows;
    std::vector<double> g;
    for (std::size_t k = 0; k < E.cells.size(); ++k) {
        const double gk = obstacle.empty() ? 1.0 : obstacle[k];
        if (!(gk >= 0.0) || !std::isfinite(gk))
            throw usage_error("obstacle must be nonnegative and finite");
        if (gk > 0.0) {
            rows.push_back(E.cells[k]);
            g.push_back(gk);
        }
    }
    if (rows.empty()) return zero_solution(E.grid);
    DenseLagKernel op(E.grid, rows, omega, kernel);
    return solve_on_grid(E.grid, op, rows, p, g, params);
}

CapacitySolution capacity_dual(const TargetSet& E, const Field& omega,
                               const PointKernel& kernel, double p,
                               const SolverParams& params) {
    return capacity_primal(E, omega, kernel, p, {}, params);
}

EquilibriumMeasure equilibrium_measure(const TargetSet& E, const Field& omega,
                                       double alpha, double p, double rho,
                                       const SolverParams& params) {
    CapacitySolution sol = capacity_primal(
        E, omega, LocalRieszKernel{alpha, rho}, p, {}, params);
    if (!(sol.value > 0.0) || !std::isfinite(sol.value) ||
        !(sol.value_lower > 0.0))
        throw solver_error("degenerate capacity: no equilibrium measure");

    EquilibriumMeasure eq;
    eq.capacity = sol.value;
    eq.mu = sol.dual_mu;
    // dual_mu is the normalized admissible measure; its total obstacle pairing
    // is value_lower^{1/p}, so this rescale gives mu(E) = capacity.
    const double scale = sol.value / std::pow(sol.value_lower, 1.0 / p);
    for (auto& v : eq.mu.masses) v *= scale;

    const Field V = nonlinear_potential_V(eq.mu, omega, alpha, p, rho);
    double peak = 0.0;
    for (double v : eq.mu.masses) peak = std::max(peak, v);
    double vmax = 0.0;
    for (std::size_t i = 0; i < eq.mu.masses.size(); ++i)
        if (eq.mu.masses[i] > 1e-12 * peak) vmax = std::max(vmax, V.values[i]);
    double vmin = kInf;
    for (std::size_t i : E.cells) vmin = std::min(vmin, V.values[i]);
    eq.max_potential_on_support = vmax;
    eq.min_potential_on_set = vmin;
    return eq;
}

double capacity_cube_formula(const Point& a, double r, const Field& omega,
                             double alpha, double p, double rho) {
    if (!(p > 1.0)) throw usage_error("cube formula needs p > 1");
    if (!(rho > 0.0) || !(r > 0.0) || r > 2.0 * rho * (1.0 + 1e-12))
        throw usage_error("cube formula needs 0 < r <= 2 rho");
    const int dim = omega.grid.dim;
    if (!(alpha > 0.0 && alpha < dim))
        throw usage_error("kernel order alpha must satisfy 0 < alpha < dim");
    if (r >= 2.0 * rho * (1.0 - 1e-12)) return kInf;  // empty range
    const double pp = p / (p - 1.0);
    const Field wdual = dual_weight(omega, p);
    const LogTimeGrid tg{r, 2.0 * rho, 8};
    double integral = 0.0;
    for (const auto& nd : tg.nodes()) {
        const double wq = cube_weighted_volume(wdual, {a, nd.t});
        integral += wq / std::pow(nd.t, (dim - alpha) * pp) * nd.w;
    }
    if (!(integral > 0.0)) return kInf;
    return std::pow(integral, 1.0 - p);
}

CapacitySolution capacity_variant_R(const TargetSet& E, const Field& omega,
                                    double alpha, double p, double rho,
                                    const SolverParams& params) {
    if (E.empty()) return zero_solution(E.grid);
    const LogTimeGrid tg = LogTimeGrid::standard(E.grid.h, rho);
    SpaceTimeKernel op(E.grid, E.cells, omega, alpha, p, tg);
    std::vector<double> ones(E.cells.size(), 1.0);
    CapacitySolution sol = solve_capacity(op, p, ones, params);
    // summarize the space-time minimizer by its dt/t marginal
    sol.primal_f = Field(E.grid, 0.0);
    const std::size_t nc = E.grid.cell_count();
    const auto& nodes = op.nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k)
        for (std::size_t i = 0; i < nc; ++i)
            sol.primal_f.values[i] += sol.primal_raw[k * nc + i] * nodes[k].w;
    sol.dual_mu = DiscreteMeasure(E.grid);
    for (std::size_t k = 0; k < E.cells.size(); ++k)
        sol.dual_mu.masses[E.cells[k]] = sol.dual_raw[k];
    return sol;
}

CapacitySolution bessel_capacity(const TargetSet& E, const Field& omega,
                                 double p, double alpha,
                                 const SolverParams& params) {
    return capacity_primal(E, omega, BesselKernelApprox{alpha}, p, {}, params);
}

ThinnessReport thinness_diagnostic(const TargetSet& E, const Point& a,
                                   const Field& omega, double alpha, double p,
                                   double rho, int kmax,
                                   const SolverParams& params) {
    if (!(p > 1.0)) throw usage_error("thinness diagnostic needs p > 1");
    if (kmax < 0) throw usage_error("kmax must be nonnegative");
    check_layout(omega, E.grid, "weight");
    if (std::ldexp(rho, -kmax) < E.grid.h * (1.0 - 1e-9))
        throw usage_error("kmax exceeds log2(rho/h): cubes below cell size");
    const double pp = p / (p - 1.0);
    ThinnessReport rep;
    rep.a = a;
    double div_sum = 0.0;
    double thin_sum = 0.0;
    for (int k = 0; k <= kmax; ++k) {
        const double tk = std::ldexp(rho, -k);
        rep.scales.push_back(tk);

        const TargetSet Ek = intersect_cube(E, {a, tk});
        const double cap =
            capacity_primal(Ek, omega, LocalRieszKernel{alpha, rho}, p, {},
                            params)
                .value;
        rep.capacities.push_back(cap);

        const double wq = cube_weighted_volume(omega, {a, tk});
        if (cap > 0.0 && wq > 0.0)
            thin_sum +=
                std::pow(std::pow(2.0, -alpha * p * k) * cap / wq, pp - 1.0);
        rep.thinness_partial.push_back(thin_sum);

        // weight-only divergence integrand over the octave below tk
        const LogTimeGrid tg{0.5 * tk, tk, 8};
        for (const auto& nd : tg.nodes()) {
            const double w = cube_weighted_volume(omega, {a, nd.t});
            if (w > 0.0)
                div_sum +=
                    std::pow(std::pow(nd.t, alpha * p) / w, pp - 1.0) * nd.w;
        }
        rep.divergence_partial.push_back(div_sum);
    }
    return rep;
}

}  // namespace capax
