#include "capax/weights.hpp"

#include <cmath>

#include "capax/maximal.hpp"

namespace capax {

namespace {

double sup_norm(const Point& x, int dim) {
    return dim == 2 ? std::max(std::abs(x[0]), std::abs(x[1])) : std::abs(x[0]);
}

void check_positive(const Field& w, const char* what) {
    for (double v : w.values) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw usage_error(std::string(what) + " produced a nonpositive or infinite value");
    }
}

}  // namespace

Field weight_power(const Grid& grid, double a) {
    Field w(grid);
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        double d = sup_norm(grid.center(i), grid.dim);
        // Never evaluate at distance below the cell scale: keeps the field
        // finite when a < 0 even if a center sits near the origin.
        if (a < 0.0) d = std::max(d, 0.5 * grid.h);
        w.values[i] = std::pow(d, a);
    }
    check_positive(w, "weight_power");
    return w;
}

Field weight_exp(const Grid& grid, double c) {
    Field w(grid);
    for (std::size_t i = 0; i < w.values.size(); ++i)
        w.values[i] = std::exp(c * sup_norm(grid.center(i), grid.dim));
    check_positive(w, "weight_exp");
    return w;
}

Field weight_product(const Field& w1, const Field& w2, double p) {
    if (!w1.grid.same_layout(w2.grid)) throw usage_error("weight_product: grid mismatch");
    Field w(w1.grid);
    for (std::size_t i = 0; i < w.values.size(); ++i)
        w.values[i] = w1.values[i] * std::pow(w2.values[i], 1.0 - p);
    check_positive(w, "weight_product");
    return w;
}

Field weight_truncate(const Field& w, double k) {
    if (!(k > 0.0)) throw usage_error("weight_truncate: level must be positive");
    Field out = w;
    for (double& v : out.values) v = std::min(v, k);
    return out;
}

std::pair<Field, double> weight_interpolate(const Field& w0, double p0,
                                            const Field& w1, double p1,
                                            double theta) {
    if (!w0.grid.same_layout(w1.grid))
        throw usage_error("weight_interpolate: grid mismatch");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw usage_error("weight_interpolate: theta must be in [0,1]");
    if (!(p0 >= 1.0 && p1 >= 1.0))
        throw usage_error("weight_interpolate: exponents must be >= 1");
    const double inv_p = (1.0 - theta) / p0 + theta / p1;
    const double p = 1.0 / inv_p;
    Field w(w0.grid);
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        const double log_root = (1.0 - theta) / p0 * std::log(w0.values[i]) +
                                theta / p1 * std::log(w1.values[i]);
        w.values[i] = std::exp(p * log_root);
    }
    check_positive(w, "weight_interpolate");
    return {std::move(w), p};
}

double conjugate_exponent(double p) {
    if (!(p > 1.0)) throw usage_error("conjugate exponent needs p > 1");
    return p / (p - 1.0);
}

Field dual_weight(const Field& w, double p) {
    if (!(p > 1.0)) throw usage_error("dual_weight needs p > 1");
    const double e = 1.0 - conjugate_exponent(p);  // = -1/(p-1)
    Field out(w.grid);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = std::pow(w.values[i], e);
    check_positive(out, "dual_weight");
    return out;
}

namespace {

// Grid max of the field over cells meeting the cube (ess sup on the grid).
double cube_max(const Field& f, const CubeSpec& q) {
    const Grid& g = f.grid;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const Point c = g.center(i);
        bool inside = true;
        for (int a = 0; a < g.dim; ++a) {
            const double cell_lo = c[a] - 0.5 * g.h;
            const double cell_hi = c[a] + 0.5 * g.h;
            if (cell_hi <= q.center[a] - q.half_len || cell_lo >= q.center[a] + q.half_len)
                inside = false;
        }
        if (inside) best = std::max(best, f.values[i]);
    }
    return best;
}

}  // namespace

ApReport ap_loc_constant(const Field& w, double p, const CubeLattice& lattice) {
    if (!(p >= 1.0)) throw usage_error("ap_loc_constant needs p >= 1");
    if (lattice.cubes.empty()) throw usage_error("ap_loc_constant: empty lattice");
    ApReport rep;
    rep.p = p;
    rep.rho = lattice.rho;
    rep.constant = 0.0;

    Field inv(w.grid);
    const double s = p > 1.0 ? 1.0 / (p - 1.0) : 1.0;
    for (std::size_t i = 0; i < inv.values.size(); ++i)
        inv.values[i] = std::pow(w.values[i], -s);

    std::vector<double> vals(lattice.cubes.size());
    parallel_for(lattice.cubes.size(), [&](std::size_t c) {
        const CubeSpec& q = lattice.cubes[c];
        const double avg_w = cube_average(w, q);
        if (p > 1.0) {
            vals[c] = avg_w * std::pow(cube_average(inv, q), p - 1.0);
        } else {
            vals[c] = avg_w * cube_max(inv, q);
        }
    });
    for (std::size_t c = 0; c < vals.size(); ++c) {
        if (vals[c] > rep.constant) {
            rep.constant = vals[c];
            rep.argmax_cube = lattice.cubes[c];
        }
    }
    return rep;
}

ApReport ainf_loc_constant(const Field& w, const CubeLattice& lattice) {
    if (lattice.cubes.empty()) throw usage_error("ainf_loc_constant: empty lattice");
    ApReport rep;
    rep.p = std::numeric_limits<double>::infinity();
    rep.rho = lattice.rho;
    rep.constant = 0.0;

    Field log_inv(w.grid);
    for (std::size_t i = 0; i < log_inv.values.size(); ++i)
        log_inv.values[i] = -std::log(w.values[i]);

    std::vector<double> vals(lattice.cubes.size());
    parallel_for(lattice.cubes.size(), [&](std::size_t c) {
        const CubeSpec& q = lattice.cubes[c];
        vals[c] = cube_average(w, q) * std::exp(cube_average(log_inv, q));
    });
    for (std::size_t c = 0; c < vals.size(); ++c) {
        if (vals[c] > rep.constant) {
            rep.constant = vals[c];
            rep.argmax_cube = lattice.cubes[c];
        }
    }
    return rep;
}

double reverse_holder_constant(double ap_constant, double p, int dim) {
    // beta is the subset-density bound 1 - (3/4)/A at selection ratio
    // alpha with (1 - alpha)^p = 3/4; the certificate constant is
    // [1 + 1/(sqrt(beta) - beta)]^{2L/(2L - log beta)} with L = log(3^n/alpha).
    const double beta = 1.0 - 0.75 / std::max(ap_constant, 1.0);
    const double alpha = 1.0 - std::pow(0.75, 1.0 / p);
    const double big_l = std::log(std::pow(3.0, dim) / alpha);
    const double base = 1.0 + 1.0 / (std::sqrt(beta) - beta);
    const double expo = 2.0 * big_l / (2.0 * big_l - std::log(beta));
    return std::pow(base, expo);
}

ReverseHolderCert reverse_holder_search(const Field& w, double p,
                                        const CubeLattice& lattice) {
    const ApReport ap = ap_loc_constant(w, p, lattice);
    ReverseHolderCert cert;
    cert.rho = lattice.rho;
    cert.constant = reverse_holder_constant(ap.constant, p, w.grid.dim);

    std::vector<const CubeSpec*> small;
    for (const CubeSpec& q : lattice.cubes)
        if (2.0 * q.half_len <= lattice.rho / 3.0 * (1.0 + 1e-12)) small.push_back(&q);
    if (small.empty()) {
        // No cube at or below rho/3 on this lattice; certify the top gamma
        // vacuously (the invariant quantifies over an empty family).
        cert.gamma = 1.0;
        cert.validated = true;
        return cert;
    }

    for (int k = 0; k <= 12; ++k) {
        const double gamma = std::pow(2.0, -k);
        Field pw(w.grid);
        for (std::size_t i = 0; i < pw.values.size(); ++i)
            pw.values[i] = std::pow(w.values[i], 1.0 + gamma);
        bool ok = true;
        for (const CubeSpec* q : small) {
            const double lhs = std::pow(cube_average(pw, *q), 1.0 / (1.0 + gamma));
            const double rhs = cert.constant * cube_average(w, *q);
            if (!(lhs <= rhs * (1.0 + 1e-12))) {
                ok = false;
                break;
            }
        }
        if (ok) {
            cert.gamma = gamma;
            cert.validated = true;
            return cert;
        }
    }
    cert.gamma = 0.0;
    cert.validated = false;
    return cert;
}

Field extend_periodic(const Field& w_on_cube, double rho, const Grid& target) {
    const Grid& src = w_on_cube.grid;
    if (src.dim != target.dim || src.h != target.h)
        throw usage_error("extend_periodic: source and target grids disagree");
    for (int a = 0; a < src.dim; ++a) {
        const double len = src.shape[a] * src.h;
        if (std::abs(len - rho) > 1e-9 * rho)
            throw usage_error("extend_periodic: input must cover a cube of side rho");
    }
    Field out(target);
    const double period = 2.0 * rho;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const Point c = target.center(i);
        int idx[2] = {0, 0};
        for (int a = 0; a < src.dim; ++a) {
            double u = c[a] - src.origin[a];
            u -= period * std::floor(u / period);
            if (u >= rho) u = period - u;  // even reflection
            int j = static_cast<int>(std::floor(u / src.h));
            j = std::clamp(j, 0, src.shape[a] - 1);
            idx[a] = j;
        }
        out.values[i] =
            w_on_cube.values[static_cast<std::size_t>(idx[1]) * src.shape[0] + idx[0]];
    }
    return out;
}

A1Decomposition decompose_a1(const Field& w, double rho) {
    // The reverse Holder certificate must hold on cubes up to l(Q) = rho, so
    // search at scale 3 rho (the certificate covers l(Q) <= rho/3 of its own rho).
    const CubeLattice lat = enumerate_cubes(w.grid, 3.0 * rho, CubePolicy::centered);
    const ReverseHolderCert cert = reverse_holder_search(w, 1.0, lat);
    const double gamma = cert.validated ? cert.gamma : std::pow(2.0, -12);
    A1Decomposition dec;
    dec.epsilon = 1.0 / (1.0 + gamma);

    dec.f = Field(w.grid);
    for (std::size_t i = 0; i < dec.f.values.size(); ++i)
        dec.f.values[i] = std::pow(w.values[i], 1.0 + gamma);

    const Field mf = uncentered_local_maximal(dec.f, rho,
                                              enumerate_cubes(w.grid, rho, CubePolicy::centered));
    dec.k = Field(w.grid);
    for (std::size_t i = 0; i < dec.k.values.size(); ++i)
        dec.k.values[i] = w.values[i] / std::pow(mf.values[i], dec.epsilon);
    return dec;
}

}  // namespace capax
